#pragma once

#include <chrono>

#include "ssd/dpp.hpp"
#include "ssd/ssd_engine.hpp"
#include "ssd/types.hpp"

namespace ssd {

// Dispatches one request to the engine selected by the config. For the DPP
// variants this is the full pipeline (kernel build included), and the
// report's elapsed time and working bytes cover it.
template <typename Scalar>
RerankReport<Scalar> run_rerank(const PreparedPool<Scalar>& pool,
                                const RerankConfig<Scalar>& config,
                                Scalar alpha = Scalar(1)) {
  const auto started = std::chrono::steady_clock::now();
  RerankReport<Scalar> report;
  switch (config.algorithm) {
    case Algorithm::SsdNoWindow:
      report = ssd_no_window(pool, config);
      break;
    case Algorithm::SsdWindow:
      report = ssd_window(pool, config);
      break;
    case Algorithm::SsdStar:
      report = ssd_star(pool, config);
      break;
    case Algorithm::DppNoWindow: {
      const DppKernel<Scalar> kernel = build_kernel(pool, alpha);
      report = dpp_greedy(kernel, config);
      report.peak_working_bytes += kernel.working_bytes();
      break;
    }
    case Algorithm::DppWindow: {
      const DppKernel<Scalar> kernel = build_kernel(pool, alpha);
      report = dpp_greedy_window(kernel, config);
      report.peak_working_bytes += kernel.working_bytes();
      break;
    }
  }
  report.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  return report;
}

}  // namespace ssd
