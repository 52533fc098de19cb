#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ssd/bench.hpp"
#include "ssd/io.hpp"
#include "ssd/preprocess.hpp"
#include "ssd/rerank.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

int run_bench(const std::string& output, std::uint64_t seed, ssd::Index length,
              ssd::Index window) {
  using ssd::Algorithm;
  std::vector<ssd::BenchShape> shapes;
  const ssd::Index d = 65;
  for (const ssd::Index n : {500, 1000, 2000, 4000, 8000})
    shapes.push_back({Algorithm::SsdWindow, n, length, window, d});
  for (const ssd::Index n : {500, 1000, 2000, 4000, 8000})
    shapes.push_back({Algorithm::DppNoWindow, n, length, window, d});
  shapes.push_back({Algorithm::SsdWindow, 600, length, window, d});
  shapes.push_back({Algorithm::DppNoWindow, 600, length, window, d});
  shapes.push_back({Algorithm::DppWindow, 600, length, window, d});

  const ssd::ScalingStudy study = ssd::run_scaling_study(shapes, seed);
  if (output.empty()) {
    ssd::write_bench_csv(study.records, std::cout);
    std::cerr << ssd::bench_summary(study);  // keep stdout parseable
  } else {
    std::ofstream out(output);
    if (!out) throw ssd::InputError("cannot open \"" + output + "\" for writing");
    ssd::write_bench_csv(study.records, out);
    std::cout << ssd::bench_summary(study);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversified re-ranking: selects a length-T item sequence from "
               "scored candidates, trading pointwise quality against "
               "sequence-level diversity (SSD greedy inference and a DPP "
               "greedy baseline)."};

  std::string input;
  std::string algo = "ssd-window";
  long long length = -1;
  long long window = 10;
  double gamma = 1.0;
  double alpha = 1.0;
  double epsilon = 1e-12;
  std::string output;
  std::string report_path;
  std::uint64_t seed = 42;
  bool bench = false;

  app.add_option("--input", input, "candidate pool (newline-delimited JSON)");
  app.add_option("--algo", algo,
                 "ssd-nowindow | ssd-window | ssd-star | dpp-nowindow | dpp-window");
  app.add_option("--length", length, "sequence length T");
  auto* window_opt = app.add_option("--window", window, "sliding window size w");
  app.add_option("--gamma", gamma, "quality/diversity trade-off");
  auto* alpha_opt = app.add_option("--alpha", alpha, "DPP quality exponent (dpp only)");
  app.add_option("--epsilon", epsilon, "numerical tolerance");
  app.add_option("--output", output, "chosen ids, one per line (default stdout)");
  app.add_option("--report", report_path, "per-step diagnostics CSV");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (synthetic/bench mode only)");
  app.add_flag("--bench", bench, "run the scaling study instead of one request");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return kExitConfig;
  }

  try {
    if (bench) {
      const ssd::Index bench_length = length > 0 ? length : 80;
      return run_bench(output, seed, bench_length, window);
    }

    if (input.empty()) throw ssd::ConfigError("--input is required");
    if (length <= 0) throw ssd::ConfigError("--length is required and must be positive");
    const ssd::Algorithm algorithm = ssd::algorithm_from_string(algo);
    if (window_opt->count() > 0 && !ssd::uses_window(algorithm))
      std::cerr << "warning: --window is ignored by " << algo << "\n";
    if (alpha_opt->count() > 0 && algorithm != ssd::Algorithm::DppNoWindow &&
        algorithm != ssd::Algorithm::DppWindow)
      std::cerr << "warning: --alpha is ignored by " << algo << "\n";
    if (seed_opt->count() > 0)
      std::cerr << "warning: --seed only applies to --bench synthetic mode\n";

    const ssd::RawPool<double> raw = ssd::load_candidates(input);
    const ssd::PreparedPool<double> pool = ssd::prepare(raw, epsilon);

    ssd::RerankConfig<double> config;
    config.sequence_length = length;
    config.window = window;
    config.gamma = gamma;
    config.algorithm = algorithm;
    config.epsilon = epsilon;

    const ssd::RerankReport<double> report = ssd::run_rerank(pool, config, alpha);

    if (output.empty()) {
      ssd::write_sequence(report, std::cout);
    } else {
      std::ofstream out(output);
      if (!out) throw ssd::InputError("cannot open \"" + output + "\" for writing");
      ssd::write_sequence(report, out);
    }
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      if (!out)
        throw ssd::InputError("cannot open \"" + report_path + "\" for writing");
      ssd::write_step_report_csv(report, out);
    }
    return 0;
  } catch (const ssd::InputError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitInput;
  } catch (const ssd::ConfigError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitConfig;
  } catch (const ssd::NumericalError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitNumerical;
  }
}
