#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ssd/types.hpp"

namespace ssd {

// Quality-weighted DPP kernel K_ij = r'_i r'_j <v_i, v_j> with
// r'_i = exp(alpha * standardized quality). The full N x N matrix is
// materialized on purpose; that cost profile is what this baseline exists
// to exhibit.
template <typename Scalar>
struct DppKernel {
  RowMatrix<Scalar> kernel;
  Scalar alpha = Scalar(1);
  std::vector<std::string> ids;
  DenseVector<Scalar> qualities;  // standardized, kept for early-halt padding

  Index size() const { return kernel.rows(); }
  std::size_t working_bytes() const {
    return sizeof(Scalar) * static_cast<std::size_t>(kernel.size() + qualities.size());
  }
};

template <typename Scalar>
DppKernel<Scalar> build_kernel(const PreparedPool<Scalar>& pool, Scalar alpha) {
  if (!(alpha > Scalar(0))) throw ConfigError("alpha must be positive");
  const Index n = pool.size();
  DppKernel<Scalar> out;
  out.alpha = alpha;
  out.ids = pool.ids;
  out.qualities = pool.qualities;
  const DenseVector<Scalar> multipliers = (alpha * pool.qualities.array()).exp();
  const RowMatrix<Scalar> scaled = multipliers.asDiagonal() * pool.embeddings;
  out.kernel.setZero(n, n);
  // rank-k update keeps the N x N buffer as the only quadratic allocation
  // and makes the result symmetric by construction; the upper triangle is
  // mirrored tile-wise (a straight transposed assignment strides the whole
  // matrix and dominates the build once the kernel outgrows the caches).
  out.kernel.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  constexpr Index kTile = 256;
  for (Index i = 0; i < n; i += kTile) {
    const Index rows = std::min(kTile, n - i);
    for (Index j = i; j < n; j += kTile) {
      const Index cols = std::min(kTile, n - j);
      if (i == j) {
        for (Index a = 0; a < rows; ++a)
          for (Index b = a + 1; b < cols; ++b)
            out.kernel(i + a, j + b) = out.kernel(j + b, i + a);
      } else {
        out.kernel.block(i, j, rows, cols) =
            out.kernel.block(j, i, cols, rows).transpose();
      }
    }
  }
  return out;
}

namespace detail {

template <typename Scalar>
std::vector<Index> quality_padding_order(const DppKernel<Scalar>& kernel,
                                         const BoolArray& chosen) {
  std::vector<Index> rest;
  for (Index j = 0; j < kernel.size(); ++j)
    if (!chosen[j]) rest.push_back(j);
  std::stable_sort(rest.begin(), rest.end(), [&](Index a, Index b) {
    return kernel.qualities[a] > kernel.qualities[b];
  });
  return rest;
}

template <typename Scalar>
StepRecord<Scalar> dpp_step_record(const DppKernel<Scalar>& kernel, Index j,
                                   Scalar gain_sq, Scalar log_volume,
                                   Scalar epsilon) {
  StepRecord<Scalar> record;
  record.chosen_index = j;
  record.chosen_id = kernel.ids[static_cast<std::size_t>(j)];
  record.quality_term = kernel.qualities[j];
  record.diversity_term =
      gain_sq < epsilon * epsilon ? Scalar(0) : std::sqrt(gain_sq);
  record.log_volume = log_volume;
  return record;
}

template <typename Scalar>
void finish_report(RerankReport<Scalar>& report,
                   std::chrono::steady_clock::time_point started) {
  report.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  report.sequence.reserve(report.per_step.size());
  for (const auto& record : report.per_step)
    report.sequence.push_back(record.chosen_id);
}

}  // namespace detail

// Incremental-Cholesky greedy MAP inference. Maintains every candidate's
// marginal gain d_j^2 (the squared Cholesky pivot, initialized to K_jj) and
// an orthogonalization row c_j that grows by one entry per step; a step costs
// O(N t). Selection halts early once max d_j^2 < epsilon^2 (the log-det gain
// is no longer positive) and the remainder is padded by descending quality,
// keeping report lengths uniform across algorithms.
template <typename Scalar>
RerankReport<Scalar> dpp_greedy(const DppKernel<Scalar>& kernel,
                                const RerankConfig<Scalar>& config,
                                std::vector<DenseVector<Scalar>>* gain_trace = nullptr) {
  const Index n = kernel.size();
  const Index target = config.sequence_length;
  if (target < 1) throw ConfigError("sequence length must be positive");
  if (target > n)
    throw ConfigError("sequence length " + std::to_string(target) +
                      " exceeds pool size " + std::to_string(n));
  const Scalar eps = config.epsilon;
  const Scalar halt = eps * eps;

  const auto started = std::chrono::steady_clock::now();
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

  DenseVector<Scalar> gain_sq = kernel.kernel.diagonal();
  RowMatrix<Scalar> ortho(n, target);  // rows c_j, one column per step
  BoolArray chosen = BoolArray::Constant(n, false);
  RerankReport<Scalar> report;
  report.per_step.reserve(static_cast<std::size_t>(target));
  Scalar log_volume = 0;
  Index columns = 0;

  const auto check_psd = [&](Index j) {
    if (gain_sq[j] < -eps)
      throw NumericalError("kernel is not positive semidefinite (marginal gain " +
                           std::to_string(static_cast<double>(gain_sq[j])) +
                           " at index " + std::to_string(j) + ")");
  };
  for (Index j = 0; j < n; ++j) check_psd(j);

  const auto argmax_gain = [&]() {
    Index best = -1;
    for (Index j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      if (best < 0 || gain_sq[j] > gain_sq[best]) best = j;
    }
    return best;
  };

  const auto pad_by_quality = [&]() {
    for (Index j : detail::quality_padding_order(kernel, chosen)) {
      if (static_cast<Index>(report.per_step.size()) >= target) break;
      chosen[j] = true;
      report.per_step.push_back(
          detail::dpp_step_record(kernel, j, Scalar(0), neg_inf, eps));
    }
  };

  while (static_cast<Index>(report.per_step.size()) < target) {
    if (gain_trace) gain_trace->push_back(gain_sq);
    const Index pick = argmax_gain();
    if (gain_sq[pick] < halt) {
      log_volume = neg_inf;
      pad_by_quality();
      break;
    }
    chosen[pick] = true;
    log_volume += Scalar(0.5) * std::log(gain_sq[pick]);
    report.per_step.push_back(
        detail::dpp_step_record(kernel, pick, gain_sq[pick], log_volume, eps));
    if (static_cast<Index>(report.per_step.size()) >= target) break;

    const Scalar pivot = std::sqrt(gain_sq[pick]);
    for (Index j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      const Scalar e =
          (kernel.kernel(pick, j) -
           ortho.row(pick).head(columns).dot(ortho.row(j).head(columns))) /
          pivot;
      ortho(j, columns) = e;
      gain_sq[j] -= e * e;
      check_psd(j);
    }
    ++columns;
  }

  detail::finish_report(report, started);
  report.peak_working_bytes =
      sizeof(Scalar) * static_cast<std::size_t>(ortho.size() + gain_sq.size()) +
      sizeof(bool) * static_cast<std::size_t>(chosen.size());
  return report;
}

// Sliding-window DPP baseline: past step t > w the conditioning set is only
// the last w-1 selected items, and each step recomputes a fresh Cholesky of
// the window kernel. Deliberately naive: this is the honest O(N T d w + N^2 d)
// baseline, not a contender.
template <typename Scalar>
RerankReport<Scalar> dpp_greedy_window(const DppKernel<Scalar>& kernel,
                                       const RerankConfig<Scalar>& config) {
  const Index n = kernel.size();
  const Index target = config.sequence_length;
  if (target < 1) throw ConfigError("sequence length must be positive");
  if (target > n)
    throw ConfigError("sequence length " + std::to_string(target) +
                      " exceeds pool size " + std::to_string(n));
  if (config.window < 2) throw ConfigError("windowed inference requires window >= 2");
  const Scalar eps = config.epsilon;
  const Scalar halt = eps * eps;

  const auto started = std::chrono::steady_clock::now();
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

  BoolArray chosen = BoolArray::Constant(n, false);
  std::vector<Index> selected;
  RerankReport<Scalar> report;
  report.per_step.reserve(static_cast<std::size_t>(target));
  Scalar log_volume = 0;
  std::size_t scratch_bytes = 0;

  const auto pad_by_quality = [&]() {
    for (Index j : detail::quality_padding_order(kernel, chosen)) {
      if (static_cast<Index>(report.per_step.size()) >= target) break;
      chosen[j] = true;
      report.per_step.push_back(
          detail::dpp_step_record(kernel, j, Scalar(0), neg_inf, eps));
    }
  };

  DenseVector<Scalar> gains(n);
  while (static_cast<Index>(report.per_step.size()) < target) {
    const Index window_size =
        std::min<Index>(static_cast<Index>(selected.size()), config.window - 1);
    if (window_size == 0) {
      gains = kernel.kernel.diagonal();
    } else {
      // Schur complements of every candidate against the window set.
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> window_kernel(
          window_size, window_size);
      RowMatrix<Scalar> cross(window_size, n);
      const std::size_t offset = selected.size() - static_cast<std::size_t>(window_size);
      for (Index a = 0; a < window_size; ++a) {
        const Index ia = selected[offset + static_cast<std::size_t>(a)];
        cross.row(a) = kernel.kernel.row(ia);
        for (Index b = 0; b < window_size; ++b)
          window_kernel(a, b) =
              kernel.kernel(ia, selected[offset + static_cast<std::size_t>(b)]);
      }
      const Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(
          window_kernel);
      if (llt.info() != Eigen::Success)
        throw NumericalError("window kernel is not positive definite");
      llt.matrixL().solveInPlace(cross);
      gains = kernel.kernel.diagonal() - cross.colwise().squaredNorm().transpose();
      scratch_bytes = std::max(
          scratch_bytes,
          sizeof(Scalar) * static_cast<std::size_t>(window_kernel.size() + cross.size()));
    }

    Index best = -1;
    for (Index j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      if (gains[j] < -eps)
        throw NumericalError("kernel is not positive semidefinite (windowed gain " +
                             std::to_string(static_cast<double>(gains[j])) +
                             " at index " + std::to_string(j) + ")");
      if (best < 0 || gains[j] > gains[best]) best = j;
    }
    if (gains[best] < halt) {
      log_volume = neg_inf;
      pad_by_quality();
      break;
    }
    chosen[best] = true;
    selected.push_back(best);
    log_volume += Scalar(0.5) * std::log(gains[best]);
    report.per_step.push_back(
        detail::dpp_step_record(kernel, best, gains[best], log_volume, eps));
  }

  detail::finish_report(report, started);
  report.peak_working_bytes =
      scratch_bytes + sizeof(Scalar) * static_cast<std::size_t>(gains.size()) +
      sizeof(bool) * static_cast<std::size_t>(chosen.size()) +
      sizeof(Index) * selected.capacity();
  return report;
}

}  // namespace ssd
