#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "ssd/dpp.hpp"
#include "ssd/types.hpp"

// Brute-force reference implementations used by tests and the acceptance
// suite. Slow, obvious, allocation-unconstrained; they deliberately avoid the
// engines' incremental tricks (one-step MGS, revert queues, incremental
// Cholesky) so agreement is meaningful.
namespace ssd::oracle {

// L x w x d stack of all length-w windows of an embedded item sequence,
// stored as L stacked w x d slabs. Hankel-like: slab k row m equals slab k+1
// row m-1.
template <typename Scalar>
struct TrajectoryTensor {
  Index length = 0;  // L
  Index window = 0;  // effective window (w truncated to the sequence length)
  Index dim = 0;
  RowMatrix<Scalar> data;  // (L * window) x dim

  auto slab(Index k) const { return data.middleRows(k * window, window); }
};

// Slide a size-w window with stride 1 over the sequence, stack the windows,
// and embed. L = max(1, T - w + 1); a window longer than the sequence is
// truncated to it.
template <typename Scalar>
TrajectoryTensor<Scalar> build_trajectory_tensor(
    const RowMatrix<Scalar>& sequence_embeddings, Index window) {
  const Index length_total = sequence_embeddings.rows();
  if (length_total < 1) throw InputError("trajectory tensor needs a non-empty sequence");
  if (window < 1) throw ConfigError("window must be at least 1");

  TrajectoryTensor<Scalar> tensor;
  tensor.length = std::max<Index>(1, length_total - window + 1);
  tensor.window = std::min(window, length_total);
  tensor.dim = sequence_embeddings.cols();
  tensor.data.resize(tensor.length * tensor.window, tensor.dim);
  for (Index k = 0; k < tensor.length; ++k)
    for (Index m = 0; m < tensor.window; ++m)
      tensor.data.row(k * tensor.window + m) = sequence_embeddings.row(k + m);
  return tensor;
}

// sqrt(det(X X^T)) of the stacked rows, i.e. the volume spanned by them;
// equal to the product of the singular values of X. Gram determinants are
// nonnegative up to roundoff, so negatives clamp to 0.
template <typename Derived>
typename Derived::Scalar gram_det_volume(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense gram = rows.derived() * rows.derived().transpose();
  Scalar det = Eigen::PartialPivLU<Dense>(gram).determinant();
  if (det < Scalar(0)) det = Scalar(0);
  return std::sqrt(det);
}

namespace detail {

// Rebuilds the selected items' orthogonalized vectors from the original
// embeddings with classical Gram-Schmidt. Each item is orthogonalized
// against the `band` items selected just before it (band <= 0 means all);
// this is the from-scratch counterpart of the engines' frozen basis rows.
template <typename Scalar>
RowMatrix<Scalar> rebuild_bases(const RowMatrix<Scalar>& embeddings,
                                const std::vector<Index>& selected, Index band,
                                Scalar epsilon) {
  const Index t = static_cast<Index>(selected.size());
  RowMatrix<Scalar> bases(t, embeddings.cols());
  for (Index m = 0; m < t; ++m) {
    const auto original = embeddings.row(selected[static_cast<std::size_t>(m)]);
    bases.row(m) = original;
    const Index lo = band > 0 ? std::max<Index>(0, m - band) : 0;
    for (Index k = lo; k < m; ++k) {
      const Scalar denom = bases.row(k).squaredNorm();
      if (denom < epsilon * epsilon) continue;
      bases.row(m) -= (original.dot(bases.row(k)) / denom) * bases.row(k);
    }
  }
  return bases;
}

template <typename Scalar>
RerankReport<Scalar> naive_ssd(const PreparedPool<Scalar>& pool,
                               const RerankConfig<Scalar>& config, bool windowed,
                               bool volume_weighted) {
  const Index n = pool.size();
  const Index target = config.sequence_length;
  if (target < 1) throw ConfigError("sequence length must be positive");
  if (target > n)
    throw ConfigError("sequence length " + std::to_string(target) +
                      " exceeds pool size " + std::to_string(n));
  if (config.gamma < Scalar(0)) throw ConfigError("gamma must be non-negative");
  if (windowed && config.window < 2)
    throw ConfigError("windowed inference requires window >= 2");

  const auto started = std::chrono::steady_clock::now();
  const Scalar eps = config.epsilon;

  std::vector<Index> selected;
  BoolArray chosen = BoolArray::Constant(n, false);
  RerankReport<Scalar> report;
  Scalar log_volume = std::log(config.gamma);

  const auto select = [&](Index j, Scalar residual_norm) {
    chosen[j] = true;
    selected.push_back(j);
    log_volume += residual_norm < eps
                      ? -std::numeric_limits<Scalar>::infinity()
                      : std::log(residual_norm);
    StepRecord<Scalar> record;
    record.chosen_index = j;
    record.chosen_id = pool.ids[static_cast<std::size_t>(j)];
    record.quality_term = pool.qualities[j];
    record.diversity_term = residual_norm < eps ? Scalar(0) : residual_norm;
    record.log_volume = log_volume;
    report.per_step.push_back(std::move(record));
  };

  Index first = 0;
  for (Index j = 1; j < n; ++j)
    if (pool.qualities[j] > pool.qualities[first]) first = j;
  select(first, pool.embeddings.row(first).norm());

  DenseVector<Scalar> residual(pool.dim());
  while (static_cast<Index>(selected.size()) < target) {
    // From-scratch orthogonalization of the whole selected prefix, then the
    // window's bases residualize every candidate.
    const RowMatrix<Scalar> bases = rebuild_bases(
        pool.embeddings, selected, windowed ? config.window : Index(0), eps);
    const Index t = static_cast<Index>(selected.size());
    const Index window_lo =
        windowed ? std::max<Index>(0, t - config.window) : Index(0);

    const Scalar volume = volume_weighted ? std::exp(log_volume) : Scalar(0);
    Index best = -1;
    Scalar best_score = 0;
    Scalar best_norm = 0;
    for (Index j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      const auto original = pool.embeddings.row(j);
      residual = original.transpose();
      for (Index k = window_lo; k < t; ++k) {
        const Scalar denom = bases.row(k).squaredNorm();
        if (denom < eps * eps) continue;
        residual -= (original.dot(bases.row(k)) / denom) * bases.row(k).transpose();
      }
      const Scalar norm = residual.norm();
      const Scalar score = volume_weighted
                               ? pool.qualities[j] + norm * volume
                               : pool.qualities[j] + config.gamma * norm;
      if (best < 0 || score > best_score) {
        best = j;
        best_score = score;
        best_norm = norm;
      }
    }
    select(best, best_norm);
  }

  report.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  report.sequence.reserve(report.per_step.size());
  for (const auto& record : report.per_step)
    report.sequence.push_back(record.chosen_id);
  report.peak_working_bytes =
      sizeof(Scalar) *
      static_cast<std::size_t>(target * pool.dim() + pool.dim() + n);
  return report;
}

}  // namespace detail

template <typename Scalar>
RerankReport<Scalar> naive_ssd_no_window(const PreparedPool<Scalar>& pool,
                                         const RerankConfig<Scalar>& config) {
  if (config.algorithm != Algorithm::SsdNoWindow)
    throw ConfigError("config.algorithm does not select ssd-nowindow");
  return detail::naive_ssd(pool, config, false, true);
}

template <typename Scalar>
RerankReport<Scalar> naive_ssd_window(const PreparedPool<Scalar>& pool,
                                      const RerankConfig<Scalar>& config) {
  if (config.algorithm != Algorithm::SsdWindow)
    throw ConfigError("config.algorithm does not select ssd-window");
  return detail::naive_ssd(pool, config, true, true);
}

template <typename Scalar>
RerankReport<Scalar> naive_ssd_star(const PreparedPool<Scalar>& pool,
                                    const RerankConfig<Scalar>& config) {
  if (config.algorithm != Algorithm::SsdStar)
    throw ConfigError("config.algorithm does not select ssd-star");
  return detail::naive_ssd(pool, config, true, false);
}

template <typename Scalar>
struct StepChoice {
  Index index = -1;
  Scalar log_gain = -std::numeric_limits<Scalar>::infinity();
};

// One exhaustive greedy step: evaluates log det K_{S+j} - log det K_S for
// every candidate by direct pivoted factorization and returns the argmax
// (lowest index on ties). A singular conditioning set falls back to the
// pseudo-inverse Schur complement: gain = log(s) when s is positive, else
// -infinity.
template <typename Scalar>
StepChoice<Scalar> dpp_exhaustive_step(const DppKernel<Scalar>& kernel,
                                       const std::vector<Index>& conditioning,
                                       const std::vector<Index>& candidates,
                                       Scalar epsilon) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index m = static_cast<Index>(conditioning.size());
  if (m > 25)
    throw ConfigError("conditioning set too large for the exhaustive oracle");
  if (candidates.empty())
    throw ConfigError("exhaustive step needs at least one candidate");

  StepChoice<Scalar> best;
  const auto consider = [&](Index j, Scalar log_gain) {
    if (best.index < 0 || log_gain > best.log_gain) {
      best.index = j;
      best.log_gain = log_gain;
    }
  };

  if (m == 0) {
    for (Index j : candidates) {
      const Scalar diag = kernel.kernel(j, j);
      consider(j, diag > epsilon * epsilon
                      ? std::log(diag)
                      : -std::numeric_limits<Scalar>::infinity());
    }
    return best;
  }

  Dense conditioned(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      conditioned(a, b) = kernel.kernel(conditioning[static_cast<std::size_t>(a)],
                                        conditioning[static_cast<std::size_t>(b)]);

  const Eigen::FullPivLU<Dense> lu(conditioned);
  const Scalar det = lu.determinant();

  if (lu.rank() < m || !(det > Scalar(0))) {
    // Pseudo-log-det convention for a singular conditioning set.
    const Dense pinv =
        Eigen::CompleteOrthogonalDecomposition<Dense>(conditioned).pseudoInverse();
    DenseVector<Scalar> cross(m);
    for (Index j : candidates) {
      for (Index a = 0; a < m; ++a)
        cross[a] = kernel.kernel(conditioning[static_cast<std::size_t>(a)], j);
      const Scalar schur = kernel.kernel(j, j) - cross.dot(pinv * cross);
      consider(j, schur > epsilon * epsilon
                      ? std::log(schur)
                      : -std::numeric_limits<Scalar>::infinity());
    }
    return best;
  }

  const Scalar log_det = std::log(det);
  Dense extended(m + 1, m + 1);
  extended.topLeftCorner(m, m) = conditioned;
  for (Index j : candidates) {
    for (Index a = 0; a < m; ++a) {
      const Scalar k = kernel.kernel(conditioning[static_cast<std::size_t>(a)], j);
      extended(a, m) = k;
      extended(m, a) = k;
    }
    extended(m, m) = kernel.kernel(j, j);
    const Scalar det_ext = Eigen::PartialPivLU<Dense>(extended).determinant();
    consider(j, det_ext > Scalar(0)
                    ? std::log(det_ext) - log_det
                    : -std::numeric_limits<Scalar>::infinity());
  }
  return best;
}

// Full greedy trace built from exhaustive steps, mirroring the engines' halt
// and quality-padding semantics. Conditioning is the whole selected set, or
// the last window-1 selected items for the windowed variant.
template <typename Scalar>
RerankReport<Scalar> dpp_exhaustive_trace(const DppKernel<Scalar>& kernel,
                                          const RerankConfig<Scalar>& config,
                                          bool windowed) {
  const Index n = kernel.size();
  const Index target = config.sequence_length;
  if (target < 1) throw ConfigError("sequence length must be positive");
  if (target > n)
    throw ConfigError("sequence length " + std::to_string(target) +
                      " exceeds pool size " + std::to_string(n));
  if (windowed && config.window < 2)
    throw ConfigError("windowed inference requires window >= 2");
  const Scalar eps = config.epsilon;
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

  const auto started = std::chrono::steady_clock::now();
  std::vector<Index> selected;
  BoolArray chosen = BoolArray::Constant(n, false);
  RerankReport<Scalar> report;
  Scalar log_volume = 0;

  while (static_cast<Index>(report.per_step.size()) < target) {
    std::vector<Index> conditioning;
    if (windowed) {
      const Index window_size =
          std::min<Index>(static_cast<Index>(selected.size()), config.window - 1);
      conditioning.assign(selected.end() - window_size, selected.end());
    } else {
      conditioning = selected;
    }
    std::vector<Index> candidates;
    for (Index j = 0; j < n; ++j)
      if (!chosen[j]) candidates.push_back(j);

    const StepChoice<Scalar> choice =
        dpp_exhaustive_step(kernel, conditioning, candidates, eps);
    const Scalar schur = std::exp(choice.log_gain);
    if (schur < eps * eps) {
      for (Index j : ssd::detail::quality_padding_order(kernel, chosen)) {
        if (static_cast<Index>(report.per_step.size()) >= target) break;
        chosen[j] = true;
        report.per_step.push_back(
            ssd::detail::dpp_step_record(kernel, j, Scalar(0), neg_inf, eps));
      }
      break;
    }
    chosen[choice.index] = true;
    selected.push_back(choice.index);
    log_volume += Scalar(0.5) * choice.log_gain;
    report.per_step.push_back(
        ssd::detail::dpp_step_record(kernel, choice.index, schur, log_volume, eps));
  }

  ssd::detail::finish_report(report, started);
  return report;
}

}  // namespace ssd::oracle
