#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "ssd/types.hpp"

namespace ssd {

// Paired circular queues over the last `capacity` selected items: the
// orthogonalized basis row frozen at selection time, and the projection
// coefficients that were subtracted from every candidate against that basis.
// Slot k of both queues always refers to the same selected item, so a revert
// can add back exactly what the matching one-step MGS removed.
template <typename Scalar>
class ProjectionWindow {
 public:
  ProjectionWindow() = default;
  ProjectionWindow(Index capacity, Index pool_size, Index dim)
      : bases_(capacity, dim),
        projections_(capacity, pool_size),
        items_(static_cast<std::size_t>(capacity), -1) {}

  Index capacity() const { return bases_.rows(); }
  Index size() const { return size_; }
  bool full() const { return size_ == capacity(); }
  bool empty() const { return size_ == 0; }

  // Physical slot of the k-th oldest entry (k = 0 is the head).
  Index slot(Index k) const { return (head_ + k) % capacity(); }
  Index item(Index k) const { return items_[static_cast<std::size_t>(slot(k))]; }

  auto basis(Index k) const { return bases_.row(slot(k)); }
  auto projection(Index k) const { return projections_.row(slot(k)); }

  Index head_item() const { return item(0); }
  auto head_basis() const { return bases_.row(head_); }
  auto head_projection() const { return projections_.row(head_); }

  template <typename Derived>
  Index push(Index item, const Eigen::MatrixBase<Derived>& basis_row) {
    const Index s = slot(size_);
    items_[static_cast<std::size_t>(s)] = item;
    bases_.row(s) = basis_row;
    ++size_;
    return s;
  }

  template <typename Derived>
  void set_projection(Index slot_index, const Eigen::MatrixBase<Derived>& coefficients) {
    projections_.row(slot_index) = coefficients.transpose();
  }

  void pop_head() {
    head_ = (head_ + 1) % capacity();
    --size_;
  }

  const RowMatrix<Scalar>& bases() const { return bases_; }
  const RowMatrix<Scalar>& projections() const { return projections_; }

  std::size_t working_bytes() const {
    return sizeof(Scalar) * static_cast<std::size_t>(bases_.size() + projections_.size()) +
           sizeof(Index) * items_.size();
  }

 private:
  RowMatrix<Scalar> bases_;        // capacity x d
  RowMatrix<Scalar> projections_;  // capacity x N
  std::vector<Index> items_;
  Index head_ = 0;
  Index size_ = 0;
};

// Greedy-inference working state. `residuals` is the engine's own copy of
// the pool embeddings: the no-window engine accumulates one-step MGS updates
// in its rows, while the windowed engines keep the rows pristine and carry
// the orthogonalization in the queues plus a squared-norm accumulator (see
// the note at ssd_window). The running volume gamma * prod(residual norms)
// is kept in log space because a product of many norms underflows double
// precision.
template <typename Scalar>
struct SelectionState {
  std::vector<Index> selected;
  RowMatrix<Scalar> residuals;
  Scalar log_volume = 0;
  ProjectionWindow<Scalar> window;
  BoolArray chosen_mask;

  Scalar volume() const { return std::exp(log_volume); }
};

// One-step modified Gram-Schmidt: removes every unselected row's projection
// on `basis` and returns the dense coefficient vector (zero at selected
// slots). A basis with squared norm below epsilon^2 is degenerate: all
// coefficients are 0 and no row is touched. The update runs as one matrix *
// vector product plus one rank-1 update; selected rows carry a zero
// coefficient, so the rank-1 update leaves them bit-identical.
template <typename Scalar, typename BasisDerived>
DenseVector<Scalar> mgs_step(RowMatrix<Scalar>& residuals,
                             const Eigen::MatrixBase<BasisDerived>& basis,
                             const BoolArray& chosen, Scalar epsilon) {
  const Index n = residuals.rows();
  const Scalar denom = basis.squaredNorm();
  if (denom < epsilon * epsilon) return DenseVector<Scalar>::Zero(n);
  DenseVector<Scalar> coefficients(n);
  coefficients.noalias() = residuals * basis.transpose();
  coefficients /= denom;
  for (Index j = 0; j < n; ++j)
    if (chosen[j]) coefficients[j] = Scalar(0);
  residuals.noalias() -= coefficients * basis;
  return coefficients;
}

// Adds back a previously subtracted projection for every unselected row.
// Inverse of mgs_step for rows that are still unselected; stored
// coefficients of rows selected since then are masked out.
template <typename Scalar, typename BasisDerived, typename CoeffDerived>
void revert_step(RowMatrix<Scalar>& residuals,
                 const Eigen::MatrixBase<BasisDerived>& basis,
                 const Eigen::MatrixBase<CoeffDerived>& coefficients,
                 const BoolArray& chosen) {
  const Index n = residuals.rows();
  DenseVector<Scalar> masked(n);
  for (Index j = 0; j < n; ++j)
    masked[j] = chosen[j] ? Scalar(0) : coefficients[j];
  residuals.noalias() += masked * basis;
}

namespace detail {

template <typename Scalar>
inline Scalar log_or_neg_infinity(Scalar value, Scalar epsilon) {
  if (value < epsilon) return -std::numeric_limits<Scalar>::infinity();
  return std::log(value);
}

template <typename Scalar>
void validate_greedy_config(const PreparedPool<Scalar>& pool,
                            const RerankConfig<Scalar>& config, bool windowed) {
  if (config.sequence_length < 1)
    throw ConfigError("sequence length must be positive");
  if (config.sequence_length > pool.size())
    throw ConfigError("sequence length " + std::to_string(config.sequence_length) +
                      " exceeds pool size " + std::to_string(pool.size()));
  if (config.gamma < Scalar(0)) throw ConfigError("gamma must be non-negative");
  if (config.epsilon < Scalar(0)) throw ConfigError("epsilon must be non-negative");
  if (windowed && config.window < 2)
    throw ConfigError("windowed inference requires window >= 2");
}

template <typename Scalar>
struct GreedyLoop {
  const PreparedPool<Scalar>& pool;
  const RerankConfig<Scalar>& config;
  SelectionState<Scalar>& state;
  RerankReport<Scalar>& report;

  void select(Index j, Scalar residual_norm) {
    state.chosen_mask[j] = true;
    state.selected.push_back(j);
    state.log_volume += log_or_neg_infinity(residual_norm, config.epsilon);
    StepRecord<Scalar> record;
    record.chosen_index = j;
    record.chosen_id = pool.ids[static_cast<std::size_t>(j)];
    record.quality_term = pool.qualities[j];
    record.diversity_term =
        residual_norm < config.epsilon ? Scalar(0) : residual_norm;
    record.log_volume = state.log_volume;
    report.per_step.push_back(std::move(record));
  }

  void select_first() {
    const Index n = pool.size();
    Index first = 0;
    for (Index j = 1; j < n; ++j)
      if (pool.qualities[j] > pool.qualities[first]) first = j;
    state.log_volume = std::log(config.gamma);  // log(0) = -inf when gamma == 0
    select(first, state.residuals.row(first).norm());
  }

  // Argmax of quality + diversity over unselected candidates, given squared
  // residual norms. Lowest index wins ties.
  Index select_best(const DenseVector<Scalar>& squared_norms, bool volume_weighted) {
    norm_scratch = squared_norms.cwiseMax(Scalar(0)).cwiseSqrt();
    const Scalar volume =
        volume_weighted ? std::exp(state.log_volume) : Scalar(0);
    Index best = -1;
    Scalar best_score = 0;
    Scalar best_norm = 0;
    for (Index j = 0; j < pool.size(); ++j) {
      if (state.chosen_mask[j]) continue;
      const Scalar norm = norm_scratch[j];
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
    return best;
  }

  DenseVector<Scalar> norm_scratch{};

  void finish(std::chrono::steady_clock::time_point started,
              std::size_t extra_bytes) {
    report.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - started);
    report.sequence.reserve(report.per_step.size());
    for (const auto& record : report.per_step)
      report.sequence.push_back(record.chosen_id);
    report.peak_working_bytes =
        sizeof(Scalar) * static_cast<std::size_t>(state.residuals.size()) +
        state.window.working_bytes() +
        sizeof(bool) * static_cast<std::size_t>(state.chosen_mask.size()) +
        sizeof(Index) * state.selected.capacity() + extra_bytes;
  }
};

// Algorithm-1 style loop: every step applies one-step MGS against the last
// chosen item's residual row and maximizes
//   quality + ||residual|| * gamma * prod(selected residual norms).
// Squared norms are maintained incrementally: subtracting an orthogonal
// projection p*b lowers a squared norm by exactly p^2 * ||b||^2.
template <typename Scalar>
RerankReport<Scalar> ssd_greedy_no_window(const PreparedPool<Scalar>& pool,
                                          const RerankConfig<Scalar>& config,
                                          SelectionState<Scalar>* state_out) {
  validate_greedy_config(pool, config, false);
  const auto started = std::chrono::steady_clock::now();
  const Index n = pool.size();
  const Index target = config.sequence_length;

  SelectionState<Scalar> state;
  state.residuals = pool.embeddings;
  state.chosen_mask = BoolArray::Constant(n, false);
  state.selected.reserve(static_cast<std::size_t>(target));

  RerankReport<Scalar> report;
  report.per_step.reserve(static_cast<std::size_t>(target));
  GreedyLoop<Scalar> loop{pool, config, state, report};
  loop.select_first();

  DenseVector<Scalar> squared_norms = state.residuals.rowwise().squaredNorm();
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> basis(pool.dim());
  while (static_cast<Index>(state.selected.size()) < target) {
    basis = state.residuals.row(state.selected.back());
    const DenseVector<Scalar> coefficients =
        mgs_step(state.residuals, basis, state.chosen_mask, config.epsilon);
    squared_norms -= coefficients.cwiseAbs2() * basis.squaredNorm();
    loop.select_best(squared_norms, true);
  }

  loop.finish(started, sizeof(Scalar) * static_cast<std::size_t>(
                           squared_norms.size() + basis.size()));
  if (state_out) *state_out = std::move(state);
  return report;
}

// Algorithm-2 style loop, one matrix pass per step. Window bases are
// pairwise orthogonal, so a candidate's projection on the newest basis
// equals the projection of its original embedding, and its windowed residual
// norm is
//   ||v||^2 - sum over window of p_k^2 ||b_k||^2.
// The engine therefore keeps the embedding rows pristine and carries the
// orthogonalization entirely in the queues: the newest basis is rebuilt from
// the chosen item's stored coefficients (one O(w d) sweep), projections of
// all candidates come from a single matrix * vector product against the
// original rows, and the head's revert adds its stored p_head^2 ||b_head||^2
// back onto the squared norms. Selection trajectories are the same as the
// literal row-updating form in exact arithmetic (the acceptance suite pins
// this against from-scratch oracles), at a third of the per-step memory
// traffic.
template <typename Scalar>
RerankReport<Scalar> ssd_greedy_windowed(const PreparedPool<Scalar>& pool,
                                         const RerankConfig<Scalar>& config,
                                         bool volume_weighted,
                                         SelectionState<Scalar>* state_out) {
  validate_greedy_config(pool, config, true);
  const auto started = std::chrono::steady_clock::now();
  const Index n = pool.size();
  const Index dim = pool.dim();
  const Index target = config.sequence_length;
  const Scalar eps_sq = config.epsilon * config.epsilon;

  SelectionState<Scalar> state;
  state.residuals = pool.embeddings;
  state.chosen_mask = BoolArray::Constant(n, false);
  state.selected.reserve(static_cast<std::size_t>(target));
  state.window =
      ProjectionWindow<Scalar>(std::min(config.window, target), n, dim);

  RerankReport<Scalar> report;
  report.per_step.reserve(static_cast<std::size_t>(target));
  GreedyLoop<Scalar> loop{pool, config, state, report};
  loop.select_first();

  DenseVector<Scalar> squared_norms = state.residuals.rowwise().squaredNorm();
  DenseVector<Scalar> coefficients(n);
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> basis(dim);
  while (static_cast<Index>(state.selected.size()) < target) {
    const Index last = state.selected.back();

    // Rebuild the newest basis: the chosen item's original embedding minus
    // its stored projections on the current window (head included; it is
    // popped only after, exactly as the one-step-MGS recursion freezes it).
    basis = state.residuals.row(last);
    for (Index k = 0; k < state.window.size(); ++k)
      basis -= state.window.projection(k)[last] * state.window.basis(k);

    if (state.window.full()) {
      // Revert: the head's contribution returns to every unselected
      // candidate's squared norm.
      const auto head_projection = state.window.head_projection();
      const Scalar head_sq = state.window.head_basis().squaredNorm();
      for (Index j = 0; j < n; ++j)
        if (!state.chosen_mask[j])
          squared_norms[j] += head_projection[j] * head_projection[j] * head_sq;
      state.window.pop_head();
    }

    const Index slot = state.window.push(last, basis);
    const Scalar denom = basis.squaredNorm();
    if (denom < eps_sq) {
      coefficients.setZero();
    } else {
      coefficients.noalias() = state.residuals * basis.transpose();
      coefficients /= denom;
      for (Index j = 0; j < n; ++j)
        if (state.chosen_mask[j]) coefficients[j] = Scalar(0);
      squared_norms -= coefficients.cwiseAbs2() * denom;
    }
    state.window.set_projection(slot, coefficients);

    loop.select_best(squared_norms, volume_weighted);
  }

  loop.finish(started, sizeof(Scalar) * static_cast<std::size_t>(
                           squared_norms.size() + coefficients.size() +
                           basis.size()));
  if (state_out) *state_out = std::move(state);
  return report;
}

}  // namespace detail

// Greedy inference without a sliding window: every selected item stays in
// the orthogonalization, one-step MGS per step. O(N T d) time, no N x N
// allocation.
template <typename Scalar>
RerankReport<Scalar> ssd_no_window(const PreparedPool<Scalar>& pool,
                                   const RerankConfig<Scalar>& config,
                                   SelectionState<Scalar>* state_out = nullptr) {
  if (config.algorithm != Algorithm::SsdNoWindow)
    throw ConfigError("config.algorithm does not select ssd-nowindow");
  return detail::ssd_greedy_no_window(pool, config, state_out);
}

// Sliding-window greedy inference with projection revert. Candidates are
// orthogonalized against the most recent `window` selected items only, while
// the running volume keeps every selected item's residual norm. O(N T d)
// time, extra O(w N) space.
template <typename Scalar>
RerankReport<Scalar> ssd_window(const PreparedPool<Scalar>& pool,
                                const RerankConfig<Scalar>& config,
                                SelectionState<Scalar>* state_out = nullptr) {
  if (config.algorithm != Algorithm::SsdWindow)
    throw ConfigError("config.algorithm does not select ssd-window");
  return detail::ssd_greedy_windowed(pool, config, true, state_out);
}

// Stabilized variant: same windowed mechanics, but the per-step score drops
// the cumulative volume multiplier (quality + gamma * ||residual||). The
// volume is still tracked for diagnostics.
template <typename Scalar>
RerankReport<Scalar> ssd_star(const PreparedPool<Scalar>& pool,
                              const RerankConfig<Scalar>& config,
                              SelectionState<Scalar>* state_out = nullptr) {
  if (config.algorithm != Algorithm::SsdStar)
    throw ConfigError("config.algorithm does not select ssd-star");
  return detail::ssd_greedy_windowed(pool, config, false, state_out);
}

}  // namespace ssd
