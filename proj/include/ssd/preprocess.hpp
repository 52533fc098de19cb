#pragma once

#include <cmath>
#include <unordered_set>

#include "ssd/types.hpp"

namespace ssd {

// [v/||v||, 1]: unit-normalizes the raw direction and appends a constant
// coordinate. Every prepared row then has squared norm 2, and the inner
// product of two prepared rows equals cos(raw_i, raw_j) + 1.
template <typename Derived>
DenseVector<typename Derived::Scalar> prepare_embedding(
    const Eigen::MatrixBase<Derived>& raw,
    typename Derived::Scalar epsilon = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = raw.norm();
  if (!(norm > epsilon))
    throw InputError("degenerate embedding: L2 norm below tolerance");
  DenseVector<Scalar> out(raw.size() + 1);
  out.head(raw.size()) = raw.derived() / norm;
  out[raw.size()] = Scalar(1);
  return out;
}

// Shifts to mean 0 and scales to population (divide-by-N) stddev 1. A
// near-constant input degenerates to the all-zero vector.
template <typename Derived>
DenseVector<typename Derived::Scalar> standardize_qualities(
    const Eigen::MatrixBase<Derived>& qualities,
    typename Derived::Scalar epsilon = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  const Index n = qualities.size();
  if (n == 0) throw InputError("cannot standardize an empty quality vector");
  const Scalar mean = qualities.mean();
  DenseVector<Scalar> centered = qualities.derived().array() - mean;
  const Scalar stddev = std::sqrt(centered.squaredNorm() / Scalar(n));
  if (stddev < epsilon) return DenseVector<Scalar>::Zero(n);
  return centered / stddev;
}

// Drops blocked items up front, before any scoring, so they never enter the
// candidate set. Order is preserved.
template <typename Scalar>
RawPool<Scalar> filter_constraints(const RawPool<Scalar>& pool) {
  RawPool<Scalar> out;
  out.items.reserve(pool.items.size());
  for (const auto& item : pool.items)
    if (!item.blocked) out.items.push_back(item);
  if (out.items.empty())
    throw InputError("over-constrained request: every candidate is blocked");
  return out;
}

// filter -> per-item embedding transform -> quality standardization over the
// surviving items.
template <typename Scalar>
PreparedPool<Scalar> prepare(const RawPool<Scalar>& pool,
                             Scalar epsilon = Scalar(1e-12)) {
  if (pool.items.empty()) throw InputError("empty candidate pool");
  const RawPool<Scalar> filtered = filter_constraints(pool);

  const Index n = static_cast<Index>(filtered.items.size());
  const Index raw_dim = filtered.items.front().raw_embedding.size();
  if (raw_dim < 1) throw InputError("embeddings must have at least one dimension");

  PreparedPool<Scalar> prepared;
  prepared.ids.reserve(n);
  prepared.taxonomies.reserve(n);
  prepared.embeddings.resize(n, raw_dim + 1);
  prepared.qualities.resize(n);

  std::unordered_set<std::string> seen;
  for (Index row = 0; row < n; ++row) {
    const auto& item = filtered.items[static_cast<std::size_t>(row)];
    if (item.raw_embedding.size() != raw_dim)
      throw InputError("inconsistent embedding dimension for id \"" + item.id + "\"");
    if (!seen.insert(item.id).second)
      throw InputError("duplicate id \"" + item.id + "\"");
    if (!(item.raw_embedding.norm() > epsilon))
      throw InputError("degenerate embedding for id \"" + item.id + "\"");
    prepared.embeddings.row(row) = prepare_embedding(item.raw_embedding, epsilon).transpose();
    prepared.qualities[row] = item.quality;
    prepared.ids.push_back(item.id);
    prepared.taxonomies.push_back(item.taxonomy);
  }

  prepared.qualities = standardize_qualities(prepared.qualities, epsilon);
  return prepared;
}

}  // namespace ssd
