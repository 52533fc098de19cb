#pragma once

#include <cstdint>
#include <cstdio>
#include <random>

#include "ssd/preprocess.hpp"
#include "ssd/types.hpp"

namespace ssd {

// Seeded pool of isotropic Gaussian raw embeddings with Gaussian qualities.
// All randomness flows from the seed; same seed, same pool.
template <typename Scalar>
RawPool<Scalar> synthetic_raw_pool(Index n, Index raw_dim, std::uint64_t seed) {
  if (n < 1) throw ConfigError("synthetic pool needs at least one item");
  if (raw_dim < 1) throw ConfigError("synthetic pool needs raw dimension >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RawPool<Scalar> pool;
  pool.items.reserve(static_cast<std::size_t>(n));
  char name[32];
  for (Index i = 0; i < n; ++i) {
    ItemCandidate<Scalar> item;
    std::snprintf(name, sizeof(name), "item-%06lld", static_cast<long long>(i));
    item.id = name;
    item.quality = Scalar(gauss(rng));
    item.raw_embedding.resize(raw_dim);
    for (Index k = 0; k < raw_dim; ++k) item.raw_embedding[k] = Scalar(gauss(rng));
    pool.items.push_back(std::move(item));
  }
  return pool;
}

// Prepared synthetic pool; `dim` is the prepared dimension (raw + 1).
template <typename Scalar>
PreparedPool<Scalar> synthetic_pool(Index n, Index dim, std::uint64_t seed) {
  if (dim < 2) throw ConfigError("prepared dimension must be at least 2");
  return prepare(synthetic_raw_pool<Scalar>(n, dim - 1, seed));
}

}  // namespace ssd
