#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "ssd/errors.hpp"

namespace ssd {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using DenseVector = Eigen::Vector<Scalar, Eigen::Dynamic>;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Greedy re-ranking variants selectable per request.
enum class Algorithm {
  SsdNoWindow,
  SsdWindow,
  SsdStar,
  DppNoWindow,
  DppWindow,
};

inline const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::SsdNoWindow: return "ssd-nowindow";
    case Algorithm::SsdWindow: return "ssd-window";
    case Algorithm::SsdStar: return "ssd-star";
    case Algorithm::DppNoWindow: return "dpp-nowindow";
    case Algorithm::DppWindow: return "dpp-window";
  }
  return "unknown";
}

inline Algorithm algorithm_from_string(const std::string& name) {
  if (name == "ssd-nowindow") return Algorithm::SsdNoWindow;
  if (name == "ssd-window") return Algorithm::SsdWindow;
  if (name == "ssd-star") return Algorithm::SsdStar;
  if (name == "dpp-nowindow") return Algorithm::DppNoWindow;
  if (name == "dpp-window") return Algorithm::DppWindow;
  throw ConfigError("unknown algorithm \"" + name +
                    "\" (expected ssd-nowindow, ssd-window, ssd-star, "
                    "dpp-nowindow or dpp-window)");
}

inline bool uses_window(Algorithm algorithm) {
  return algorithm == Algorithm::SsdWindow || algorithm == Algorithm::SsdStar ||
         algorithm == Algorithm::DppWindow;
}

// One scored candidate as delivered by the upstream ranking stage.
template <typename Scalar>
struct ItemCandidate {
  std::string id;
  Scalar quality = 0;
  DenseVector<Scalar> raw_embedding;
  std::optional<std::string> taxonomy;
  bool blocked = false;
};

template <typename Scalar>
struct RawPool {
  std::vector<ItemCandidate<Scalar>> items;
};

// Request-scoped working set: unit-normalized embeddings with an appended
// constant coordinate, standardized qualities, blocked items removed.
// Candidates are addressed by dense row index; ids live in the side table.
template <typename Scalar>
struct PreparedPool {
  std::vector<std::string> ids;
  std::vector<std::optional<std::string>> taxonomies;
  RowMatrix<Scalar> embeddings;   // N x d, d = raw dimension + 1
  DenseVector<Scalar> qualities;  // mean 0, stddev 1 (or all zero)

  Index size() const { return embeddings.rows(); }
  Index dim() const { return embeddings.cols(); }
};

template <typename Scalar>
struct RerankConfig {
  Index sequence_length = 0;           // T
  Index window = 10;                   // w, ignored by no-window variants
  Scalar gamma = Scalar(1);            // quality/diversity trade-off
  Algorithm algorithm = Algorithm::SsdWindow;
  Scalar epsilon = Scalar(1e-12);      // degenerate-direction and halt tolerance
};

template <typename Scalar>
struct StepRecord {
  Index chosen_index = -1;
  std::string chosen_id;
  Scalar quality_term = 0;    // standardized quality of the chosen item
  Scalar diversity_term = 0;  // residual norm at selection, 0 when below epsilon
  Scalar log_volume = 0;      // running log of gamma * prod of residual norms
};

template <typename Scalar>
struct RerankReport {
  std::vector<std::string> sequence;
  std::vector<StepRecord<Scalar>> per_step;
  std::chrono::nanoseconds elapsed{0};
  std::size_t peak_working_bytes = 0;
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the PreparedPool invariants: consistent shapes, unique ids, every
// row of the form [unit direction, 1], and standardized (or degenerate
// all-zero) qualities.
template <typename Scalar>
ValidationResult validate_pool(const PreparedPool<Scalar>& pool,
                               Scalar tolerance = Scalar(1e-9)) {
  ValidationResult result;
  const Index n = pool.embeddings.rows();
  const Index d = pool.embeddings.cols();

  if (n == 0) result.violations.push_back("pool is empty");
  if (static_cast<Index>(pool.ids.size()) != n)
    result.violations.push_back("id table size does not match embedding rows");
  if (pool.qualities.size() != n)
    result.violations.push_back("quality vector size does not match embedding rows");
  if (!pool.taxonomies.empty() && static_cast<Index>(pool.taxonomies.size()) != n)
    result.violations.push_back("taxonomy table size does not match embedding rows");
  if (n > 0 && d < 2)
    result.violations.push_back("embedding dimension must be at least 2");

  std::unordered_set<std::string> seen;
  for (const auto& id : pool.ids) {
    if (!seen.insert(id).second)
      result.violations.push_back("duplicate id \"" + id + "\"");
  }

  if (d >= 2) {
    for (Index row = 0; row < n; ++row) {
      const Scalar appended = pool.embeddings(row, d - 1);
      if (std::abs(appended - Scalar(1)) > tolerance)
        result.violations.push_back("row " + std::to_string(row) +
                                    ": appended coordinate is not 1");
      const Scalar head_sq = pool.embeddings.row(row).head(d - 1).squaredNorm();
      if (std::abs(head_sq - Scalar(1)) > tolerance)
        result.violations.push_back("row " + std::to_string(row) +
                                    ": raw direction is not unit norm");
    }
  }

  if (pool.qualities.size() == n && n > 0) {
    const Scalar mean = pool.qualities.mean();
    const Scalar sq = (pool.qualities.array() - mean).matrix().squaredNorm();
    const Scalar stddev = std::sqrt(sq / Scalar(n));
    const bool all_zero = pool.qualities.template lpNorm<Eigen::Infinity>() <= tolerance;
    if (!all_zero) {
      if (std::abs(mean) > tolerance)
        result.violations.push_back("qualities are not mean-centered");
      if (std::abs(stddev - Scalar(1)) > tolerance)
        result.violations.push_back("qualities are neither unit-stddev nor all zero");
    }
  }

  return result;
}

}  // namespace ssd
