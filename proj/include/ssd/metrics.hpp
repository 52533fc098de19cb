#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ssd/types.hpp"

namespace ssd {

// One user's session: every item shown (with its raw embedding), the subset
// clicked, and the taxonomy label per item id. Clicked ids must be a subset
// of the impressed ids.
template <typename Scalar>
struct SessionLog {
  std::string user;
  std::vector<std::string> impressed_ids;
  RowMatrix<Scalar> impressed_embeddings;  // raw embeddings, one row per impressed id
  std::vector<std::string> clicked_ids;
  std::unordered_map<std::string, std::string> taxonomy;
};

// Clicked ids must be a subset of the impressed ids, and the embedding rows
// must line up with the impressed ids.
template <typename Scalar>
bool session_is_consistent(const SessionLog<Scalar>& session) {
  if (session.impressed_embeddings.rows() !=
      static_cast<Index>(session.impressed_ids.size()))
    return false;
  const std::unordered_set<std::string> impressed(session.impressed_ids.begin(),
                                                  session.impressed_ids.end());
  for (const auto& id : session.clicked_ids)
    if (impressed.find(id) == impressed.end()) return false;
  return true;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar raw_cosine(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  return a.dot(b.derived()) / denom;
}

// Intra-list average distance: mean over users of the mean pairwise
// dissimilarity 1 - S(i, j) over distinct impressed pairs. Sessions with
// fewer than two impressions are excluded; if that excludes everything the
// metric is undefined.
template <typename Scalar, typename Similarity>
Scalar ilad(const std::vector<SessionLog<Scalar>>& sessions, Similarity&& similarity) {
  Scalar total = 0;
  Index counted = 0;
  for (const auto& session : sessions) {
    const Index n = session.impressed_embeddings.rows();
    if (n < 2) continue;
    Scalar pair_sum = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        pair_sum += Scalar(1) - similarity(session.impressed_embeddings.row(i),
                                           session.impressed_embeddings.row(j));
    total += pair_sum / (Scalar(n) * Scalar(n - 1) / Scalar(2));
    ++counted;
  }
  if (counted == 0)
    throw InputError("ILAD undefined: no session has two or more impressions");
  return total / Scalar(counted);
}

template <typename Scalar>
Scalar ilad(const std::vector<SessionLog<Scalar>>& sessions) {
  return ilad(sessions, [](const auto& a, const auto& b) { return raw_cosine(a, b); });
}

// Mean read taxonomies: mean over users of the number of distinct taxonomy
// labels among clicked items. Users with no clicks (or only unlabeled
// clicks) contribute 0.
template <typename Scalar>
Scalar mrt(const std::vector<SessionLog<Scalar>>& sessions) {
  if (sessions.empty()) return Scalar(0);
  Scalar total = 0;
  for (const auto& session : sessions) {
    std::unordered_set<std::string> labels;
    for (const auto& id : session.clicked_ids) {
      const auto found = session.taxonomy.find(id);
      if (found != session.taxonomy.end()) labels.insert(found->second);
    }
    total += Scalar(labels.size());
  }
  return total / Scalar(sessions.size());
}

}  // namespace ssd
