#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssd/types.hpp"

namespace ssd {

// One timing shape; `d` is the prepared embedding dimension.
struct BenchShape {
  Algorithm algorithm = Algorithm::SsdWindow;
  Index n = 0;
  Index t = 0;
  Index w = 0;
  Index d = 0;
};

struct BenchRecord {
  std::string algorithm;
  Index n = 0;
  Index t = 0;
  Index w = 0;
  Index d = 0;
  std::int64_t median_ns = 0;  // median over repetitions
  std::size_t working_bytes = 0;
  int repetitions = 0;
  int slope_group = 0;               // shapes sharing (algorithm, t, w, d)
  std::uint64_t sequence_digest = 0; // FNV-1a over the chosen index sequence
};

struct SlopeFit {
  int slope_group = 0;
  std::string algorithm;
  Index t = 0;
  Index w = 0;
  Index d = 0;
  double slope = 0;  // least-squares slope of log(time) vs log(N)
  int points = 0;
};

struct ScalingStudy {
  std::vector<BenchRecord> records;
  std::vector<SlopeFit> slopes;
};

// Times each shape on a seeded synthetic pool (warmup plus `repetitions`
// timed runs, median reported) and fits a log-log slope per slope group.
// Chosen sequences must be identical across repetitions; a mismatch aborts.
// DPP shapes time the whole pipeline, kernel build included.
ScalingStudy run_scaling_study(const std::vector<BenchShape>& shapes,
                               std::uint64_t seed, int repetitions = 9);

// Tabular report: algorithm,N,T,w,d,median_ns,bytes,slope_group
void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out);

std::string bench_summary(const ScalingStudy& study);

}  // namespace ssd
