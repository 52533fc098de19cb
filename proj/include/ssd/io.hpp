#pragma once

#include <iosfwd>
#include <string>

#include "ssd/types.hpp"

namespace ssd {

// Candidate files are newline-delimited JSON, one object per line:
//   {"id": "a", "quality": 0.7, "embedding": [..], "taxonomy": "food",
//    "blocked": false}
// taxonomy and blocked are optional (blocked defaults to false). All lines
// must share the embedding length. Errors name the offending 1-based line.
RawPool<double> load_candidates(const std::string& path);

void save_candidates(const RawPool<double>& pool, const std::string& path);

// Newline-delimited chosen ids.
void write_sequence(const RerankReport<double>& report, std::ostream& out);

// Per-step diagnostics: step,chosen_id,quality_term,diversity_term,log_volume
void write_step_report_csv(const RerankReport<double>& report, std::ostream& out);

// Shortest round-trip decimal formatting ("%.17g") so identical inputs give
// byte-identical reports.
std::string format_double(double value);

}  // namespace ssd
