// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Run through ctest or directly; the first argument is the path to
// the ssd_rerank binary (used by the determinism criterion).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssd/bench.hpp"
#include "ssd/io.hpp"
#include "ssd/metrics.hpp"
#include "ssd/oracle.hpp"
#include "ssd/preprocess.hpp"
#include "ssd/rerank.hpp"
#include "ssd/ssd_engine.hpp"
#include "ssd/synthetic.hpp"

namespace {

using ssd::Algorithm;
using ssd::Index;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

ssd::RerankConfig<double> make_config(Algorithm algorithm, Index length,
                                      Index window, double gamma,
                                      double epsilon = 1e-12) {
  ssd::RerankConfig<double> config;
  config.algorithm = algorithm;
  config.sequence_length = length;
  config.window = window;
  config.gamma = gamma;
  config.epsilon = epsilon;
  return config;
}

// Criterion 1: squared product of no-window residual norms equals
// det(X_t X_t^T) for 200 random prefixes, relative 1e-8, in under 10 s.
Outcome criterion_volume_identity() {
  const auto start = Clock::now();
  int prefixes = 0;
  double worst = 0.0;
  const auto run_instances = [&](Index dim, Index length, int instances,
                                 std::uint64_t seed_base) {
    for (int i = 0; i < instances; ++i) {
      const auto pool = ssd::synthetic_pool<double>(30, dim, seed_base + i);
      const auto report = ssd::ssd_no_window(
          pool, make_config(Algorithm::SsdNoWindow, length, 10, 1.0));
      double product = 1.0;
      for (Index t = 1; t <= length; ++t) {
        product *= report.per_step[static_cast<std::size_t>(t - 1)].diversity_term;
        ssd::RowMatrix<double> prefix(t, pool.dim());
        for (Index s = 0; s < t; ++s)
          prefix.row(s) = pool.embeddings.row(
              report.per_step[static_cast<std::size_t>(s)].chosen_index);
        const double volume = ssd::oracle::gram_det_volume(prefix);
        const double det = volume * volume;
        const double rel = std::abs(product * product - det) /
                           std::max({det, product * product, 1e-300});
        worst = std::max(worst, rel);
        ++prefixes;
      }
    }
  };
  run_instances(8, 8, 15, 1000);   // 120 prefixes, d=8
  run_instances(64, 16, 5, 2000);  // 80 prefixes, d=64
  const double elapsed = seconds_since(start);
  const bool pass = prefixes == 200 && worst <= 1e-8 && elapsed < 10.0;
  return {pass, fmt("%d prefixes, max rel err %.2e, %.2fs", prefixes, worst, elapsed)};
}

// Criterion 2: ssd_window and ssd_star chosen-id sequences equal the naive
// from-scratch oracles exactly over 100 seeded instances, in under 60 s.
Outcome criterion_window_exactness() {
  const auto start = Clock::now();
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto pool = ssd::synthetic_pool<double>(100, 16, seed);
    const auto window_config = make_config(Algorithm::SsdWindow, 30, 5, 0.5);
    if (ssd::ssd_window(pool, window_config).sequence !=
        ssd::oracle::naive_ssd_window(pool, window_config).sequence)
      ++mismatches;
    const auto star_config = make_config(Algorithm::SsdStar, 30, 5, 0.5);
    if (ssd::ssd_star(pool, star_config).sequence !=
        ssd::oracle::naive_ssd_star(pool, star_config).sequence)
      ++mismatches;
  }
  const double elapsed = seconds_since(start);
  const bool pass = mismatches == 0 && elapsed < 60.0;
  return {pass, fmt("100 instances x 2 variants, %d mismatches, %.2fs",
                    mismatches, elapsed)};
}

// Criterion 3: dpp_greedy and dpp_greedy_window match the exhaustive log-det
// traces exactly over 50 seeded instances.
Outcome criterion_dpp_exactness() {
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto pool = ssd::synthetic_pool<double>(12, 8, 3000 + seed);
    const auto kernel = ssd::build_kernel(pool, 1.0);
    const auto plain_config = make_config(Algorithm::DppNoWindow, 6, 4, 1.0);
    if (ssd::dpp_greedy(kernel, plain_config).sequence !=
        ssd::oracle::dpp_exhaustive_trace(kernel, plain_config, false).sequence)
      ++mismatches;
    const auto window_config = make_config(Algorithm::DppWindow, 6, 4, 1.0);
    if (ssd::dpp_greedy_window(kernel, window_config).sequence !=
        ssd::oracle::dpp_exhaustive_trace(kernel, window_config, true).sequence)
      ++mismatches;
  }
  return {mismatches == 0, fmt("50 instances x 2 variants, %d mismatches", mismatches)};
}

struct StudyOutcomes {
  Outcome separation;
  Outcome window_independence;
};

// Criteria 4 and 5 share one scaling study.
StudyOutcomes criteria_scaling() {
  const Index t = 80, w = 10, d = 65;
  std::vector<ssd::BenchShape> shapes;
  for (const Index n : {500, 1000, 2000, 4000, 8000})
    shapes.push_back({Algorithm::SsdWindow, n, t, w, d});
  for (const Index n : {500, 1000, 2000, 4000, 8000})
    shapes.push_back({Algorithm::DppNoWindow, n, t, w, d});
  shapes.push_back({Algorithm::SsdWindow, 600, t, w, d});
  shapes.push_back({Algorithm::DppNoWindow, 600, t, w, d});
  // extra window sizes feed the space-model regression and criterion 5
  shapes.push_back({Algorithm::SsdWindow, 4000, t, 8, d});
  shapes.push_back({Algorithm::SsdWindow, 4000, t, 20, d});
  shapes.push_back({Algorithm::SsdWindow, 2000, t, 20, d});

  const auto study = ssd::run_scaling_study(shapes, 20240809, 7);

  const auto find = [&](Algorithm algorithm, Index n, Index window) -> const ssd::BenchRecord& {
    for (const auto& record : study.records)
      if (record.algorithm == ssd::to_string(algorithm) && record.n == n &&
          record.w == window)
        return record;
    throw std::logic_error("record not found");
  };

  const auto slope_over = [&](Algorithm algorithm) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const Index n : {500, 1000, 2000, 4000, 8000}) {
      const auto& record = find(algorithm, n, w);
      const double x = std::log(double(n));
      const double y = std::log(double(record.median_ns));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++count;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
  };

  const double ssd_slope = slope_over(Algorithm::SsdWindow);
  const double dpp_slope = slope_over(Algorithm::DppNoWindow);

  // Two-feature least squares for the SSD working set: bytes ~ c1*N*d + c2*w*N.
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  std::vector<const ssd::BenchRecord*> ssd_records;
  for (const auto& record : study.records)
    if (record.algorithm == ssd::to_string(Algorithm::SsdWindow))
      ssd_records.push_back(&record);
  for (const auto* record : ssd_records) {
    const double f1 = double(record->n) * double(record->d);
    const double f2 = double(record->w) * double(record->n);
    const double y = double(record->working_bytes);
    a11 += f1 * f1; a12 += f1 * f2; a22 += f2 * f2;
    b1 += f1 * y; b2 += f2 * y;
  }
  const double det = a11 * a22 - a12 * a12;
  const double c1 = (a22 * b1 - a12 * b2) / det;
  const double c2 = (a11 * b2 - a12 * b1) / det;
  double worst_fit = 0.0;
  for (const auto* record : ssd_records) {
    const double predicted = c1 * double(record->n) * double(record->d) +
                             c2 * double(record->w) * double(record->n);
    worst_fit = std::max(worst_fit, std::abs(predicted - double(record->working_bytes)) /
                                        double(record->working_bytes));
  }

  const auto& ssd600 = find(Algorithm::SsdWindow, 600, w);
  const auto& dpp600 = find(Algorithm::DppNoWindow, 600, w);
  const bool directional = ssd600.median_ns < dpp600.median_ns &&
                           ssd600.working_bytes < dpp600.working_bytes;

  Outcome separation;
  separation.pass = ssd_slope >= 0.8 && ssd_slope <= 1.3 && dpp_slope >= 1.7 &&
                    dpp_slope <= 2.3 && worst_fit <= 0.20 && directional;
  separation.detail = fmt(
      "ssd slope %.2f in [0.8,1.3], dpp slope %.2f in [1.7,2.3], space fit "
      "err %.1f%% <= 20%%, N=600: ssd %.2fms/%.2fMiB vs dpp %.2fms/%.2fMiB",
      ssd_slope, dpp_slope, 100.0 * worst_fit, double(ssd600.median_ns) / 1e6,
      double(ssd600.working_bytes) / 1048576.0, double(dpp600.median_ns) / 1e6,
      double(dpp600.working_bytes) / 1048576.0);

  const auto& w8 = find(Algorithm::SsdWindow, 4000, 8);
  const auto& w20 = find(Algorithm::SsdWindow, 4000, 20);
  const double spread =
      std::abs(double(w8.median_ns) - double(w20.median_ns)) /
      double(std::min(w8.median_ns, w20.median_ns));
  Outcome independence;
  independence.pass = spread < 0.25;
  independence.detail = fmt("N=4000: w=8 %.2fms vs w=20 %.2fms, spread %.1f%% < 25%%",
                            double(w8.median_ns) / 1e6, double(w20.median_ns) / 1e6,
                            100.0 * spread);
  return {separation, independence};
}

// Criterion 6: metric fixtures and the rescaling invariance.
Outcome criterion_metrics() {
  const auto session = [](std::vector<Eigen::Vector3d> rows) {
    ssd::SessionLog<double> out;
    out.user = "u";
    out.impressed_embeddings.resize(static_cast<Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.impressed_ids.push_back("i" + std::to_string(i));
      out.impressed_embeddings.row(static_cast<Index>(i)) = rows[i].transpose();
    }
    return out;
  };

  const double duplicate = ssd::ilad(std::vector{
      session({Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)})});
  const double orthogonal = ssd::ilad(std::vector{
      session({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 5, 0)})});

  ssd::SessionLog<double> clicks1;
  clicks1.clicked_ids = {"a", "b", "c"};
  clicks1.taxonomy = {{"a", "food"}, {"b", "food"}, {"c", "travel"}};
  ssd::SessionLog<double> clicks2;
  ssd::SessionLog<double> clicks3;
  clicks3.clicked_ids = {"x", "y", "z"};
  clicks3.taxonomy = {{"x", "sport"}, {"y", "travel"}, {"z", "fashion"}};
  const double mrt1 = ssd::mrt(std::vector{clicks1});
  const double mrt2 = ssd::mrt(std::vector{clicks2});
  const double mrt3 = ssd::mrt(std::vector{clicks1, clicks2, clicks3});

  auto sessions = std::vector{session(
      {Eigen::Vector3d(1, 2, 0), Eigen::Vector3d(0, 1, 1), Eigen::Vector3d(3, 0, 1)})};
  const double base = ssd::ilad(sessions);
  sessions[0].impressed_embeddings *= 7.0;
  const double scaled = ssd::ilad(sessions);

  const bool pass = duplicate == 0.0 && std::abs(orthogonal - 1.0) < 1e-15 &&
                    mrt1 == 2.0 && mrt2 == 0.0 &&
                    std::abs(mrt3 - 5.0 / 3.0) < 1e-15 &&
                    std::abs(base - scaled) <= 1e-12;
  return {pass, fmt("ilad dup %.1e, orth %.17g, mrt {%g, %g, %g}, rescale drift %.1e",
                    duplicate, orthogonal, mrt1, mrt2, mrt3,
                    std::abs(base - scaled))};
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Criterion 7: repeated CLI invocations with identical inputs are
// byte-identical, and the production shape yields 80 unique ids.
Outcome criterion_cli_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "ssd_rerank path not supplied"};
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("ssd-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path input = dir / "pool.jsonl";
  ssd::save_candidates(ssd::synthetic_raw_pool<double>(600, 64, 20240809), input.string());

  const auto invoke = [&](const std::string& args, const fs::path& output,
                          const fs::path& report) {
    const std::string command = cli + " --input " + input.string() + " " + args +
                                " --output " + output.string() + " --report " +
                                report.string() + " >/dev/null 2>&1";
    return std::system(command.c_str());
  };

  bool pass = true;
  std::string detail;
  const struct {
    const char* name;
    const char* args;
  } cases[] = {
      {"ssd-star", "--algo ssd-star --length 80 --window 10 --gamma 0.5"},
      {"dpp-window", "--algo dpp-window --length 40 --window 8 --alpha 1.0"},
  };
  for (const auto& test_case : cases) {
    const fs::path out1 = dir / (std::string(test_case.name) + ".1.ids");
    const fs::path out2 = dir / (std::string(test_case.name) + ".2.ids");
    const fs::path rep1 = dir / (std::string(test_case.name) + ".1.csv");
    const fs::path rep2 = dir / (std::string(test_case.name) + ".2.csv");
    const int status1 = invoke(test_case.args, out1, rep1);
    const int status2 = invoke(test_case.args, out2, rep2);
    if (status1 != 0 || status2 != 0) {
      pass = false;
      detail += fmt("%s exit %d/%d; ", test_case.name, status1, status2);
      continue;
    }
    const std::string bytes1 = read_bytes(out1);
    if (bytes1.empty() || bytes1 != read_bytes(out2) ||
        read_bytes(rep1) != read_bytes(rep2)) {
      pass = false;
      detail += fmt("%s output differs across runs; ", test_case.name);
    }
  }

  // production shape: 80 unique ids
  std::istringstream lines(read_bytes(dir / "ssd-star.1.ids"));
  std::set<std::string> unique;
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    unique.insert(line);
    ++count;
  }
  if (count != 80 || unique.size() != 80) {
    pass = false;
    detail += fmt("expected 80 unique ids, got %zu (%zu unique); ", count, unique.size());
  }
  fs::remove_all(dir);
  if (pass) detail = "2 invocations x 2 runs byte-identical, 80 unique ids";
  return {pass, detail};
}

// Criterion 8: the studies that need live traffic or the proprietary corpus
// are documented as out of scope rather than imitated.
Outcome criterion_documented_scope() {
#ifdef SSD_SOURCE_DIR
  const std::string readme = read_bytes(std::filesystem::path(SSD_SOURCE_DIR) / "README.md");
  const bool pass = readme.find("not reproducible") != std::string::npos;
  return {pass, pass ? "README documents the non-reproducible studies"
                     : "README lacks the out-of-scope note"};
#else
  return {false, "source dir unknown"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::vector<std::pair<std::string, Outcome>> results;

  const auto guard = [&](const std::string& name, auto&& fn) {
    try {
      results.emplace_back(name, fn());
    } catch (const std::exception& error) {
      results.emplace_back(name, Outcome{false, std::string("exception: ") + error.what()});
    }
  };

  guard("1 no-window volume equals Gram determinant", criterion_volume_identity);
  guard("2 windowed engines match naive oracles exactly", criterion_window_exactness);
  guard("3 dpp greedy matches exhaustive log-det traces", criterion_dpp_exactness);
  {
    StudyOutcomes study{{false, "not run"}, {false, "not run"}};
    try {
      study = criteria_scaling();
    } catch (const std::exception& error) {
      study.separation = {false, std::string("exception: ") + error.what()};
      study.window_independence = study.separation;
    }
    results.emplace_back("4 time and space separation", study.separation);
    results.emplace_back("5 ssd time independent of window size", study.window_independence);
  }
  guard("6 metric fixtures and rescale invariance", criterion_metrics);
  guard("7 CLI determinism and production shape",
        [&] { return criterion_cli_determinism(cli); });
  guard("8 out-of-scope studies documented", criterion_documented_scope);

  bool all = true;
  for (const auto& [name, outcome] : results) {
    std::cout << "criterion " << name << ": " << (outcome.pass ? "PASS" : "FAIL")
              << " (" << outcome.detail << ")\n";
    all = all && outcome.pass;
  }
  std::cout << (all ? "RESULT: all criteria passed" : "RESULT: FAILURES present")
            << std::endl;
  return all ? 0 : 1;
}
