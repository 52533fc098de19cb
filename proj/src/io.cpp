#include "ssd/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

namespace ssd {

namespace {

std::string at_line(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

}  // namespace

RawPool<double> load_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open candidate file \"" + path + "\"");

  RawPool<double> pool;
  std::unordered_set<std::string> seen;
  Index raw_dim = -1;
  std::string line;
  std::size_t line_number = 0;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& error) {
      throw InputError(at_line(path, line_number) +
                       "malformed JSON: " + error.what());
    }

    if (!record.is_object())
      throw InputError(at_line(path, line_number) + "record is not a JSON object");
    if (!record.contains("id") || !record["id"].is_string())
      throw InputError(at_line(path, line_number) + "missing string field \"id\"");
    if (!record.contains("quality") || !record["quality"].is_number())
      throw InputError(at_line(path, line_number) + "missing numeric field \"quality\"");
    if (!record.contains("embedding") || !record["embedding"].is_array() ||
        record["embedding"].empty())
      throw InputError(at_line(path, line_number) +
                       "missing non-empty array field \"embedding\"");

    ItemCandidate<double> item;
    item.id = record["id"].get<std::string>();
    if (!seen.insert(item.id).second)
      throw InputError(at_line(path, line_number) + "duplicate id \"" + item.id + "\"");
    item.quality = record["quality"].get<double>();

    const auto& embedding = record["embedding"];
    item.raw_embedding.resize(static_cast<Index>(embedding.size()));
    for (std::size_t k = 0; k < embedding.size(); ++k) {
      if (!embedding[k].is_number())
        throw InputError(at_line(path, line_number) +
                         "embedding entry " + std::to_string(k) + " is not a number");
      item.raw_embedding[static_cast<Index>(k)] = embedding[k].get<double>();
    }
    if (raw_dim < 0) raw_dim = item.raw_embedding.size();
    if (item.raw_embedding.size() != raw_dim)
      throw InputError(at_line(path, line_number) + "embedding length " +
                       std::to_string(item.raw_embedding.size()) +
                       " does not match earlier length " + std::to_string(raw_dim));

    if (record.contains("taxonomy") && !record["taxonomy"].is_null()) {
      if (!record["taxonomy"].is_string())
        throw InputError(at_line(path, line_number) + "field \"taxonomy\" is not a string");
      item.taxonomy = record["taxonomy"].get<std::string>();
    }
    if (record.contains("blocked") && !record["blocked"].is_null()) {
      if (!record["blocked"].is_boolean())
        throw InputError(at_line(path, line_number) + "field \"blocked\" is not a boolean");
      item.blocked = record["blocked"].get<bool>();
    }
    pool.items.push_back(std::move(item));
  }

  if (pool.items.empty())
    throw InputError("empty candidate file \"" + path + "\"");
  return pool;
}

void save_candidates(const RawPool<double>& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open \"" + path + "\" for writing");
  for (const auto& item : pool.items) {
    nlohmann::json record;
    record["id"] = item.id;
    record["quality"] = item.quality;
    record["embedding"] = std::vector<double>(
        item.raw_embedding.data(), item.raw_embedding.data() + item.raw_embedding.size());
    if (item.taxonomy) record["taxonomy"] = *item.taxonomy;
    if (item.blocked) record["blocked"] = true;
    out << record.dump() << '\n';
  }
}

void write_sequence(const RerankReport<double>& report, std::ostream& out) {
  for (const auto& id : report.sequence) out << id << '\n';
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_step_report_csv(const RerankReport<double>& report, std::ostream& out) {
  out << "step,chosen_id,quality_term,diversity_term,log_volume\n";
  for (std::size_t step = 0; step < report.per_step.size(); ++step) {
    const auto& record = report.per_step[step];
    out << step + 1 << ',' << record.chosen_id << ','
        << format_double(record.quality_term) << ','
        << format_double(record.diversity_term) << ','
        << format_double(record.log_volume) << '\n';
  }
}

}  // namespace ssd
