#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chameleon/stats.hpp"

namespace chameleon {

inline constexpr const char* kReportSchema = "chameleon.report/1";

struct NamedEstimate {
  std::string name;
  WeightedEstimate estimate;
};

/// A pass/fail outcome tied to one estimate and the threshold it was judged against.
struct Verdict {
  std::string name;
  std::string estimate;  // name of an estimate in the same report
  double threshold = 0.0;
  std::string rule;      // human-readable comparison, e.g. "|point - target| <= 3 stderr"
  bool pass = false;
};

struct ExperimentReport {
  std::string experiment;
  std::string graph;
  std::vector<std::pair<std::string, double>> parameters;
  std::uint64_t seed = 0;
  std::vector<NamedEstimate> estimates;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;
  nlohmann::ordered_json run_config;  // null unless set by the caller

  void add_parameter(std::string name, double value) { parameters.emplace_back(std::move(name), value); }
  void add_estimate(std::string name, const WeightedEstimate& e) { estimates.push_back({std::move(name), e}); }
  /// Throws std::invalid_argument unless v.estimate names an existing estimate.
  void add_verdict(Verdict v);

  const WeightedEstimate& estimate(const std::string& name) const;
  const Verdict& verdict(const std::string& name) const;
  bool all_pass() const;
};

nlohmann::ordered_json to_json(const ExperimentReport& r);
/// Inverse of to_json; throws std::invalid_argument on a schema mismatch.
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

/// CSV "name,point,stderr,trials,weight" with 17 significant digits.
void write_estimates_csv(std::ostream& os, const ExperimentReport& r);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

/// Writes the "# run_config=<json>" comment line that heads every CSV output.
void write_run_config_comment(std::ostream& os, const nlohmann::ordered_json& run_config);

/// A parsed CSV output: leading '#' comment lines, one header row, data rows.
struct CsvTable {
  nlohmann::ordered_json run_config;  // null when absent
  std::vector<std::string> comments;  // every '#' line without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
};

/// Parses CSV written by this library (quoted fields allowed, no embedded newlines).
/// Throws std::invalid_argument on a missing header or ragged rows.
CsvTable read_csv_table(std::istream& is);

/// Formats a double with 17 significant digits ("inf", "-inf", "nan" for non-finite values).
std::string format_number(double x);

}  // namespace chameleon
