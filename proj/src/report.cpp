#include "chameleon/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace chameleon {

void ExperimentReport::add_verdict(Verdict v) {
  const bool known = std::any_of(estimates.begin(), estimates.end(),
                                 [&](const NamedEstimate& e) { return e.name == v.estimate; });
  if (!known) throw std::invalid_argument(fmt::format("verdict '{}' references unknown estimate '{}'", v.name, v.estimate));
  verdicts.push_back(std::move(v));
}

const WeightedEstimate& ExperimentReport::estimate(const std::string& name) const {
  for (const auto& e : estimates)
    if (e.name == name) return e.estimate;
  throw std::out_of_range(fmt::format("no estimate named '{}'", name));
}

const Verdict& ExperimentReport::verdict(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return v;
  throw std::out_of_range(fmt::format("no verdict named '{}'", name));
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

namespace {

// JSON has no infinities; they travel as strings.
nlohmann::ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double read_number(const nlohmann::ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw std::invalid_argument("report: expected a number");
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["experiment"] = r.experiment;
  j["graph"] = r.graph;
  j["seed"] = r.seed;
  auto& params = j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.parameters) params[k] = number(v);
  auto& est = j["estimates"] = nlohmann::ordered_json::array();
  for (const auto& e : r.estimates)
    est.push_back({{"name", e.name},
                   {"point", number(e.estimate.point)},
                   {"stderr", number(e.estimate.std_error)},
                   {"trials", e.estimate.trials},
                   {"weight", to_string(e.estimate.weight)}});
  auto& ver = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts)
    ver.push_back({{"name", v.name},
                   {"estimate", v.estimate},
                   {"threshold", number(v.threshold)},
                   {"rule", v.rule},
                   {"pass", v.pass}});
  j["notes"] = r.notes;
  j["all_pass"] = r.all_pass();
  if (!r.run_config.is_null()) j["run_config"] = r.run_config;
  return j;
}

ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || j.value("schema", "") != kReportSchema)
    throw std::invalid_argument(fmt::format("report: expected schema '{}'", kReportSchema));
  try {
    ExperimentReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.graph = j.at("graph").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("parameters").items()) r.add_parameter(k, read_number(v));
    for (const auto& e : j.at("estimates")) {
      WeightedEstimate w;
      w.point = read_number(e.at("point"));
      w.std_error = read_number(e.at("stderr"));
      w.trials = e.at("trials").get<std::size_t>();
      w.weight = e.at("weight").get<std::string>() == "s_ratio" ? WeightKind::s_ratio : WeightKind::plain;
      r.add_estimate(e.at("name").get<std::string>(), w);
    }
    for (const auto& v : j.at("verdicts"))
      r.add_verdict({v.at("name").get<std::string>(), v.at("estimate").get<std::string>(),
                     read_number(v.at("threshold")), v.at("rule").get<std::string>(), v.at("pass").get<bool>()});
    r.notes = j.at("notes").get<std::vector<std::string>>();
    if (j.contains("run_config")) r.run_config = j.at("run_config");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("report: {}", e.what()));
  }
}

void write_estimates_csv(std::ostream& os, const ExperimentReport& r) {
  os << "name,point,stderr,trials,weight\n";
  for (const auto& e : r.estimates)
    os << csv_field(e.name) << ',' << format_number(e.estimate.point) << ',' << format_number(e.estimate.std_error) << ','
       << e.estimate.trials << ',' << to_string(e.estimate.weight) << '\n';
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_run_config_comment(std::ostream& os, const nlohmann::ordered_json& run_config) {
  os << "# run_config=" << run_config.dump() << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range(fmt::format("CSV has no column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("CSV: unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

CsvTable read_csv_table(std::istream& is) {
  CsvTable t;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      if (body.rfind("run_config=", 0) == 0) {
        try {
          t.run_config = nlohmann::ordered_json::parse(body.substr(11));
        } catch (const nlohmann::json::exception& e) {
          throw std::invalid_argument(fmt::format("CSV: bad run_config: {}", e.what()));
        }
      }
      t.comments.push_back(std::move(body));
      continue;
    }
    auto fields = split_fields(line);
    if (!header_seen) {
      t.header = std::move(fields);
      header_seen = true;
    } else {
      if (fields.size() != t.header.size())
        throw std::invalid_argument(fmt::format("CSV: row has {} fields, header has {}", fields.size(), t.header.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (!header_seen) throw std::invalid_argument("CSV: missing header");
  return t;
}

}  // namespace chameleon
