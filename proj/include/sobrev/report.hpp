#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sobrev/fn_format.hpp"

namespace sobrev {

// Per-case table plus summary. Every row ends with a pass flag; CSV headers
// are the `columns` followed by `pass`.
struct VerificationReport {
  struct Row {
    std::vector<double> values;
    bool pass = true;
  };

  std::string scenario;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::map<std::string, double> summary;
  std::size_t failures = 0;

  void add_row(std::vector<double> values, bool pass) {
    if (!pass) ++failures;
    rows.push_back({std::move(values), pass});
  }

  double at(std::size_t row, const std::string& column) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == column) return rows.at(row).values.at(c);
    }
    throw UsageError("no column '" + column + "'");
  }

  std::string to_csv() const {
    std::ostringstream out;
    for (const auto& c : columns) out << c << ',';
    out << "pass\n";
    for (const auto& r : rows) {
      for (double v : r.values) out << format_number(v) << ',';
      out << (r.pass ? "true" : "false") << '\n';
    }
    return out.str();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["config"] = config;
    j["columns"] = columns;
    auto rows_json = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      auto row = nlohmann::ordered_json::array();
      // non-finite values go out as strings so they survive the round trip
      for (double v : r.values) {
        if (std::isfinite(v)) row.push_back(v);
        else row.push_back(format_number(v));
      }
      row.push_back(r.pass);
      rows_json.push_back(std::move(row));
    }
    j["rows"] = std::move(rows_json);
    auto summary_json = nlohmann::ordered_json::object();
    for (const auto& [k, v] : summary) {
      if (std::isfinite(v)) summary_json[k] = v;
      else summary_json[k] = format_number(v);
    }
    summary_json["failures"] = failures;
    j["summary"] = std::move(summary_json);
    return j;
  }
};

}  // namespace sobrev
