#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdet/config.hpp"
#include "seqdet/mc.hpp"

namespace seqdet {

/// Result of one (test, c) cell of an experiment.
struct CellResult {
  std::string test;
  double c;
  std::uint64_t seed;
  EstimateTable table;
};

inline const char* const kCsvColumns[] = {"test", "c", "hypothesis", "mean_N", "stderr_N", "p_error", "stderr_p",
                                          "replications", "seed", "diagnostics"};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string fmt_general(double v) { return fmt("%.6g", v); }
inline std::string fmt_probability(double v) { return fmt("%.5e", v); }
inline std::string fmt_optional(const std::optional<double>& v, std::string (*f)(double)) {
  return v ? f(*v) : std::string("NA");
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string diagnostics(const EstimateRow& row, bool low_ess) {
  std::string d;
  if (row.overruns > 0) d += "overruns=" + std::to_string(row.overruns);
  if (low_ess) d += std::string(d.empty() ? "" : ";") + "low_ess";
  return d;
}

/// One table line as already-formatted strings; the CSV and JSON writers share it.
struct Line {
  std::string test, c, hypothesis, mean_n, stderr_n, p_error, stderr_p, replications, seed, diagnostics;
};

inline std::vector<Line> lines_of(const CellResult& cell) {
  std::vector<Line> out;
  const std::string c = fmt_general(cell.c);
  const std::string seed = std::to_string(cell.seed);
  auto add_row = [&](const std::string& label, const EstimateRow& row, bool low_ess) {
    out.push_back({cell.test, c, label, fmt_general(row.mean_n), fmt_optional(row.stderr_n, fmt_general),
                   fmt_probability(row.p_error), fmt_optional(row.stderr_p, fmt_probability),
                   std::to_string(row.replications), seed, diagnostics(row, low_ess)});
  };
  for (Hypothesis h : kRawHypotheses) {
    const auto& r = cell.table.rows[index_of(h)];
    if (r) add_row(std::string(name_of(h)), *r, cell.table.low_ess && r->ess < 0.01 * static_cast<double>(r->replications));
  }
  add_row("mixture", cell.table.mixture, cell.table.low_ess);
  if (cell.table.bayes_risk) {
    const auto& br = *cell.table.bayes_risk;
    out.push_back({cell.test, c, "bayes_risk", "", "", fmt_general(br.risk), fmt_optional(br.stderr_risk, fmt_general),
                   std::to_string(cell.table.mixture.replications), seed, ""});
  }
  return out;
}

inline nlohmann::json number_or_null(const std::string& s) {
  if (s.empty() || s == "NA") return nullptr;
  return std::stod(s);
}

}  // namespace detail

/// CSV with '#'-prefixed header comment lines echoing the configuration.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header_comments,
                      const std::vector<CellResult>& cells) {
  for (const auto& line : header_comments) os << "# " << line << "\n";
  bool first = true;
  for (const char* col : kCsvColumns) {
    os << (first ? "" : ",") << col;
    first = false;
  }
  os << "\n";
  for (const auto& cell : cells) {
    for (const auto& l : detail::lines_of(cell)) {
      const std::string fields[] = {l.test,    l.c,        l.hypothesis,   l.mean_n, l.stderr_n,
                                    l.p_error, l.stderr_p, l.replications, l.seed,   l.diagnostics};
      for (std::size_t i = 0; i < std::size(fields); ++i) os << (i ? "," : "") << detail::csv_field(fields[i]);
      os << "\n";
    }
  }
}

/// JSON mirror of write_csv: the same values, parsed back from their CSV text.
inline nlohmann::json tables_to_json(const nlohmann::json& config, const std::vector<CellResult>& cells) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& cell : cells) {
    for (const auto& l : detail::lines_of(cell)) {
      rows.push_back({{"test", l.test},
                      {"c", std::stod(l.c)},
                      {"hypothesis", l.hypothesis},
                      {"mean_N", detail::number_or_null(l.mean_n)},
                      {"stderr_N", detail::number_or_null(l.stderr_n)},
                      {"p_error", detail::number_or_null(l.p_error)},
                      {"stderr_p", detail::number_or_null(l.stderr_p)},
                      {"replications", std::stoull(l.replications)},
                      {"seed", std::stoull(l.seed)},
                      {"diagnostics", l.diagnostics}});
    }
  }
  return {{"config", config}, {"rows", rows}};
}

}  // namespace seqdet
