#pragma once

// File formats and the JSON report schema.
//
// CSV: m lines of m comma-separated decimals, optionally preceded by a header
// line "# states: a,b,c". Other lines starting with '#' and blank lines are
// ignored.
// JSON: {"states": ["a", ...] (optional), "p": [[...], ...]}.
//
// State indices in JSON output are 1-based.

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mcsum/chain.hpp"
#include "mcsum/error.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/report.hpp"
#include "mcsum/scan.hpp"

namespace mcsum::io {

using ordered_json = nlohmann::ordered_json;

enum class Format { Csv, Json };

struct RawChain {
  Matrix p;
  std::optional<std::vector<std::string>> labels;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& field, std::size_t line) {
  if (field.empty()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": empty field");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ": '" + field + "' is not a number");
  }
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline RawChain finish(std::vector<Vector> rows, std::optional<std::vector<std::string>> labels) {
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no matrix rows");
  for (const auto& r : rows) {
    if (r.size() != rows.size()) {
      throw Error(ErrorKind::ParseError, "matrix is not square (" + std::to_string(rows.size()) +
                                             " rows, a row has " + std::to_string(r.size()) +
                                             " entries)");
    }
  }
  if (labels && labels->size() != rows.size()) {
    throw Error(ErrorKind::ParseError, std::to_string(labels->size()) + " state names for " +
                                           std::to_string(rows.size()) + " states");
  }
  try {
    return RawChain{Matrix::from_rows(rows), std::move(labels)};
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace detail

inline RawChain parse_csv(std::string_view text) {
  std::vector<Vector> rows;
  std::optional<std::vector<std::string>> labels;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = detail::trim(std::string_view(t).substr(1));
      constexpr std::string_view key = "states:";
      if (body.rfind(key, 0) == 0) labels = detail::split(std::string_view(body).substr(key.size()), ',');
      continue;
    }
    Vector row;
    for (const auto& field : detail::split(t, ',')) row.push_back(detail::parse_double(field, lineno));
    rows.push_back(std::move(row));
  }
  return detail::finish(std::move(rows), std::move(labels));
}

inline RawChain parse_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object() || !doc.contains("p") || !doc["p"].is_array()) {
    throw Error(ErrorKind::ParseError, "expected an object with a \"p\" array");
  }
  std::vector<Vector> rows;
  for (const auto& r : doc["p"]) {
    if (!r.is_array()) throw Error(ErrorKind::ParseError, "\"p\" rows must be arrays");
    Vector row;
    for (const auto& v : r) {
      if (!v.is_number()) throw Error(ErrorKind::ParseError, "\"p\" entries must be numbers");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  std::optional<std::vector<std::string>> labels;
  if (doc.contains("states") && !doc["states"].is_null()) {
    labels.emplace();
    for (const auto& s : doc["states"]) {
      if (!s.is_string()) throw Error(ErrorKind::ParseError, "\"states\" entries must be strings");
      labels->push_back(s.get<std::string>());
    }
  }
  return detail::finish(std::move(rows), std::move(labels));
}

inline Format infer_format(const std::filesystem::path& path) {
  return path.extension() == ".json" ? Format::Json : Format::Csv;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RawChain read_chain_file(const std::filesystem::path& path,
                                std::optional<Format> format = std::nullopt) {
  const std::string text = read_text(path);
  return format.value_or(infer_format(path)) == Format::Json ? parse_json(text) : parse_csv(text);
}

inline std::string to_csv(const Matrix& p, const std::vector<std::string>& labels) {
  std::string out = "# states: ";
  for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
  out += "\n";
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (j) out += ",";
      out += detail::format_double(p(i, j));
    }
    out += "\n";
  }
  return out;
}

inline ordered_json matrix_json(const Matrix& a) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (double v : a.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string to_json_text(const Matrix& p, const std::vector<std::string>& labels) {
  ordered_json doc;
  doc["states"] = labels;
  doc["p"] = matrix_json(p);
  return doc.dump(2) + "\n";
}

inline ordered_json residuals_json(const ResidualReport& r) {
  ordered_json out = ordered_json::object();
  for (const auto& e : r.entries) out[e.name] = e.value;
  return out;
}

inline ordered_json bounds_json(const BoundsReport& b) {
  ordered_json out;
  out["kemeny"] = b.kemeny;
  out["kemeny_lower"] = b.kemeny_lower;
  out["kemeny_margin"] = b.kemeny_margin;
  out["trace_h"] = b.trace_h;
  out["trace_h_lower"] = b.trace_h_lower;
  out["trace_h_margin"] = b.trace_h_margin;
  out["trace_h_weak_margin"] = b.trace_h_weak_margin;
  out["pi_upper_margin"] = b.pi_upper_margin;
  out["pi_lower_bound_offdiagonal"] = b.pi_lower_bound_offdiagonal;
  out["pi_lower_bound_weighted"] = b.pi_lower_bound_weighted;
  out["pi_lower_margin"] = b.pi_lower_margin;
  out["holds"] = b.holds();
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline ordered_json ordering_json(const OrderingRecord& rec) {
  ordered_json out;
  out["digest"] = hex64(rec.digest);
  out["m"] = rec.m;
  ordered_json pairs = ordered_json::array();
  for (const auto& s : rec.pairs) {
    ordered_json p;
    p["i"] = s.i + 1;
    p["j"] = s.j + 1;
    p["c"] = s.c;
    p["pi"] = s.pi;
    p["h_diag"] = s.h_diag;
    p["z_diag"] = s.z_diag;
    p["recurrence"] = s.recurrence;
    p["mfpt_row"] = s.mfpt_row;
    p["mfpt_col"] = s.mfpt_col;
    pairs.push_back(std::move(p));
  }
  out["pairs"] = std::move(pairs);
  ordered_json viol = ordered_json::array();
  for (const auto& v : rec.violations) {
    ordered_json x;
    x["relation"] = v.relation;
    x["i"] = v.i + 1;
    x["j"] = v.j + 1;
    viol.push_back(std::move(x));
  }
  out["violations"] = std::move(viol);
  return out;
}

inline ordered_json report_json(const ChainReport& r) {
  ordered_json out;
  out["schema"] = "mcsum.report/1";
  out["m"] = r.m;
  out["labels"] = r.labels;
  if (r.permutation) {
    std::vector<std::size_t> one_based;
    for (std::size_t k : *r.permutation) one_based.push_back(k + 1);
    out["permutation"] = one_based;
  } else {
    out["permutation"] = nullptr;
  }
  out["p"] = matrix_json(r.p);
  out["column_sums"] = r.column_sums.c;
  out["stationary"] = r.stationary.pi;
  {
    ordered_json k;
    k["value"] = r.kemeny.value;
    k["from_group_inverse"] = r.kemeny.from_group_inverse;
    k["from_h"] = r.kemeny.from_h;
    k["from_z"] = r.kemeny.from_z;
    k["max_deviation"] = r.kemeny.max_deviation;
    out["kemeny"] = std::move(k);
  }
  out["mfpt"] = matrix_json(r.mfpt.mfpt);
  out["mfpt_row_sums"] = row_sums(r.mfpt.mfpt);
  out["mfpt_col_sums"] = col_sums(r.mfpt.mfpt);
  out["h_matrix"] = matrix_json(r.h_matrix);
  out["z_matrix"] = matrix_json(r.z_matrix);
  out["structural_residuals"] = residuals_json(r.structural_residuals);
  out["identity_residuals"] = residuals_json(r.identity_residuals);
  out["cross_checks"] = residuals_json(r.cross_checks);
  {
    ordered_json pos;
    pos["min_h_diagonal"] = r.positivity.min_h_diagonal;
    pos["min_z_diagonal"] = r.positivity.min_z_diagonal;
    pos["min_h_diagonal_excess"] = r.positivity.min_h_diagonal_excess;
    pos["min_z_diagonal_excess"] = r.positivity.min_z_diagonal_excess;
    out["positivity"] = std::move(pos);
  }
  out["bounds"] = bounds_json(r.bounds);
  if (const auto* ds = std::get_if<DoublyStochasticReport>(&r.doubly_stochastic)) {
    ordered_json d;
    d["max_colsum_deviation"] = ds->max_colsum_deviation;
    d["residuals"] = residuals_json(ds->residuals);
    d["mfpt_row_sums"] = ds->mfpt_row_sums;
    d["min_row_sum_margin"] = ds->min_row_sum_margin;
    out["doubly_stochastic"] = std::move(d);
  } else {
    out["doubly_stochastic"] = nullptr;
    out["colsum_deviation_from_one"] =
        std::get<NotApplicable>(r.doubly_stochastic).max_colsum_deviation;
  }
  out["ordering"] = ordering_json(r.ordering);
  {
    ordered_json cond;
    cond["estimate"] = r.condition_estimate;
    cond["warning"] = r.condition_warning;
    out["condition"] = std::move(cond);
  }
  return out;
}

// One JSON object per line, in (m, trial) order.
inline std::string counterexample_log(const ScanResult& result) {
  std::string out;
  for (const auto& cx : result.counterexamples) {
    ordered_json line;
    line["m"] = cx.m;
    line["trial"] = cx.trial;
    line["seed"] = cx.seed;
    std::vector<std::string> relations;
    for (const auto& v : cx.record.violations)
      if (std::find(relations.begin(), relations.end(), v.relation) == relations.end())
        relations.push_back(v.relation);
    line["relations"] = relations;
    line["p"] = matrix_json(cx.chain.p());
    line["ordering"] = ordering_json(cx.record);
    out += line.dump() + "\n";
  }
  return out;
}

inline std::string scan_summary(const ScanResult& result) {
  std::string out;
  char buf[256];
  for (const auto& t : result.tallies) {
    std::snprintf(buf, sizeof buf, "m=%zu relation=%s kind=%s trials=%zu violations=%zu rate=%.6f\n",
                  t.m, t.relation.c_str(), t.theorem_backed ? "theorem" : "conjecture", t.trials,
                  t.violations, t.rate());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "identity_failures=%zu max_identity_residual=%.3e\n",
                result.identity_failures.size(), result.max_identity_residual);
  out += buf;
  std::snprintf(buf, sizeof buf, "counterexamples=%zu theorem_violations=%zu\n",
                result.counterexamples.size(), result.theorem_violations());
  out += buf;
  return out;
}

}  // namespace mcsum::io
