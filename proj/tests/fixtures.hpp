#pragma once

#include <string>

#include "json.hpp"
#include "mcsum/mcsum.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(MCSUM_DATA_DIR) + "/" + name; }

inline mcsum::TransitionMatrix load(const std::string& name) {
  const auto raw = mcsum::io::read_chain_file(data_path(name));
  return mcsum::validate(raw.p, raw.labels);
}

inline mcsum::TransitionMatrix fix5() { return load("fix5.csv"); }
inline mcsum::TransitionMatrix fix8() { return load("fix8.csv"); }

inline nlohmann::json expected(const std::string& name) {
  return nlohmann::json::parse(mcsum::io::read_text(data_path(name)));
}

inline mcsum::Matrix matrix_of(const nlohmann::json& rows) {
  return mcsum::Matrix::from_rows(rows.get<std::vector<mcsum::Vector>>());
}

inline mcsum::TransitionMatrix two_state(double a, double b) {
  return mcsum::validate(mcsum::Matrix::from_rows({{1.0 - a, a}, {b, 1.0 - b}}));
}

inline mcsum::TransitionMatrix cycle3() {
  return mcsum::validate(mcsum::Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
}

inline mcsum::TransitionMatrix uniform(std::size_t n) {
  return mcsum::validate(mcsum::Matrix(n, n, 1.0 / static_cast<double>(n)));
}

}  // namespace fixtures
