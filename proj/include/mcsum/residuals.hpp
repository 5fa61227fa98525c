#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcsum {

// Named max-abs residuals, kept in insertion order.
struct ResidualReport {
  struct Entry {
    std::string name;
    double value;
  };
  std::vector<Entry> entries;

  void add(std::string name, double value) { entries.push_back({std::move(name), value}); }

  void append(const ResidualReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  }

  double max() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.value);
    return m;
  }

  std::optional<double> find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e.value;
    return std::nullopt;
  }

  // Entries above tol, plus any NaN.
  std::vector<Entry> failures(double tol) const {
    std::vector<Entry> out;
    for (const auto& e : entries)
      if (!(e.value <= tol)) out.push_back(e);
    return out;
  }
};

}  // namespace mcsum
