#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcm {

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// One instance of an inequality audit: lhs against the estimate's right side.
/// `ratio` is the empirical constant lhs / rhs for this instance.
struct AuditRecord {
  std::string estimate;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<NamedValue> params;
  double lhs = 0.0;
  std::vector<NamedValue> factors;
  double rhs = 0.0;
  double ratio = 0.0;
  std::optional<double> ratio_lower;  // Bernstein annulus lower bound only
  std::string regime;

  [[nodiscard]] double param(const std::string& name) const { return lookup(params, name); }
  [[nodiscard]] double factor(const std::string& name) const { return lookup(factors, name); }

  [[nodiscard]] bool valid() const {
    if (!std::isfinite(lhs) || !std::isfinite(rhs) || !std::isfinite(ratio) || ratio < 0.0) return false;
    for (const auto& f : factors) {
      if (!std::isfinite(f.value) || f.value < 0.0) return false;
    }
    return true;
  }

 private:
  static double lookup(const std::vector<NamedValue>& v, const std::string& name) {
    for (const auto& nv : v) {
      if (nv.name == name) return nv.value;
    }
    throw std::out_of_range("no entry named " + name);
  }
};

/// lhs / rhs with 0/0 = 0.
inline double audit_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

}  // namespace tcm
