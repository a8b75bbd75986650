#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/audit.hpp"

namespace tcm::harness {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Round-trippable text for a double; identical bits give identical text.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write " + path);
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Audit records of mixed estimates in one table: the union of parameter and
/// factor names (in first-seen order) forms the columns; absent cells are empty.
inline void write_audit_csv(const std::string& path, const std::vector<AuditRecord>& records) {
  std::vector<std::string> params, factors;
  auto note = [](std::vector<std::string>& names, const std::string& n) {
    for (const auto& x : names)
      if (x == n) return;
    names.push_back(n);
  };
  for (const auto& r : records) {
    for (const auto& p : r.params) note(params, p.name);
    for (const auto& f : r.factors) note(factors, f.name);
  }
  std::vector<std::string> header{"estimate", "seed", "n", "regime"};
  header.insert(header.end(), params.begin(), params.end());
  header.push_back("lhs");
  header.insert(header.end(), factors.begin(), factors.end());
  header.insert(header.end(), {"rhs", "ratio", "ratio_lower"});
  CsvWriter w(path, header);
  for (const auto& r : records) {
    std::vector<std::string> row{r.estimate, std::to_string(r.seed), std::to_string(r.n), r.regime};
    auto lookup = [](const std::vector<NamedValue>& v, const std::string& name) -> std::string {
      for (const auto& nv : v)
        if (nv.name == name) return fmt(nv.value);
      return "";
    };
    for (const auto& p : params) row.push_back(lookup(r.params, p));
    row.push_back(fmt(r.lhs));
    for (const auto& f : factors) row.push_back(lookup(r.factors, f));
    row.push_back(fmt(r.rhs));
    row.push_back(fmt(r.ratio));
    row.push_back(r.ratio_lower ? fmt(*r.ratio_lower) : "");
    w.row(row);
  }
}

}  // namespace tcm::harness
