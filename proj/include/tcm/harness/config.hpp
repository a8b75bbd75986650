#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcm::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration. Lines starting with '#' are comments;
/// booleans are true/false; lists are comma separated.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = trim(t.substr(eq + 1));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

  [[nodiscard]] std::string str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  [[nodiscard]] double real(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : to_real(key, it->second);
  }

  [[nodiscard]] long long integer(const std::string& key, long long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != it->second.size()) throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
    return v;
  }

  [[nodiscard]] bool boolean(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("key '" + key + "' expects true or false, got '" + it->second + "'");
  }

  [[nodiscard]] std::vector<double> reals(const std::string& key, const std::vector<double>& def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<double> out;
    for (const auto& item : split(it->second)) out.push_back(to_real(key, item));
    return out;
  }

  [[nodiscard]] std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : split(it->second);
  }

  /// Throws on any key outside `known`.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (known.count(k) == 0) throw ConfigError("unknown configuration key: " + k);
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  static double to_real(const std::string& key, const std::string& text) {
    if (text == "inf" || text == "infinity") return INFINITY;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != text.size()) throw ConfigError("key '" + key + "' expects a number, got '" + text + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace tcm::harness
