#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>

#include "errors.hpp"

namespace spde {

// [section] headers, "key = value" lines, '#' comments. Keys are addressed as "section.key".
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    c.source_ = source;
    std::string line, section;
    int ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      boost::algorithm::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(c.where(ln) + "unterminated section header");
        section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(c.where(ln) + "empty section name");
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(c.where(ln) + "expected 'key = value'");
      std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
      std::string val = boost::algorithm::trim_copy(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(c.where(ln) + "empty key");
      std::string full = section.empty() ? key : section + "." + key;
      if (c.entries_.count(full)) throw ConfigError(c.where(ln) + "duplicate key '" + full + "'");
      c.entries_[full] = {val, ln};
    }
    return c;
  }
  static Config parse_string(const std::string& s, const std::string& source = "<string>") {
    std::istringstream in(s);
    return parse(in, source);
  }
  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    return parse(f, path);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, const std::string& v) { entries_[key] = {v, 0}; }

  std::string str(const std::string& key) const { return entry(key).value; }
  std::string str(const std::string& key, const std::string& dflt) const { return has(key) ? str(key) : dflt; }

  double num(const std::string& key) const { return to_number(key, entry(key)); }
  double num(const std::string& key, double dflt) const { return has(key) ? num(key) : dflt; }

  long long integer(const std::string& key) const {
    double v = num(key);
    if (v != std::floor(v)) throw ConfigError(at(key) + "'" + key + "' must be an integer");
    return static_cast<long long>(v);
  }
  long long integer(const std::string& key, long long dflt) const { return has(key) ? integer(key) : dflt; }

  std::uint64_t u64(const std::string& key, std::uint64_t dflt) const {
    if (!has(key)) return dflt;
    const auto& e = entry(key);
    try {
      std::size_t pos = 0;
      auto v = std::stoull(e.value, &pos, 0);
      if (pos != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(at(key) + "'" + key + "' must be an unsigned integer");
    }
  }

  bool flag(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    auto v = boost::algorithm::to_lower_copy(str(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(at(key) + "'" + key + "' must be true or false");
  }

  std::vector<double> list(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<std::string> parts;
    boost::algorithm::split(parts, e.value, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
      boost::algorithm::trim(p);
      if (p.empty()) throw ConfigError(at(key) + "empty element in list '" + key + "'");
      out.push_back(to_number(key, {p, e.line}));
    }
    return out;
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& dflt) const {
    return has(key) ? list(key) : dflt;
  }
  std::vector<std::string> words(const std::string& key) const {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, str(key), boost::is_any_of(","));
    for (auto& p : parts) boost::algorithm::trim(p);
    return parts;
  }

  // every key must have been read by the command
  void reject_unknown(const std::set<std::string>& allowed) const {
    for (auto& [k, e] : entries_)
      if (!allowed.count(k)) throw ConfigError(where(e.line) + "unknown key '" + k + "'");
  }

  // canonical text: sorted key = value lines
  std::string canonical() const {
    std::string s;
    for (auto& [k, e] : entries_) s += k + " = " + e.value + "\n";
    return s;
  }
  // FNV-1a 64 of the canonical text, hex
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::string where(int line) const { return source_ + (line > 0 ? ":" + std::to_string(line) : "") + ": "; }
  std::string at(const std::string& key) const { return has(key) ? where(entries_.at(key).line) : where(0); }

  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    return it->second;
  }

  // plain numbers or powers of two written 2^-k
  double to_number(const std::string& key, const Entry& e) const {
    const std::string& v = e.value;
    try {
      auto caret = v.find('^');
      std::size_t pos = 0;
      if (caret != std::string::npos) {
        double base = std::stod(v.substr(0, caret), &pos);
        if (pos != caret) throw std::invalid_argument("base");
        std::string ex = v.substr(caret + 1);
        double e2 = std::stod(ex, &pos);
        if (pos != ex.size()) throw std::invalid_argument("exp");
        return std::pow(base, e2);
      }
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw ConfigError(where(e.line) + "'" + key + "' is not a number: '" + v + "'");
    }
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace spde
