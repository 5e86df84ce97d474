#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace spde {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct Stamp {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Stamp& s, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    out_ << "# command=" << s.command << " config_hash=" << s.config_hash << " seed=" << s.seed
         << " version=" << kArtifactVersion << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
    ncol_ = columns.size();
  }
  CsvWriter& row(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw DimensionMismatch("csv row width");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
    return *this;
  }

 private:
  std::ofstream out_;
  std::size_t ncol_ = 0;
};

inline nlohmann::ordered_json stamped(const Stamp& s) {
  nlohmann::ordered_json j;
  j["command"] = s.command;
  j["config_hash"] = s.config_hash;
  j["seed"] = s.seed;
  j["version"] = kArtifactVersion;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream o(path);
  if (!o) throw ConfigError("cannot write '" + path + "'");
  o << j.dump(2) << "\n";
}

}  // namespace spde
