#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"

namespace zonekit::cli {

/// Runs the command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage or config, 2 io/schema/geometry/data,
/// 3 numerical. Errors are written to err as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// Per-command run record written next to the outputs as
/// <output>.manifest.json. Contains no timestamps or host data.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed, nlohmann::json config);

  void add_input(const std::string& role, const std::string& path);
  void add_output(const std::string& path);
  nlohmann::json& stages() { return stages_; }

  nlohmann::json to_json() const;
  void write(const std::string& path) const;

 private:
  std::string command_;
  std::uint64_t seed_;
  nlohmann::json config_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json stages_ = nlohmann::json::object();
};

/// Choropleth PNG: one square of `scale` pixels per cell, north up, a
/// blue-to-yellow ramp over [lo, hi] (surface range when lo == hi), missing
/// cells transparent.
void write_png(const std::string& path, const Surface& surface, double lo = 0.0, double hi = 0.0,
               unsigned scale = 4);

}  // namespace zonekit::cli
