#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "zonekit/geometry.hpp"
#include "zonekit/random.hpp"

namespace zk_test {

namespace fs = std::filesystem;

/// Grid of ncols x nrows cells, every cell interior.
inline zonekit::geometry::BaseGrid full_grid(std::size_t ncols, std::size_t nrows, double cell = 10.0,
                                             double ox = 0.0, double oy = 0.0) {
  zonekit::GridKey key{ox, oy, cell, ncols, nrows};
  return zonekit::geometry::BaseGrid(key, std::vector<std::uint8_t>(key.cell_count(), 1));
}

/// Fresh scratch directory, removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("zonekit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace zk_test
