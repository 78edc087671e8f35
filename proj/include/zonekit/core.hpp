#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace zonekit {

/// Planar coordinate in a projected metric CRS (meters).
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Identity of a base grid lattice. Two surfaces can be combined only when
/// their keys compare equal.
struct GridKey {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 10.0;
  std::size_t ncols = 0;
  std::size_t nrows = 0;

  std::size_t cell_count() const { return ncols * nrows; }
  friend bool operator==(const GridKey&, const GridKey&) = default;
};

/// One value per grid cell; missing cells hold NaN.
struct Surface {
  GridKey grid;
  std::vector<double> values;

  Surface() = default;
  explicit Surface(const GridKey& key) : grid(key), values(key.cell_count(), kMissing) {}

  std::size_t size() const { return values.size(); }
  bool has(std::size_t cell) const { return !std::isnan(values[cell]); }
  double operator[](std::size_t cell) const { return values[cell]; }
  double& operator[](std::size_t cell) { return values[cell]; }
  std::size_t count_valid() const;
  std::vector<std::size_t> valid_cells() const;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = kMissing;
  double stdev = kMissing;  // population
  double min = kMissing;
  double max = kMissing;
};

/// Statistics over the non-missing entries.
SummaryStats summarize(std::span<const double> values);
inline SummaryStats summarize(const Surface& s) { return summarize(s.values); }

void require_same_grid(const Surface& a, const Surface& b, const std::string& what);
void require_same_grid(const GridKey& grid, const GridKey& other, const std::string& what);

/// Number of worker threads used by data-parallel loops (default 1).
unsigned thread_count();
void set_thread_count(unsigned n);

}  // namespace zonekit
