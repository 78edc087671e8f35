#include "zonekit/core.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "zonekit/error.hpp"

namespace zonekit {

namespace {
std::atomic<unsigned> g_threads{1};
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::config: return 1;
    case ErrorKind::io:
    case ErrorKind::schema:
    case ErrorKind::geometry:
    case ErrorKind::data: return 2;
    case ErrorKind::numerical: return 3;
  }
  return 1;
}

std::size_t Surface::count_valid() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return !std::isnan(v); }));
}

std::vector<std::size_t> Surface::valid_cells() const {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isnan(values[i])) cells.push_back(i);
  return cells;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (s.count == 0) {
      s.min = s.max = v;
    } else {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    sum += v;
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - s.mean) * (v - s.mean);
  s.stdev = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

void require_same_grid(const Surface& a, const Surface& b, const std::string& what) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size())
    throw DataError(what + ": surfaces are on different grids");
}

void require_same_grid(const GridKey& grid, const GridKey& other, const std::string& what) {
  if (!(grid == other)) throw DataError(what + ": surface is on a different grid");
}

unsigned thread_count() { return g_threads.load(); }

void set_thread_count(unsigned n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(n);
}

}  // namespace zonekit
