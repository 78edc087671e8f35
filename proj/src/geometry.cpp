#include "zonekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zonekit/error.hpp"

namespace zonekit::geometry {

namespace {

constexpr double kEdgeTolerance = 1e-9;

double signed_area(const Ring& r) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) a += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  return 0.5 * a;
}

double orient(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

// Closes the ring, drops consecutive duplicates, checks finiteness/area.
Ring normalize_ring(Ring ring, const char* what) {
  for (const auto& p : ring)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw GeometryError(std::string(what) + ": non-finite coordinate");
  Ring out;
  for (const auto& p : ring)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (out.size() < 3)
    throw GeometryError(std::string(what) + ": fewer than 3 distinct vertices");
  out.push_back(out.front());
  if (std::abs(signed_area(out)) <= 0.0) throw GeometryError(std::string(what) + ": zero area");
  return out;
}

void check_simple(const Ring& r, const char* what) {
  const std::size_t n = r.size() - 1;  // segments
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(r[i], r[i + 1], r[j], r[j + 1]))
        throw GeometryError(std::string(what) + ": ring self-intersects");
    }
  }
}

void check_disjoint(const Ring& a, const Ring& b) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t j = 0; j + 1 < b.size(); ++j)
      if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1]))
        throw GeometryError("boundary: rings intersect each other");
}

}  // namespace

double BBox::diagonal() const { return std::hypot(width(), height()); }

FieldBoundary FieldBoundary::make(Ring ring, std::vector<Ring> holes) {
  FieldBoundary b;
  b.ring_ = normalize_ring(std::move(ring), "boundary");
  check_simple(b.ring_, "boundary");
  for (auto& h : holes) {
    b.holes_.push_back(normalize_ring(std::move(h), "boundary hole"));
    check_simple(b.holes_.back(), "boundary hole");
  }
  const auto rings = b.rings();
  for (std::size_t i = 0; i < rings.size(); ++i)
    for (std::size_t j = i + 1; j < rings.size(); ++j) check_disjoint(*rings[i], *rings[j]);
  if (b.area() <= 0.0) throw GeometryError("boundary: holes cover the whole polygon");
  return b;
}

double FieldBoundary::area() const {
  double a = std::abs(signed_area(ring_));
  for (const auto& h : holes_) a -= std::abs(signed_area(h));
  return a;
}

BBox FieldBoundary::bbox() const {
  BBox box{ring_[0].x, ring_[0].y, ring_[0].x, ring_[0].y};
  for (const auto& p : ring_) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

std::vector<const Ring*> FieldBoundary::rings() const {
  std::vector<const Ring*> out{&ring_};
  for (const auto& h : holes_) out.push_back(&h);
  return out;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

double distance_to_boundary(Point2 p, const FieldBoundary& boundary) {
  double best = std::numeric_limits<double>::infinity();
  for (const Ring* r : boundary.rings())
    for (std::size_t i = 0; i + 1 < r->size(); ++i)
      best = std::min(best, point_segment_distance(p, (*r)[i], (*r)[i + 1]));
  return best;
}

bool point_in_polygon(Point2 p, const FieldBoundary& boundary) {
  bool inside = false;
  for (const Ring* r : boundary.rings()) {
    for (std::size_t i = 0; i + 1 < r->size(); ++i) {
      const Point2 a = (*r)[i], b = (*r)[i + 1];
      if (point_segment_distance(p, a, b) <= kEdgeTolerance) return true;
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

BaseGrid::BaseGrid(GridKey key, std::vector<std::uint8_t> interior)
    : key_(key), interior_(std::move(interior)) {
  if (key_.cell_size <= 0.0 || key_.ncols == 0 || key_.nrows == 0)
    throw GeometryError("grid: empty lattice or non-positive cell size");
  if (interior_.size() != key_.cell_count())
    throw GeometryError("grid: interior mask size does not match lattice");
  for (std::size_t i = 0; i < interior_.size(); ++i)
    if (interior_[i]) interior_cells_.push_back(i);
}

Point2 BaseGrid::center(std::size_t index) const {
  const auto [row, col] = row_col(index);
  return {key_.origin_x + (static_cast<double>(col) + 0.5) * key_.cell_size,
          key_.origin_y + (static_cast<double>(row) + 0.5) * key_.cell_size};
}

Cell BaseGrid::cell(std::size_t index) const {
  const auto [row, col] = row_col(index);
  return {index, row, col, center(index), interior(index)};
}

std::optional<std::size_t> BaseGrid::locate(Point2 p) const {
  const double fc = std::floor((p.x - key_.origin_x) / key_.cell_size);
  const double fr = std::floor((p.y - key_.origin_y) / key_.cell_size);
  if (!(fc >= 0.0) || !(fr >= 0.0)) return std::nullopt;
  const auto col = static_cast<std::size_t>(fc);
  const auto row = static_cast<std::size_t>(fr);
  if (col >= key_.ncols || row >= key_.nrows) return std::nullopt;
  return index(row, col);
}

double BaseGrid::cell_distance(std::size_t a, std::size_t b) const {
  const auto [ra, ca] = row_col(a);
  const auto [rb, cb] = row_col(b);
  const double dr = static_cast<double>(ra) - static_cast<double>(rb);
  const double dc = static_cast<double>(ca) - static_cast<double>(cb);
  return std::hypot(dr, dc) * key_.cell_size;
}

BBox BaseGrid::bbox() const {
  return {key_.origin_x, key_.origin_y,
          key_.origin_x + static_cast<double>(key_.ncols) * key_.cell_size,
          key_.origin_y + static_cast<double>(key_.nrows) * key_.cell_size};
}

BaseGrid build_grid(const FieldBoundary& boundary, double cell_size, double border_width) {
  if (!(cell_size > 0.0)) throw GeometryError("grid: cell_size must be > 0");
  if (!(border_width >= 0.0)) throw GeometryError("grid: border_width must be >= 0");
  const BBox box = boundary.bbox();
  GridKey key;
  key.cell_size = cell_size;
  key.origin_x = std::floor(box.min_x / cell_size) * cell_size;
  key.origin_y = std::floor(box.min_y / cell_size) * cell_size;
  // Small slack so a bbox edge landing exactly on a lattice line does not
  // add an empty column.
  auto count = [&](double extent) {
    const double n = std::ceil(extent / cell_size - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
  };
  key.ncols = count(box.max_x - key.origin_x);
  key.nrows = count(box.max_y - key.origin_y);

  std::vector<std::uint8_t> interior(key.cell_count(), 0);
  BaseGrid probe(key, interior);
  for (std::size_t i = 0; i < key.cell_count(); ++i) {
    const Point2 c = probe.center(i);
    if (!point_in_polygon(c, boundary)) continue;
    if (border_width > 0.0 && distance_to_boundary(c, boundary) < border_width) continue;
    interior[i] = 1;
  }
  return BaseGrid(key, std::move(interior));
}

FieldBoundary rectangle(double x0, double y0, double x1, double y1) {
  return FieldBoundary::make({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}});
}

}  // namespace zonekit::geometry
