#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "zonekit/core.hpp"

namespace zonekit::geometry {

using Ring = std::vector<Point2>;

struct BBox {
  double min_x, min_y, max_x, max_y;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const;
};

/// Field polygon in planar meters: one closed outer ring plus optional holes.
/// Construct through make(), which validates and closes rings.
class FieldBoundary {
 public:
  /// Throws GeometryError when a ring has fewer than 3 distinct vertices,
  /// zero area, non-finite coordinates, or self-intersections.
  static FieldBoundary make(Ring ring, std::vector<Ring> holes = {});

  const Ring& ring() const { return ring_; }
  const std::vector<Ring>& holes() const { return holes_; }
  double area() const;
  BBox bbox() const;

  /// Outer ring followed by holes.
  std::vector<const Ring*> rings() const;

 private:
  FieldBoundary() = default;
  Ring ring_;
  std::vector<Ring> holes_;
};

/// Even-odd membership; points on any edge count as inside.
bool point_in_polygon(Point2 p, const FieldBoundary& boundary);

/// Minimum distance from p to any boundary segment (outer ring and holes).
double distance_to_boundary(Point2 p, const FieldBoundary& boundary);

double point_segment_distance(Point2 p, Point2 a, Point2 b);

struct Cell {
  std::size_t index;
  std::size_t row;
  std::size_t col;
  Point2 center;
  bool interior;
};

/// Regular lattice of square cells. Row 0 is the southernmost row; index =
/// row * ncols + col.
class BaseGrid {
 public:
  BaseGrid() = default;
  BaseGrid(GridKey key, std::vector<std::uint8_t> interior);

  const GridKey& key() const { return key_; }
  double cell_size() const { return key_.cell_size; }
  std::size_t ncols() const { return key_.ncols; }
  std::size_t nrows() const { return key_.nrows; }
  std::size_t cell_count() const { return key_.cell_count(); }
  Point2 origin() const { return {key_.origin_x, key_.origin_y}; }

  std::size_t index(std::size_t row, std::size_t col) const { return row * key_.ncols + col; }
  std::pair<std::size_t, std::size_t> row_col(std::size_t index) const {
    return {index / key_.ncols, index % key_.ncols};
  }
  Point2 center(std::size_t index) const;
  Cell cell(std::size_t index) const;
  bool interior(std::size_t index) const { return interior_[index] != 0; }
  const std::vector<std::size_t>& interior_cells() const { return interior_cells_; }
  std::size_t interior_count() const { return interior_cells_.size(); }

  /// Cell whose square contains p (lower/left edges inclusive).
  std::optional<std::size_t> locate(Point2 p) const;

  /// Center-to-center distance computed from lattice offsets, so it does not
  /// depend on where the grid sits in the plane.
  double cell_distance(std::size_t a, std::size_t b) const;

  Surface make_surface() const { return Surface(key_); }
  BBox bbox() const;

 private:
  GridKey key_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::size_t> interior_cells_;
};

/// Grid covering boundary's bounding box with origin snapped down to
/// multiples of cell_size. A cell is interior iff its center is inside the
/// polygon and at least border_width from the boundary.
BaseGrid build_grid(const FieldBoundary& boundary, double cell_size = 10.0,
                    double border_width = 20.0);

/// Axis-aligned rectangle boundary, handy for tests and synthetic fields.
FieldBoundary rectangle(double x0, double y0, double x1, double y1);

}  // namespace zonekit::geometry
