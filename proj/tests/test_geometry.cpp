#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "zonekit/error.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/random.hpp"

using namespace zonekit;
using namespace zonekit::geometry;

namespace {

// Exhaustive per-segment minimum, written independently of the library.
double brute_distance(Point2 p, const Ring& ring) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point2 a = ring[i], b = ring[i + 1];
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::max(0.0, std::min(1.0, t));
    best = std::min(best, std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy)));
  }
  return best;
}

FieldBoundary l_shape() {
  return FieldBoundary::make({{0, 0}, {300, 0}, {300, 100}, {100, 100}, {100, 300}, {0, 300}});
}

}  // namespace

TEST(Boundary, ClosesRingAndComputesArea) {
  const auto b = FieldBoundary::make({{0, 0}, {100, 0}, {100, 50}, {0, 50}});
  EXPECT_EQ(b.ring().front(), b.ring().back());
  EXPECT_DOUBLE_EQ(b.area(), 5000.0);
  const auto bb = b.bbox();
  EXPECT_EQ(bb.max_x, 100.0);
  EXPECT_EQ(bb.max_y, 50.0);
}

TEST(Boundary, RejectsDegenerateRings) {
  EXPECT_THROW(FieldBoundary::make({{0, 0}, {1, 1}}), GeometryError);
  EXPECT_THROW(FieldBoundary::make({{0, 0}, {1, 1}, {2, 2}}), GeometryError);  // zero area
  EXPECT_THROW(FieldBoundary::make({{0, 0}, {0, 0}, {1, 0}, {1, 0}}), GeometryError);
  EXPECT_THROW(FieldBoundary::make({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), GeometryError);  // bow tie
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(FieldBoundary::make({{0, 0}, {10, 0}, {nan, 10}}), GeometryError);
}

TEST(Boundary, HoleReducesArea) {
  const auto b = FieldBoundary::make({{0, 0}, {100, 0}, {100, 100}, {0, 100}},
                                     {{{40, 40}, {60, 40}, {60, 60}, {40, 60}}});
  EXPECT_DOUBLE_EQ(b.area(), 10000.0 - 400.0);
  EXPECT_FALSE(point_in_polygon({50, 50}, b));
  EXPECT_TRUE(point_in_polygon({10, 10}, b));
}

TEST(PointInPolygon, Conventions) {
  const auto unit = rectangle(0, 0, 1, 1);
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, unit));
  EXPECT_FALSE(point_in_polygon({2.0, 0.5}, unit));
  EXPECT_FALSE(point_in_polygon({-5, -5}, unit));
  EXPECT_TRUE(point_in_polygon({0.0, 0.0}, unit));  // vertex
  EXPECT_TRUE(point_in_polygon({1.0, 0.5}, unit));  // edge
  const auto l = l_shape();
  EXPECT_TRUE(point_in_polygon({50, 250}, l));
  EXPECT_FALSE(point_in_polygon({200, 200}, l));  // in the notch
}

TEST(DistanceToBoundary, KnownValues) {
  const auto sq = rectangle(0, 0, 100, 100);
  EXPECT_DOUBLE_EQ(distance_to_boundary({50, 50}, sq), 50.0);
  EXPECT_DOUBLE_EQ(distance_to_boundary({100, 30}, sq), 0.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({5, 5}, {0, 0}, {10, 0}), 5.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({-3, 4}, {0, 0}, {10, 0}), 5.0);
}

TEST(DistanceToBoundary, MatchesExhaustiveSegmentMinimum) {
  const auto l = l_shape();
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Point2 p{uniform(rng, -50, 350), uniform(rng, -50, 350)};
    EXPECT_DOUBLE_EQ(distance_to_boundary(p, l), brute_distance(p, l.ring()));
  }
}

TEST(BuildGrid, SquareWithoutBorderTilesExactly) {
  const auto g = build_grid(rectangle(0, 0, 1000, 1000), 10.0, 0.0);
  EXPECT_EQ(g.ncols(), 100u);
  EXPECT_EQ(g.nrows(), 100u);
  EXPECT_EQ(g.interior_count(), 10000u);
}

TEST(BuildGrid, SquareWithTwentyMetreBorder) {
  const auto boundary = rectangle(0, 0, 1000, 1000);
  const auto g = build_grid(boundary, 10.0, 20.0);
  EXPECT_EQ(g.interior_count(), 9216u);
  // Independent center-distance check over every cell.
  std::size_t count = 0;
  for (std::size_t r = 0; r < 100; ++r) {
    for (std::size_t c = 0; c < 100; ++c) {
      const double x = 5.0 + 10.0 * static_cast<double>(c);
      const double y = 5.0 + 10.0 * static_cast<double>(r);
      const double d = std::min({x, y, 1000.0 - x, 1000.0 - y});
      count += d >= 20.0;
    }
  }
  EXPECT_EQ(count, 9216u);
}

TEST(BuildGrid, OriginSnapsToCellMultiples) {
  const auto g = build_grid(rectangle(503.0, 1207.5, 611.0, 1300.0), 10.0, 0.0);
  EXPECT_EQ(g.origin().x, 500.0);
  EXPECT_EQ(g.origin().y, 1200.0);
  EXPECT_EQ(g.ncols(), 12u);
  EXPECT_EQ(g.nrows(), 10u);
}

TEST(BuildGrid, InteriorMonotoneInBorderWidth) {
  const auto l = l_shape();
  const std::vector<double> borders{0.0, 5.0, 10.0, 20.0, 35.0};
  for (std::size_t i = 1; i < borders.size(); ++i) {
    const auto wide = build_grid(l, 10.0, borders[i]);
    const auto narrow = build_grid(l, 10.0, borders[i - 1]);
    for (std::size_t c = 0; c < wide.cell_count(); ++c) {
      if (wide.interior(c)) EXPECT_TRUE(narrow.interior(c));
    }
  }
}

TEST(BuildGrid, InteriorAreaBoundedByPolygonArea) {
  for (double border : {0.0, 20.0}) {
    const auto l = l_shape();
    const auto g = build_grid(l, 10.0, border);
    EXPECT_LE(static_cast<double>(g.interior_count()) * 100.0, l.area());
  }
}

TEST(BuildGrid, IndexRoundTripAndLocate) {
  const auto g = build_grid(l_shape(), 10.0, 20.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto [r, c] = g.row_col(i);
    EXPECT_EQ(g.index(r, c), i);
    EXPECT_EQ(g.locate(g.center(i)), i);
  }
  EXPECT_FALSE(g.locate({-100.0, -100.0}));
  EXPECT_EQ(g.cell_distance(g.index(0, 0), g.index(3, 4)), 50.0);
}

TEST(BuildGrid, RejectsBadParameters) {
  EXPECT_THROW(build_grid(rectangle(0, 0, 10, 10), 0.0, 0.0), Error);
  EXPECT_THROW(build_grid(rectangle(0, 0, 10, 10), 10.0, -1.0), Error);
}
