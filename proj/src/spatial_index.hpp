#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "zonekit/core.hpp"

namespace zonekit::detail {

// Point index over sample positions. Query results come back sorted by
// (distance, index) so callers see a deterministic order.
class PointIndex {
 public:
  explicit PointIndex(const std::vector<Point2>& pts) : pts_(pts) {
    std::vector<Value> values;
    values.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) values.emplace_back(BPoint(pts[i].x, pts[i].y), i);
    tree_ = Tree(values.begin(), values.end());
  }

  std::vector<std::size_t> nearest(Point2 p, std::size_t k) const {
    std::vector<Value> hits;
    tree_.query(boost::geometry::index::nearest(BPoint(p.x, p.y), static_cast<unsigned>(k)), std::back_inserter(hits));
    return sorted(p, hits);
  }

  std::vector<std::size_t> within(Point2 p, double radius) const {
    std::vector<Value> hits;
    const Box box(BPoint(p.x - radius, p.y - radius), BPoint(p.x + radius, p.y + radius));
    tree_.query(boost::geometry::index::intersects(box), std::back_inserter(hits));
    std::vector<Value> inside;
    for (const auto& h : hits)
      if (distance(p, pts_[h.second]) <= radius) inside.push_back(h);
    return sorted(p, inside);
  }

 private:
  using BPoint = boost::geometry::model::point<double, 2, boost::geometry::cs::cartesian>;
  using Box = boost::geometry::model::box<BPoint>;
  using Value = std::pair<BPoint, std::size_t>;
  using Tree = boost::geometry::index::rtree<Value, boost::geometry::index::quadratic<16>>;

  std::vector<std::size_t> sorted(Point2 p, std::vector<Value>& hits) const {
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(hits.size());
    for (const auto& h : hits) keyed.emplace_back(distance(p, pts_[h.second]), h.second);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> out;
    out.reserve(keyed.size());
    for (const auto& k : keyed) out.push_back(k.second);
    return out;
  }

  std::vector<Point2> pts_;
  Tree tree_;
};

}  // namespace zonekit::detail
