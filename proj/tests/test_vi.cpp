#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "zonekit/error.hpp"
#include "zonekit/random.hpp"
#include "zonekit/vi.hpp"

using namespace zonekit;
using namespace zonekit::vi;

namespace {

BandPixel pixel(double blue, double green, double red, double edge, double nir) {
  BandPixel p;
  p[Band::blue] = blue;
  p[Band::green] = green;
  p[Band::red] = red;
  p[Band::red_edge] = edge;
  p[Band::nir] = nir;
  return p;
}

double value(ViKind k, const BandPixel& p) { return *compute_vi(k, p); }

}  // namespace

TEST(Vi, WorkedValues) {
  EXPECT_NEAR(value(ViKind::NDVI, pixel(0, 0, 0.1, 0, 0.5)), 0.4 / 0.6, 1e-15);
  EXPECT_EQ(value(ViKind::NDVI, pixel(0, 0, 0.3, 0, 0.3)), 0.0);
  EXPECT_NEAR(value(ViKind::WDRVI, pixel(0, 0, 0.1, 0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(value(ViKind::GCVI, pixel(0, 0.2, 0, 0, 0.6)), 2.0, 1e-15);
  EXPECT_NEAR(value(ViKind::EVI, pixel(0.05, 0, 0.1, 0, 0.5)), 2.5 * 0.4 / (0.5 + 0.6 - 0.375 + 1), 1e-15);
}

TEST(Vi, RequiredBands) {
  auto set = [](ViKind k) {
    std::vector<Band> v(required_bands(k).begin(), required_bands(k).end());
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(set(ViKind::NDVI), (std::vector<Band>{Band::red, Band::nir}));
  EXPECT_EQ(set(ViKind::EVI), (std::vector<Band>{Band::blue, Band::red, Band::nir}));
  EXPECT_EQ(set(ViKind::NDRE), (std::vector<Band>{Band::red_edge, Band::nir}));
  EXPECT_EQ(set(ViKind::WDRVI), (std::vector<Band>{Band::red, Band::nir}));
  EXPECT_EQ(set(ViKind::GCVI), (std::vector<Band>{Band::green, Band::nir}));
  EXPECT_EQ(set(ViKind::GNDVI), (std::vector<Band>{Band::green, Band::nir}));
}

TEST(Vi, MissingBandIsSchemaErrorZeroDenominatorIsMissing) {
  BandPixel p;
  p[Band::nir] = 0.4;
  EXPECT_THROW(compute_vi(ViKind::NDVI, p), SchemaError);
  EXPECT_FALSE(compute_vi(ViKind::NDVI, pixel(0, 0, 0, 0, 0)));
  EXPECT_FALSE(compute_vi(ViKind::GCVI, pixel(0, 0, 0, 0, 0.5)));
}

TEST(Vi, ParseKind) {
  EXPECT_EQ(parse_kind("ndvi"), ViKind::NDVI);
  EXPECT_EQ(parse_kind("GnDvI"), ViKind::GNDVI);
  EXPECT_FALSE(parse_kind("savi"));
  for (ViKind k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
}

TEST(Vi, RangeScaleAndMonotonicity) {
  Rng rng(12);
  const ViKind bounded[] = {ViKind::NDVI, ViKind::NDRE, ViKind::GNDVI, ViKind::WDRVI};
  const ViKind scale_free[] = {ViKind::NDVI, ViKind::NDRE, ViKind::GNDVI, ViKind::GCVI, ViKind::WDRVI};
  std::size_t evi_changed = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto p = pixel(uniform(rng, 0.001, 1), uniform(rng, 0.001, 1), uniform(rng, 0.001, 1),
                         uniform(rng, 0.001, 1), uniform(rng, 0.001, 1));
    for (ViKind k : bounded) {
      const double v = value(k, p);
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
    const double c = uniform(rng, 0.05, 20);
    auto q = p;
    for (double& b : q.bands) b *= c;
    for (ViKind k : scale_free) ASSERT_NEAR(value(k, q), value(k, p), 1e-12 * (1 + std::abs(value(k, p))));
    const auto e1 = compute_vi(ViKind::EVI, p), e2 = compute_vi(ViKind::EVI, q);
    if (e1 && e2 && std::abs(*e1 - *e2) > 1e-9) ++evi_changed;
    auto r = p;
    r[Band::nir] += uniform(rng, 1e-3, 0.5);
    ASSERT_GT(value(ViKind::NDVI, r), value(ViKind::NDVI, p));
  }
  EXPECT_GT(evi_changed, 99000u);
}

TEST(ViSurface, UniformPixelsAndEmptyInput) {
  const auto grid = zk_test::full_grid(6, 6);
  std::vector<BandPixel> px;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    auto p = pixel(0, 0, 0.1, 0, 0.5);
    p.pos = grid.center(c);
    px.push_back(p);
  }
  const auto s = vi_surface(ViKind::NDVI, px, grid);
  for (std::size_t c : grid.interior_cells()) EXPECT_NEAR(s[c], 2.0 / 3.0, 1e-15);
  const auto empty = vi_surface(ViKind::NDVI, std::vector<BandPixel>{}, grid);
  EXPECT_EQ(empty.count_valid(), 0u);
}
