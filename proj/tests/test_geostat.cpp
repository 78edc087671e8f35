#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "oracles.hpp"
#include "support.hpp"
#include "zonekit/error.hpp"
#include "zonekit/geostat.hpp"
#include "zonekit/random.hpp"

using namespace zonekit;
using namespace zonekit::geostat;

namespace {

std::vector<SamplePoint> random_points(std::size_t n, double extent, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SamplePoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({{uniform(rng, 0, extent), uniform(rng, 0, extent)}, uniform(rng, 2, 12)});
  return pts;
}

struct OracleKrige {
  double estimate;
  double variance;
};

OracleKrige oracle_krige(const std::vector<SamplePoint>& pts, const VariogramModel& m, Point2 t) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 1.0));
  std::vector<double> b(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(distance(pts[i].pos, pts[j].pos));
    b[i] = m(distance(pts[i].pos, t));
  }
  a[n][n] = 0.0;
  const auto x = zk_oracle::dense_solve(a, b);
  OracleKrige out{0.0, x[n]};
  for (std::size_t i = 0; i < n; ++i) {
    out.estimate += x[i] * pts[i].value;
    out.variance += x[i] * b[i];
  }
  return out;
}

}  // namespace

TEST(VariogramModel, ShapeAndValidation) {
  const VariogramModel m{0.42, 1.02, 180.0};
  EXPECT_EQ(m(0.0), 0.0);
  EXPECT_NEAR(m(180.0), 0.42 + 0.6 * (1.0 - std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(m(1e6), 1.02, 1e-12);
  EXPECT_GT(m(1e-9), 0.41);
  EXPECT_THROW((VariogramModel{1.0, 0.5, 10}).validate(), ConfigError);
  EXPECT_THROW((VariogramModel{0.0, 1.0, 0.0}).validate(), ConfigError);
  EXPECT_THROW((VariogramModel{-0.1, 1.0, 10.0}).validate(), ConfigError);
}

TEST(EmpiricalVariogram, TwoPoints) {
  const std::vector<SamplePoint> pts{{{0, 0}, 1.0}, {{50, 0}, 3.0}};
  const auto emp = empirical_variogram(pts, 100.0, 100.0);
  ASSERT_EQ(emp.bins.size(), 1u);
  EXPECT_EQ(emp.bins[0].semivariance, 2.0);
  EXPECT_EQ(emp.bins[0].pairs, 1u);
}

TEST(EmpiricalVariogram, ConstantFieldIsZero) {
  auto pts = random_points(60, 200, 1);
  for (auto& p : pts) p.value = 4.0;
  for (const auto& b : empirical_variogram(pts, 10, 150).bins) EXPECT_EQ(b.semivariance, 0.0);
}

TEST(EmpiricalVariogram, MatchesAllPairsOracle) {
  const auto pts = random_points(100, 300, 2);
  const double lag = 12.5, max_lag = 200.0;
  const auto nb = static_cast<std::size_t>(std::ceil(max_lag / lag));
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;  // ordered pairs, halved below
      const double d = distance(pts[i].pos, pts[j].pos);
      if (d > max_lag) continue;
      const std::size_t b = std::min(static_cast<std::size_t>(std::floor(d / lag)), nb - 1);
      const double diff = pts[i].value - pts[j].value;
      acc[b].first += diff * diff;
      acc[b].second += 1;
    }
  const auto emp = empirical_variogram(pts, lag, max_lag);
  ASSERT_EQ(emp.bins.size(), acc.size());
  std::size_t k = 0;
  for (const auto& [b, sp] : acc) {
    EXPECT_DOUBLE_EQ(emp.bins[k].lag, (b + 0.5) * lag);
    EXPECT_EQ(emp.bins[k].pairs, sp.second / 2);
    EXPECT_NEAR(emp.bins[k].semivariance, sp.first / (2.0 * sp.second), 1e-12);
    ++k;
  }
}

TEST(EmpiricalVariogram, Errors) {
  const std::vector<SamplePoint> one{{{0, 0}, 1.0}};
  EXPECT_THROW(empirical_variogram(one, 10, 100), DataError);
  const std::vector<SamplePoint> same{{{5, 5}, 1.0}, {{5, 5}, 2.0}, {{5, 5}, 3.0}};
  EXPECT_THROW(empirical_variogram(same, 10, 100), DataError);
}

namespace {

EmpiricalVariogram model_bins(const VariogramModel& m, double lag, std::size_t n) {
  EmpiricalVariogram emp;
  emp.lag_width = lag;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = (i + 0.5) * lag;
    emp.bins.push_back({h, m(h), 100 + 10 * i});
  }
  return emp;
}

}  // namespace

TEST(FitExponential, RecoversNoiselessModel) {
  const VariogramModel truth{0.42, 1.02, 180.0};
  const auto fit = fit_exponential(model_bins(truth, 10.0, 30));
  EXPECT_NEAR(fit.model.nugget / truth.nugget, 1.0, 0.05);
  EXPECT_NEAR(fit.model.sill / truth.sill, 1.0, 0.05);
  EXPECT_NEAR(fit.model.effective_range / truth.effective_range, 1.0, 0.05);
}

TEST(FitExponential, ExactModelResidualVanishes) {
  const VariogramModel truth{0.0, 1.0, 100.0};
  const auto emp = model_bins(truth, 5.0, 40);
  const auto fit = fit_exponential(emp);
  EXPECT_LT(fit.objective, 1e-8);
  EXPECT_NEAR(fit.model.effective_range, 100.0, 1.0);
  EXPECT_NEAR(fit_objective(emp, truth), 0.0, 1e-20);
}

TEST(FitExponential, FlatBinsArePureNugget) {
  EmpiricalVariogram emp;
  emp.lag_width = 10;
  for (int i = 0; i < 12; ++i) emp.bins.push_back({(i + 0.5) * 10, 0.7, 50});
  const auto fit = fit_exponential(emp);
  EXPECT_NEAR(fit.model.nugget, 0.7, 1e-3);
  EXPECT_NEAR(fit.model.sill, 0.7, 1e-3);
}

TEST(FitExponential, NeedsThreeBins) {
  EmpiricalVariogram emp;
  emp.bins = {{5, 1, 10}, {15, 2, 10}};
  EXPECT_THROW(fit_exponential(emp), DataError);
}

TEST(OrdinaryKrige, MatchesDenseSolve) {
  const std::vector<SamplePoint> pts{{{3, 4}, 7.0}, {{21, 8}, 9.5}, {{12, 27}, 6.0},
                                     {{28, 26}, 8.25}, {{5, 19}, 7.75}};
  const VariogramModel m{0.1, 1.5, 40.0};
  const auto grid = zk_test::full_grid(3, 1, 10.0);
  const auto res = ordinary_krige(pts, m, grid);
  ASSERT_TRUE(res.global_neighborhood);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto o = oracle_krige(pts, m, grid.center(c));
    EXPECT_NEAR(res.estimate[c], o.estimate, 1e-10);
    EXPECT_NEAR(res.variance[c], o.variance, 1e-10);
  }
  EXPECT_LT(res.max_weight_sum_error, 1e-12);
}

TEST(OrdinaryKrige, LocalNeighbourhoodMatchesDenseSolveOnSupport) {
  const auto pts = random_points(200, 300, 5);
  const VariogramModel m{0.2, 1.0, 90.0};
  KrigingOptions opt;
  opt.global_max = 50;
  opt.neighbors = 16;
  const OrdinaryKriger k(pts, m, opt);
  ASSERT_FALSE(k.global());
  for (Point2 t : {Point2{150, 150}, Point2{10, 290}, Point2{77, 3}}) {
    const auto p = k.predict(t);
    ASSERT_EQ(p.support.size(), 16u);
    std::vector<SamplePoint> sub;
    for (auto i : p.support) sub.push_back(k.samples()[i]);
    // The support must be the 16 nearest samples.
    double far = 0;
    for (const auto& s : sub) far = std::max(far, distance(s.pos, t));
    std::size_t closer = 0;
    for (const auto& s : k.samples()) closer += distance(s.pos, t) < far;
    EXPECT_LE(closer, 15u);
    const auto o = oracle_krige(sub, m, t);
    EXPECT_NEAR(p.estimate, o.estimate, 1e-9);
    EXPECT_NEAR(p.variance, o.variance, 1e-9);
  }
}

TEST(OrdinaryKrige, ExactAtSitesWithoutNugget) {
  const auto pts = random_points(50, 400, 11);
  const VariogramModel m{0.0, 2.0, 150.0};
  const OrdinaryKriger k(pts, m);
  for (const auto& s : pts) {
    const auto p = k.predict(s.pos);
    EXPECT_NEAR(p.estimate, s.value, 1e-8);
    EXPECT_NEAR(p.variance, 0.0, 1e-8);
  }
}

TEST(OrdinaryKrige, ConstantValuesAndNonNegativeVariance) {
  auto pts = random_points(80, 200, 4);
  for (auto& p : pts) p.value = 5.5;
  const auto grid = zk_test::full_grid(20, 20, 10.0);
  const auto res = ordinary_krige(pts, {0.3, 1.0, 60.0}, grid);
  for (std::size_t c : grid.interior_cells()) {
    EXPECT_NEAR(res.estimate[c], 5.5, 1e-9);
    EXPECT_GE(res.variance[c], 0.0);
  }
  EXPECT_LT(res.max_weight_sum_error, 1e-9);
}

TEST(OrdinaryKrige, DuplicatesAreAveraged) {
  std::vector<SamplePoint> pts{{{0, 0}, 2.0}, {{0, 0}, 4.0}, {{30, 0}, 8.0}, {{0, 30}, 6.0}};
  const OrdinaryKriger k(pts, {0.0, 1.0, 50.0});
  EXPECT_EQ(k.merged_duplicates(), 1u);
  EXPECT_EQ(k.samples().size(), 3u);
  EXPECT_NEAR(k.predict({0, 0}).estimate, 3.0, 1e-10);
}

TEST(Idw, SinglePointAndSymmetry) {
  const auto grid = zk_test::full_grid(5, 5, 10.0);
  const std::vector<SamplePoint> one{{{25, 25}, 3.5}};
  const auto s = idw(one, grid, {2.0, 30.0});
  for (std::size_t c : grid.interior_cells()) {
    if (distance(grid.center(c), {25, 25}) <= 30.0)
      EXPECT_DOUBLE_EQ(s[c], 3.5);
    else
      EXPECT_TRUE(std::isnan(s[c]));
  }
  const std::vector<SamplePoint> two{{{15, 25}, 2.0}, {{35, 25}, 4.0}};
  EXPECT_DOUBLE_EQ(idw(two, grid, {2.0, 50.0})[grid.index(2, 2)], 3.0);
}

TEST(Idw, MatchesBruteForce) {
  const auto pts = random_points(150, 200, 8);
  const auto grid = zk_test::full_grid(20, 20, 10.0);
  for (double power : {1.0, 2.0, 3.0}) {
    const auto s = idw(pts, grid, {power, 40.0});
    for (std::size_t c : grid.interior_cells()) {
      const Point2 t = grid.center(c);
      double num = 0, den = 0;
      for (const auto& p : pts) {
        const double d = distance(p.pos, t);
        if (d > 40.0) continue;
        const double w = std::pow(d, -power);
        num += w * p.value;
        den += w;
      }
      if (den == 0)
        EXPECT_TRUE(std::isnan(s[c]));
      else
        EXPECT_NEAR(s[c], num / den, 1e-12);
    }
  }
}

TEST(ConvolveMean, NineCellNeighbourhood) {
  const auto grid = zk_test::full_grid(7, 7, 10.0);
  Surface s = grid.make_surface();
  for (std::size_t c : grid.interior_cells()) s[c] = 0.0;
  s[grid.index(3, 3)] = 1.0;
  const auto out = convolve_mean(s, grid, 19.0);
  EXPECT_DOUBLE_EQ(out[grid.index(3, 3)], 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(out[grid.index(2, 2)], 1.0 / 9.0);
  EXPECT_EQ(out[grid.index(1, 3)], 0.0);
  Surface flat = grid.make_surface();
  for (std::size_t c : grid.interior_cells()) flat[c] = 2.5;
  const auto f = convolve_mean(flat, grid, 19.0);
  for (std::size_t c : grid.interior_cells()) EXPECT_DOUBLE_EQ(f[c], 2.5);
}
