#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "zonekit/error.hpp"
#include "zonekit/freqmap.hpp"
#include "zonekit/random.hpp"

using namespace zonekit;
using namespace zonekit::freq;

namespace {

const GridKey kKey{0, 0, 10, 6, 5};

std::vector<Surface> random_layers(std::size_t years, std::uint64_t seed, double missing = 0.0) {
  Rng rng(seed);
  std::vector<Surface> out;
  for (std::size_t y = 0; y < years; ++y) {
    Surface s(kKey);
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (uniform01(rng) < missing) continue;
      s[c] = static_cast<double>(static_cast<int>(uniform_index(rng, 3)) - 1);
    }
    out.push_back(s);
  }
  return out;
}

FrequencyMap single(int yf, int years) {
  FrequencyMap fm;
  fm.grid = GridKey{0, 0, 10, 1, 1};
  fm.years = years;
  fm.yf = {yf};
  fm.covered = {1};
  fm.partial = {0};
  return fm;
}

}  // namespace

TEST(Normalize, Examples) {
  Surface s(GridKey{0, 0, 10, 4, 1});
  s[0] = 2;
  s[1] = 6;
  s[2] = 10;
  const auto n = minmax_normalize(s);
  EXPECT_EQ(n[0], -1.0);
  EXPECT_EQ(n[1], 0.0);
  EXPECT_EQ(n[2], 1.0);
  EXPECT_TRUE(std::isnan(n[3]));
  Surface c(GridKey{0, 0, 10, 2, 1});
  c[0] = c[1] = 4;
  EXPECT_THROW(minmax_normalize(c), NumericalError);
}

TEST(Normalize, EndpointsExact) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    Surface s(kKey);
    for (double& v : s.values) v = uniform(rng, -1e3, 1e5);
    const auto n = minmax_normalize(s);
    EXPECT_EQ(*std::min_element(n.values.begin(), n.values.end()), -1.0);
    EXPECT_EQ(*std::max_element(n.values.begin(), n.values.end()), 1.0);
  }
}

TEST(Stack, Examples) {
  std::vector<Surface> always(10, Surface(kKey));
  for (auto& s : always) std::fill(s.values.begin(), s.values.end(), 1.0);
  EXPECT_EQ(stack_frequency(always).yf[0], 10);

  std::vector<Surface> alt;
  for (int y = 0; y < 10; ++y) {
    Surface s(kKey);
    std::fill(s.values.begin(), s.values.end(), y % 2 ? -1.0 : 1.0);
    alt.push_back(s);
  }
  EXPECT_EQ(stack_frequency(alt).yf[3], 0);

  const auto one = random_layers(1, 4);
  const auto fm = stack_frequency(one);
  for (std::size_t c = 0; c < one[0].size(); ++c) EXPECT_EQ(fm.yf[c], one[0][c]);
}

TEST(Stack, BoundsAndEqualityCondition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto layers = random_layers(10, seed, 0.05);
    const auto fm = stack_frequency(layers);
    for (std::size_t c = 0; c < fm.yf.size(); ++c) {
      EXPECT_LE(std::abs(fm.yf[c]), fm.years);
      if (std::abs(fm.yf[c]) == fm.years) {
        for (const auto& l : layers) EXPECT_EQ(l[c], fm.yf[c] > 0 ? 1.0 : -1.0);
      }
    }
  }
}

TEST(Stack, OrderOfYearsIrrelevant) {
  auto layers = random_layers(7, 11, 0.1);
  const auto a = stack_frequency(layers);
  std::reverse(layers.begin(), layers.end());
  std::swap(layers[1], layers[4]);
  const auto b = stack_frequency(layers);
  EXPECT_EQ(a.yf, b.yf);
  EXPECT_EQ(a.partial, b.partial);
  EXPECT_EQ(a.covered, b.covered);
}

TEST(Stack, PartialCoverageFlagged) {
  auto layers = random_layers(3, 2);
  layers[1][5] = kMissing;
  for (auto& l : layers) l[7] = kMissing;
  const auto fm = stack_frequency(layers);
  EXPECT_TRUE(fm.partial[5]);
  EXPECT_TRUE(fm.covered[5]);
  EXPECT_FALSE(fm.covered[7]);
  EXPECT_FALSE(fm.partial[0]);
}

TEST(Stack, Errors) {
  EXPECT_THROW(stack_frequency(std::vector<Surface>{}), DataError);
  std::vector<Surface> bad{Surface(kKey), Surface(GridKey{0, 0, 10, 5, 6})};
  EXPECT_THROW(stack_frequency(bad), DataError);
  std::vector<Surface> two{Surface(kKey)};
  two[0][0] = 2.0;
  EXPECT_THROW(stack_frequency(two), DataError);
}

TEST(Classify, Thresholds) {
  EXPECT_EQ(classify_stability(single(10, 10)).stability[0], Stability::high_stable);
  EXPECT_EQ(classify_stability(single(0, 10)).stability[0], Stability::unstable);
  EXPECT_EQ(classify_stability(single(-6, 10)).stability[0], Stability::low_stable);
  EXPECT_EQ(classify_stability(single(6, 10)).stability[0], Stability::high_stable);
  EXPECT_EQ(classify_stability(single(5, 10)).stability[0], Stability::unstable);
  EXPECT_THROW(classify_stability(single(1, 10), 0.0), ConfigError);
  EXPECT_THROW(classify_stability(single(1, 10), 1.5), ConfigError);
}

TEST(Classify, MonotoneInYf) {
  auto rank = [](Stability s) { return s == Stability::low_stable ? 0 : s == Stability::unstable ? 1 : 2; };
  for (int years : {1, 3, 7, 10}) {
    for (double frac : {0.3, 0.6, 1.0}) {
      for (int yf = -years; yf < years; ++yf) {
        const auto lo = classify_stability(single(yf, years), frac).stability[0];
        const auto hi = classify_stability(single(yf + 1, years), frac).stability[0];
        EXPECT_LE(rank(lo), rank(hi));
      }
    }
  }
}

namespace {

std::vector<ingest::CellAttributes> attrs_for(const FrequencyMap& fm, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ingest::CellAttributes> out;
  for (std::size_t c : fm.covered_cells()) {
    ingest::CellAttributes a;
    a.cell = c;
    a.altitude = uniform(rng, 80, 120);
    a.ph = 6.5;
    out.push_back(a);
  }
  return out;
}

}  // namespace

TEST(Report, SingleBinMeanAndConservation) {
  const auto fm = classify_stability(stack_frequency(random_layers(10, 5)));
  const auto attrs = attrs_for(fm, 1);
  const auto rep = attribute_report(fm, attrs, "altitude", {1, {}});
  ASSERT_EQ(rep.bins.size(), 1u);
  double mean = 0;
  for (std::size_t c : fm.covered_cells()) mean += fm.yf[c];
  mean /= static_cast<double>(fm.covered_cells().size());
  EXPECT_NEAR(rep.bins[0].mean_yf, mean, 1e-12);
  EXPECT_EQ(rep.bins[0].count, attrs.size());
  EXPECT_EQ(std::accumulate(rep.bins[0].histogram.begin(), rep.bins[0].histogram.end(), std::size_t{0}),
            attrs.size());
  EXPECT_EQ(rep.bins[0].histogram.size(), 21u);
}

TEST(Report, ConstantAttributeAndMedianSplit) {
  const auto fm = classify_stability(stack_frequency(random_layers(10, 6)));
  const auto attrs = attrs_for(fm, 2);
  const auto flat = attribute_report(fm, attrs, "ph", {4, {}});
  std::size_t populated = 0;
  for (const auto& b : flat.bins) populated += b.count > 0;
  EXPECT_EQ(populated, 1u);

  std::vector<double> alt;
  for (const auto& a : attrs) alt.push_back(*a.altitude);
  std::sort(alt.begin(), alt.end());
  const double median = alt[alt.size() / 2];
  const auto split = attribute_report(fm, attrs, "altitude", {0, {alt.front(), median, alt.back()}});
  ASSERT_EQ(split.bins.size(), 2u);
  EXPECT_EQ(split.bins[0].count + split.bins[1].count, attrs.size());
  EXPECT_EQ(split.cells, attrs.size());
  EXPECT_THROW(attribute_report(fm, attrs, "colour", {2, {}}), DataError);
}

TEST(Report, CountsConserveForRandomEdges) {
  const auto fm = classify_stability(stack_frequency(random_layers(10, 9)));
  const auto attrs = attrs_for(fm, 3);
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> edges{uniform(rng, 70, 100)};
    for (int e = 0; e < 4; ++e) edges.push_back(edges.back() + uniform(rng, 0, 10));
    const auto rep = attribute_report(fm, attrs, "altitude", {0, edges});
    std::size_t total = 0;
    for (const auto& b : rep.bins) total += b.count;
    EXPECT_EQ(total, attrs.size());
  }
}
