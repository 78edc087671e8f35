#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <set>

#include "zonekit/core.hpp"
#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"
#include "zonekit/parallel.hpp"
#include "zonekit/random.hpp"

using namespace zonekit;

TEST(Csv, HeaderRowsQuotesAndLineEndings) {
  const auto t = csv::parse("\xEF\xBB\xBFname,value\r\n\"a, b\",1\r\n\r\n  c  , 2 \n", "mem");
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[0], "name");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].fields[0], "a, b");
  EXPECT_EQ(t.rows[1].fields[0], "c");
  EXPECT_EQ(t.rows[1].fields[1], "2");
  EXPECT_EQ(t.rows[1].line, 4u);
  EXPECT_EQ(t.column("VALUE"), 1u);
  EXPECT_FALSE(t.column("missing"));
  EXPECT_THROW(t.require_column("missing", "mem"), SchemaError);
}

TEST(Csv, EmptyTextHasNoHeader) { EXPECT_THROW(csv::parse("", "mem"), IoError); }

TEST(Csv, MissingFileIsIoError) { EXPECT_THROW(csv::read("/nonexistent/zonekit.csv"), IoError); }

TEST(Csv, NumberParsing) {
  EXPECT_EQ(csv::parse_double("1.5"), 1.5);
  EXPECT_EQ(csv::parse_double("+2"), 2.0);
  EXPECT_EQ(csv::parse_double("-3e2"), -300.0);
  EXPECT_FALSE(csv::parse_double("abc"));
  EXPECT_FALSE(csv::parse_double("1.5x"));
  EXPECT_FALSE(csv::parse_double(""));
  EXPECT_EQ(csv::parse_int("42"), 42);
  EXPECT_FALSE(csv::parse_int("4.2"));
  EXPECT_EQ(csv::parse_flag("TRUE"), true);
  EXPECT_EQ(csv::parse_flag("0"), false);
  EXPECT_FALSE(csv::parse_flag("maybe"));
}

TEST(Csv, FormatDoubleRoundTrips) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(uniform_index(rng, 20)) - 10);
    EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(kMissing), "");
  EXPECT_EQ(csv::format_double(-0.0), "0");
  EXPECT_EQ(csv::format_double(0.1), "0.1");
}

TEST(Random, DerivedSeedsDifferAndRepeat) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(11, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
  EXPECT_NE(derive_seed(3, 4), derive_seed(4, 3));
}

TEST(Random, UniformIndexCoversRangeEvenly) {
  Rng rng(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = uniform_index(rng, 7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Random, NormalMoments) {
  Rng rng(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Random, StreamIsReproducible) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(uniform01(a), uniform01(b));
}

TEST(Summary, PopulationStatisticsSkipMissing) {
  const std::vector<double> v{2.0, kMissing, 4.0, 6.0};
  const auto s = summarize(v);
  EXPECT_EQ(s.count, 3u);
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  EXPECT_DOUBLE_EQ(s.stdev, std::sqrt(8.0 / 3.0));
  EXPECT_EQ(s.min, 2.0);
  EXPECT_EQ(s.max, 6.0);
  EXPECT_EQ(summarize(std::vector<double>{}).count, 0u);
}

TEST(Surface, ValidCells) {
  Surface s(GridKey{0, 0, 10, 3, 2});
  EXPECT_EQ(s.size(), 6u);
  EXPECT_EQ(s.count_valid(), 0u);
  s[1] = 3.0;
  s[4] = 0.0;
  EXPECT_EQ(s.valid_cells(), (std::vector<std::size_t>{1, 4}));
  Surface other(GridKey{0, 0, 10, 2, 3});
  EXPECT_THROW(require_same_grid(s, other, "x"), DataError);
}

TEST(Errors, ExitCodes) {
  EXPECT_EQ(exit_code(ErrorKind::usage), 1);
  EXPECT_EQ(exit_code(ErrorKind::config), 1);
  EXPECT_EQ(exit_code(ErrorKind::io), 2);
  EXPECT_EQ(exit_code(ErrorKind::schema), 2);
  EXPECT_EQ(exit_code(ErrorKind::geometry), 2);
  EXPECT_EQ(exit_code(ErrorKind::data), 2);
  EXPECT_EQ(exit_code(ErrorKind::numerical), 3);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  std::vector<double> serial(1000), threaded(1000);
  set_thread_count(1);
  parallel_for(serial.size(), [&](std::size_t i) { serial[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(4);
  parallel_for(threaded.size(), [&](std::size_t i) { threaded[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(1);
  EXPECT_EQ(serial, threaded);
}

TEST(Parallel, RethrowsWorkerException) {
  set_thread_count(3);
  EXPECT_THROW(parallel_for(100, [](std::size_t i) {
                 if (i == 57) throw DataError("boom");
               }),
               DataError);
  set_thread_count(1);
}
