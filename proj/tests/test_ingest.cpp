#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "zonekit/error.hpp"
#include "zonekit/ingest.hpp"

using namespace zonekit;
using namespace zonekit::ingest;
using zk_test::TempDir;
using zk_test::write_file;

TEST(Timestamp, ParsesOffsetsAndFractions) {
  const auto a = parse_timestamp("2019-08-14T10:31:02.250Z");
  ASSERT_TRUE(a);
  EXPECT_EQ(format_timestamp(*a), "2019-08-14T10:31:02.250Z");
  const auto b = parse_timestamp("2019-08-14T12:31:02.250+02:00");
  ASSERT_TRUE(b);
  EXPECT_EQ(*a, *b);
  const auto c = parse_timestamp("2019-08-14");
  ASSERT_TRUE(c);
  EXPECT_EQ(format_timestamp(*c), "2019-08-14T00:00:00.000Z");
  EXPECT_FALSE(parse_timestamp("2019-13-01"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(YieldCsv, WellFormedFile) {
  TempDir dir("ingest");
  const auto path = dir.file("y.csv");
  write_file(path,
             "timestamp,x,y,yield,flag\n"
             "2019-08-01T09:00:00Z,1,2,8.5,0\n"
             "2019-08-01T09:00:01Z,3,4,9.0,1\n"
             "2019-08-01T09:00:02Z,5,6,7.5,false\n");
  const auto parsed = read_yield_csv(path);
  EXPECT_EQ(parsed.records.size(), 3u);
  EXPECT_TRUE(parsed.report.clean());
  EXPECT_TRUE(parsed.records[1].flagged);
  EXPECT_EQ(parsed.records[2].x, 5.0);
}

TEST(YieldCsv, BadRowIsReportedNotFatal) {
  TempDir dir("ingest");
  const auto path = dir.file("y.csv");
  write_file(path,
             "timestamp,x,y,yield,flag\n"
             "2019-08-01T09:00:00Z,1,2,8.5,0\n"
             "2019-08-01T09:00:01Z,3,4,abc,0\n"
             "2019-08-01T09:00:02Z,5,6,7.5,0\n");
  const auto parsed = read_yield_csv(path);
  EXPECT_EQ(parsed.records.size(), 2u);
  ASSERT_EQ(parsed.report.issues.size(), 1u);
  EXPECT_EQ(parsed.report.issues[0].line, 3u);
}

TEST(YieldCsv, HeaderOnlyAndSchemaErrors) {
  TempDir dir("ingest");
  write_file(dir.file("empty.csv"), "timestamp,x,y,yield,flag\n");
  EXPECT_TRUE(read_yield_csv(dir.file("empty.csv")).records.empty());
  write_file(dir.file("nocol.csv"), "timestamp,x,y,flag\n2019-08-01,1,2,0\n");
  EXPECT_THROW(read_yield_csv(dir.file("nocol.csv")), SchemaError);
  EXPECT_THROW(read_yield_csv(dir.file("absent.csv")), IoError);
}

TEST(YieldCsv, WriteReadRoundTrip) {
  TempDir dir("ingest");
  std::vector<YieldRecord> recs;
  for (int i = 0; i < 20; ++i) {
    YieldRecord r;
    r.timestamp = *parse_timestamp("2020-01-01T00:00:00Z") + std::chrono::milliseconds(1250 * i);
    r.x = 500000.125 + i * 0.1;
    r.y = 200000.0 - i / 3.0;
    r.yield = 8.0 + i / 7.0;
    r.flagged = i % 5 == 0;
    recs.push_back(r);
  }
  write_yield_csv(dir.file("rt.csv"), recs);
  EXPECT_EQ(read_yield_csv(dir.file("rt.csv")).records, recs);
}

TEST(BandRaster, RequestedBandsAndCloudDefault) {
  TempDir dir("ingest");
  write_file(dir.file("b.csv"), "x,y,NIR,Red\n0,0,0.5,0.1\n10,0,0.6,0.2\n");
  const Band want[] = {Band::nir, Band::red};
  const auto parsed = read_band_raster(dir.file("b.csv"), want);
  ASSERT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(parsed.records[0][Band::nir], 0.5);
  EXPECT_EQ(parsed.records[1][Band::red], 0.2);
  EXPECT_EQ(parsed.records[0].cloud_probability, 0.0);
  EXPECT_FALSE(parsed.records[0].has(Band::green));
  const Band edge[] = {Band::red_edge};
  EXPECT_THROW(read_band_raster(dir.file("b.csv"), edge), SchemaError);
}

TEST(BandRaster, ScaleFactorAppliesToBands) {
  TempDir dir("ingest");
  write_file(dir.file("b.csv"), "x,y,nir,red,cloud_probability\n0,0,5000,1000,0.2\n");
  const Band want[] = {Band::nir, Band::red};
  const auto parsed = read_band_raster(dir.file("b.csv"), want, 1e-4);
  EXPECT_DOUBLE_EQ(parsed.records[0][Band::nir], 0.5);
  EXPECT_DOUBLE_EQ(parsed.records[0].cloud_probability, 0.2);
}

TEST(CloudFilter, StrictThreshold) {
  std::vector<BandPixel> px(4);
  const double probs[] = {0.0, 0.05, 0.10, 0.5};
  for (int i = 0; i < 4; ++i) px[i].cloud_probability = probs[i];
  const auto kept = cloud_filter(px, 0.10);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].cloud_probability, 0.05);
  for (auto& p : px) p.cloud_probability = 0.0;
  EXPECT_EQ(cloud_filter(px).size(), 4u);
  for (auto& p : px) p.cloud_probability = 1.0;
  EXPECT_TRUE(cloud_filter(px).empty());
}

TEST(Attributes, TextureAndAspectChecks) {
  TempDir dir("ingest");
  write_file(dir.file("a.csv"),
             "cell,clay,silt,sand,aspect,altitude\n"
             "0,20,30,50,90,100\n"
             "1,20,30,10,90,101\n"
             "2,20,30,50,400,102\n"
             "3,,,,,103\n");
  const auto parsed = read_attributes_csv(dir.file("a.csv"));
  EXPECT_EQ(parsed.report.issues.size(), 2u);
  ASSERT_FALSE(parsed.records.empty());
  EXPECT_EQ(parsed.records.front().get("altitude"), 100.0);
  EXPECT_THROW(parsed.records.front().get("colour"), DataError);
  EXPECT_FALSE(parsed.records.back().clay);
}

TEST(Boundary, GeoJsonRoundTrip) {
  TempDir dir("ingest");
  const auto b = geometry::FieldBoundary::make({{0, 0}, {120, 0}, {120, 80}, {0, 80}},
                                               {{{10, 10}, {20, 10}, {20, 20}, {10, 20}}});
  write_boundary_geojson(dir.file("b.geojson"), b);
  const auto back = read_boundary_geojson(dir.file("b.geojson"));
  EXPECT_EQ(back.ring(), b.ring());
  ASSERT_EQ(back.holes().size(), 1u);
  EXPECT_DOUBLE_EQ(back.area(), b.area());
}

TEST(Boundary, GeoJsonVariants) {
  const auto feature = parse_boundary_geojson(
      R"({"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,10],[0,0]]]}})");
  EXPECT_DOUBLE_EQ(feature.area(), 100.0);
  const auto fc = parse_boundary_geojson(
      R"({"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[5,0],[5,5],[0,0]]]}}]})");
  EXPECT_DOUBLE_EQ(fc.area(), 12.5);
  EXPECT_THROW(parse_boundary_geojson(R"({"type":"Point","coordinates":[0,0]})"), SchemaError);
  EXPECT_THROW(parse_boundary_geojson("{not json"), IoError);
}

TEST(GridCsv, RoundTrip) {
  TempDir dir("ingest");
  const auto grid =
      geometry::build_grid(geometry::rectangle(500003, 200001, 500250, 200180), 10.0, 20.0);
  write_grid_csv(dir.file("g.csv"), grid);
  const auto back = read_grid_csv(dir.file("g.csv"));
  EXPECT_EQ(back.key(), grid.key());
  EXPECT_EQ(back.interior_cells(), grid.interior_cells());
}

TEST(SurfaceCsv, ColumnSelection) {
  TempDir dir("ingest");
  const auto grid = zk_test::full_grid(3, 2);
  write_file(dir.file("s.csv"), "cell,YF,other\n0,4,1.5\n5,-2,2.5\n");
  const auto yf = read_surface_csv(dir.file("s.csv"), grid);
  EXPECT_EQ(yf[0], 4.0);
  EXPECT_EQ(yf[5], -2.0);
  EXPECT_TRUE(std::isnan(yf[1]));
  EXPECT_EQ(read_surface_csv(dir.file("s.csv"), grid, "other")[5], 2.5);
  write_file(dir.file("bad.csv"), "cell,value\n9,1\n");
  EXPECT_THROW(read_surface_csv(dir.file("bad.csv"), grid), SchemaError);
}
