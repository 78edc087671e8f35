#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"

namespace zonekit::ingest {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// ISO-8601 date-time: YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM].
/// A missing offset means UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// UTC, millisecond precision: 2019-08-14T10:31:02.250Z
std::string format_timestamp(Timestamp t);

struct YieldRecord {
  Timestamp timestamp{};
  double x = 0.0;
  double y = 0.0;
  double yield = 0.0;  // T/Ha
  bool flagged = false;

  Point2 position() const { return {x, y}; }
  friend bool operator==(const YieldRecord&, const YieldRecord&) = default;
};

struct ParseIssue {
  std::size_t line;
  std::string reason;
};

struct ParseReport {
  std::size_t rows = 0;  // data rows seen
  std::vector<ParseIssue> issues;
  bool clean() const { return issues.empty(); }
};

template <class T>
struct Parsed {
  std::vector<T> records;
  ParseReport report;
};

/// Columns: timestamp, x, y, yield, flag (any order, extra columns ignored).
Parsed<YieldRecord> read_yield_csv(const std::string& path);
void write_yield_csv(const std::string& path, std::span<const YieldRecord> records);

enum class Band : std::size_t { blue, green, red, red_edge, nir };
inline constexpr std::size_t kBandCount = 5;

std::string_view band_name(Band b);
/// Accepts blue, green, red, rededge/red_edge, nir (case-insensitive).
std::optional<Band> parse_band(std::string_view name);

struct BandPixel {
  Point2 pos;
  std::array<double, kBandCount> bands{kMissing, kMissing, kMissing, kMissing, kMissing};
  double cloud_probability = 0.0;

  bool has(Band b) const { return !std::isnan(bands[static_cast<std::size_t>(b)]); }
  double operator[](Band b) const { return bands[static_cast<std::size_t>(b)]; }
  double& operator[](Band b) { return bands[static_cast<std::size_t>(b)]; }
};

/// Pixel dump with x, y, one column per band and optional cloud_probability
/// (defaults to 0 when the column is absent). Band values are multiplied by
/// `scale` (use e.g. 1e-4 for Sentinel-2 L2A digital numbers). A requested
/// band missing from the header is a SchemaError.
Parsed<BandPixel> read_band_raster(const std::string& path, std::span<const Band> bands,
                                   double scale = 1.0);
void write_band_raster(const std::string& path, std::span<const BandPixel> pixels,
                       std::span<const Band> bands);

/// Keeps pixels with cloud_probability strictly below max_probability.
std::vector<BandPixel> cloud_filter(std::span<const BandPixel> pixels,
                                    double max_probability = 0.10);

struct CellAttributes {
  std::size_t cell = 0;
  std::optional<double> clay, silt, sand;        // percent
  std::optional<double> phosphorus, potassium, magnesium;  // mg/l
  std::optional<double> ph;
  std::optional<double> ec;         // mS/m
  std::optional<double> slope;      // degrees
  std::optional<double> altitude;   // m
  std::optional<double> curvature;  // 1/m
  std::optional<double> aspect;     // degrees from north, [0, 360)

  /// Value by attribute name (see attribute_names()); nullopt when absent.
  /// Throws DataError for an unknown name.
  std::optional<double> get(std::string_view name) const;
  std::optional<double>* slot(std::string_view name);
};

std::span<const std::string_view> attribute_names();

/// Columns: cell plus any of attribute_names(). Rows violating the texture
/// sum (clay + silt + sand in [99, 101]) or aspect range are reported.
Parsed<CellAttributes> read_attributes_csv(const std::string& path);
void write_attributes_csv(const std::string& path, std::span<const CellAttributes> rows);

/// GeoJSON Polygon, Feature or FeatureCollection (first feature). Coordinates
/// must already be planar meters.
geometry::FieldBoundary read_boundary_geojson(const std::string& path);
geometry::FieldBoundary parse_boundary_geojson(std::string_view text);
void write_boundary_geojson(const std::string& path, const geometry::FieldBoundary& boundary);

/// Grid CSV: index,row,col,center_x,center_y,interior
geometry::BaseGrid read_grid_csv(const std::string& path);
void write_grid_csv(const std::string& path, const geometry::BaseGrid& grid);

/// Surface CSV with a `cell` column. `column` selects the value column; when
/// empty the first of value, YF, MC is used.
Surface read_surface_csv(const std::string& path, const geometry::BaseGrid& grid,
                         std::string_view column = {});

}  // namespace zonekit::ingest
