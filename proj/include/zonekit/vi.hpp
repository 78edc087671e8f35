#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/geostat.hpp"
#include "zonekit/ingest.hpp"

namespace zonekit::vi {

using ingest::Band;
using ingest::BandPixel;

enum class ViKind { NDVI, EVI, NDRE, WDRVI, GCVI, GNDVI };

inline constexpr ViKind kAllKinds[] = {ViKind::NDVI, ViKind::EVI,  ViKind::NDRE,
                                       ViKind::WDRVI, ViKind::GCVI, ViKind::GNDVI};

std::string_view to_string(ViKind kind);
std::optional<ViKind> parse_kind(std::string_view name);  // case-insensitive

/// Bands each index reads.
std::span<const Band> required_bands(ViKind kind);

/// Index value from surface reflectance. nullopt when the denominator is
/// exactly zero. Throws SchemaError if a required band is absent.
///   NDVI  (NIR - Red) / (NIR + Red)
///   EVI   2.5 (NIR - Red) / (NIR + 6 Red - 7.5 Blue + 1)
///   NDRE  (NIR - RedEdge) / (NIR + RedEdge)
///   WDRVI (0.2 NIR - Red) / (0.2 NIR + Red)
///   GCVI  NIR / Green - 1
///   GNDVI (NIR - Green) / (NIR + Green)
std::optional<double> compute_vi(ViKind kind, const BandPixel& pixel);

/// Index per pixel, then IDW onto the interior cells. Pixels whose index is
/// undefined are skipped.
Surface vi_surface(ViKind kind, std::span<const BandPixel> pixels, const geometry::BaseGrid& grid,
                   const geostat::IdwOptions& idw = {});

}  // namespace zonekit::vi
