#include "zonekit/vi.hpp"

#include <string>

#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"

namespace zonekit::vi {

namespace {

constexpr Band kNdvi[] = {Band::nir, Band::red};
constexpr Band kEvi[] = {Band::nir, Band::red, Band::blue};
constexpr Band kNdre[] = {Band::nir, Band::red_edge};
constexpr Band kGreen[] = {Band::nir, Band::green};

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

std::string_view to_string(ViKind kind) {
  switch (kind) {
    case ViKind::NDVI: return "NDVI";
    case ViKind::EVI: return "EVI";
    case ViKind::NDRE: return "NDRE";
    case ViKind::WDRVI: return "WDRVI";
    case ViKind::GCVI: return "GCVI";
    case ViKind::GNDVI: return "GNDVI";
  }
  return "?";
}

std::optional<ViKind> parse_kind(std::string_view name) {
  const std::string n = csv::lower(name);
  for (ViKind k : kAllKinds)
    if (csv::lower(to_string(k)) == n) return k;
  return std::nullopt;
}

std::span<const Band> required_bands(ViKind kind) {
  switch (kind) {
    case ViKind::NDVI:
    case ViKind::WDRVI: return kNdvi;
    case ViKind::EVI: return kEvi;
    case ViKind::NDRE: return kNdre;
    case ViKind::GCVI:
    case ViKind::GNDVI: return kGreen;
  }
  return {};
}

std::optional<double> compute_vi(ViKind kind, const BandPixel& p) {
  for (Band b : required_bands(kind))
    if (!p.has(b))
      throw SchemaError(std::string(to_string(kind)) + ": band '" + std::string(ingest::band_name(b)) +
                        "' missing");
  const double nir = p[Band::nir];
  switch (kind) {
    case ViKind::NDVI: return ratio(nir - p[Band::red], nir + p[Band::red]);
    case ViKind::EVI: {
      const double red = p[Band::red], blue = p[Band::blue];
      return ratio(2.5 * (nir - red), nir + 6.0 * red - 7.5 * blue + 1.0);
    }
    case ViKind::NDRE: return ratio(nir - p[Band::red_edge], nir + p[Band::red_edge]);
    case ViKind::WDRVI: return ratio(0.2 * nir - p[Band::red], 0.2 * nir + p[Band::red]);
    case ViKind::GCVI: {
      const auto r = ratio(nir, p[Band::green]);
      if (!r) return std::nullopt;
      return *r - 1.0;
    }
    case ViKind::GNDVI: return ratio(nir - p[Band::green], nir + p[Band::green]);
  }
  return std::nullopt;
}

Surface vi_surface(ViKind kind, std::span<const BandPixel> pixels, const geometry::BaseGrid& grid,
                   const geostat::IdwOptions& idw) {
  std::vector<geostat::SamplePoint> pts;
  pts.reserve(pixels.size());
  for (const auto& p : pixels)
    if (const auto v = compute_vi(kind, p)) pts.push_back({p.pos, *v});
  return geostat::idw(pts, grid, idw);
}

}  // namespace zonekit::vi
