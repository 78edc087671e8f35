#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zonekit/config.hpp"
#include "zonekit/freqmap.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/geostat.hpp"
#include "zonekit/gwr.hpp"
#include "zonekit/lisa.hpp"
#include "zonekit/yield_clean.hpp"

namespace zonekit::pipeline {

/// Samples whose containing grid cell is interior; the rest are counted in
/// `excluded`.
std::vector<geostat::SamplePoint> interior_samples(std::span<const ingest::YieldRecord> records,
                                                   const geometry::BaseGrid& grid, std::size_t* excluded = nullptr);

/// Every k-th point with k = ceil(n / max_points), starting at the first.
std::vector<geostat::SamplePoint> stride_subsample(std::span<const geostat::SamplePoint> points,
                                                   std::size_t max_points);

struct KrigeStage {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  geostat::EmpiricalVariogram empirical;
  geostat::VariogramFit fit;
  geostat::KrigingResult kriged;
  Surface smoothed;
};

/// Border exclusion, variogram estimation and fit, ordinary kriging onto the
/// interior cells, then convolutional smoothing (skipped when the radius is 0).
KrigeStage krige_stage(std::span<const ingest::YieldRecord> cleaned, const geometry::BaseGrid& grid,
                       const config::RunConfig& config);

struct YieldSurface {
  clean::CleanResult cleaned;
  KrigeStage krige;
  const Surface& surface() const { return krige.smoothed; }
};

YieldSurface yield_surface(std::span<const ingest::YieldRecord> raw, const geometry::BaseGrid& grid,
                           const config::RunConfig& config);

struct MoranLayer {
  Surface normalized;
  lisa::LisaResult lisa;
  Surface codes;
};

/// LISA stream seed for the layer-th year.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer);

/// Min-max normalization, weights over the valid interior cells, local
/// Moran with per-layer seed, MC coding.
MoranLayer moran_layer(const Surface& yield, const geometry::BaseGrid& grid, const config::RunConfig& config,
                       std::size_t layer);

freq::FrequencyMap frequency_map(std::span<const Surface> codes, const config::RunConfig& config);

/// Stability per grid cell; cells outside the map are unstable.
std::vector<freq::Stability> predicted_zones(const freq::FrequencyMap& fm);

struct FieldRun {
  std::vector<YieldSurface> years;
  std::vector<MoranLayer> layers;
  freq::FrequencyMap frequency;
};

FieldRun run_field(std::span<const std::vector<ingest::YieldRecord>> years, const geometry::BaseGrid& grid,
                   const config::RunConfig& config);

}  // namespace zonekit::pipeline
