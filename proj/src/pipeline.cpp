#include "zonekit/pipeline.hpp"

#include <cmath>

#include "zonekit/error.hpp"
#include "zonekit/random.hpp"

namespace zonekit::pipeline {

std::vector<geostat::SamplePoint> interior_samples(std::span<const ingest::YieldRecord> records,
                                                   const geometry::BaseGrid& grid, std::size_t* excluded) {
  std::vector<geostat::SamplePoint> out;
  out.reserve(records.size());
  std::size_t dropped = 0;
  for (const auto& r : records) {
    const auto cell = grid.locate(r.position());
    if (cell && grid.interior(*cell)) {
      out.push_back({r.position(), r.yield});
    } else {
      ++dropped;
    }
  }
  if (excluded) *excluded = dropped;
  return out;
}

std::vector<geostat::SamplePoint> stride_subsample(std::span<const geostat::SamplePoint> points,
                                                   std::size_t max_points) {
  if (max_points == 0 || points.size() <= max_points) return {points.begin(), points.end()};
  const std::size_t stride = (points.size() + max_points - 1) / max_points;
  std::vector<geostat::SamplePoint> out;
  for (std::size_t i = 0; i < points.size(); i += stride) out.push_back(points[i]);
  return out;
}

KrigeStage krige_stage(std::span<const ingest::YieldRecord> cleaned, const geometry::BaseGrid& grid,
                       const config::RunConfig& config) {
  KrigeStage s;
  const auto points = interior_samples(cleaned, grid, &s.excluded);
  s.samples = points.size();
  if (points.size() < 2) throw DataError("fewer than two yield samples inside the interior cells");
  const auto& vg = config.variogram;
  const auto subset = stride_subsample(points, vg.max_points);
  s.empirical = geostat::empirical_variogram(subset, vg.lag_width, vg.max_lag);
  s.fit = geostat::fit_exponential(s.empirical, vg.fit);
  s.kriged = geostat::ordinary_krige(points, s.fit.model, grid, config.krige);
  s.smoothed = config.smooth_radius > 0.0 ? geostat::convolve_mean(s.kriged.estimate, grid, config.smooth_radius)
                                          : s.kriged.estimate;
  return s;
}

YieldSurface yield_surface(std::span<const ingest::YieldRecord> raw, const geometry::BaseGrid& grid,
                           const config::RunConfig& config) {
  YieldSurface y;
  y.cleaned = clean::clean_yield(raw, config.clean);
  y.krige = krige_stage(y.cleaned.records, grid, config);
  return y;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer) { return derive_seed(seed, 500 + layer); }

MoranLayer moran_layer(const Surface& yield, const geometry::BaseGrid& grid, const config::RunConfig& config,
                       std::size_t layer) {
  MoranLayer m{freq::minmax_normalize(yield), {}, Surface(yield.grid)};
  const auto weights = lisa::build_weights(grid, config.weights, &m.normalized);
  auto options = config.lisa;
  options.seed = layer_seed(config.seed, layer);
  m.lisa = lisa::local_moran(m.normalized, weights, options);
  m.codes = m.lisa.code_surface();
  return m;
}

freq::FrequencyMap frequency_map(std::span<const Surface> codes, const config::RunConfig& config) {
  return freq::classify_stability(freq::stack_frequency(codes), config.freq.stable_fraction);
}

std::vector<freq::Stability> predicted_zones(const freq::FrequencyMap& fm) {
  std::vector<freq::Stability> out(fm.yf.size(), freq::Stability::unstable);
  if (fm.stability.empty()) return out;
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (fm.covered[c]) out[c] = fm.stability[c];
  }
  return out;
}

FieldRun run_field(std::span<const std::vector<ingest::YieldRecord>> years, const geometry::BaseGrid& grid,
                   const config::RunConfig& config) {
  if (years.empty()) throw DataError("no yield years given");
  FieldRun run;
  std::vector<Surface> codes;
  for (std::size_t y = 0; y < years.size(); ++y) {
    run.years.push_back(yield_surface(years[y], grid, config));
    run.layers.push_back(moran_layer(run.years.back().surface(), grid, config, y));
    codes.push_back(run.layers.back().codes);
  }
  run.frequency = frequency_map(codes, config);
  return run;
}

}  // namespace zonekit::pipeline
