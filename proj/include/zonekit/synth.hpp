#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zonekit/core.hpp"
#include "zonekit/freqmap.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/ingest.hpp"
#include "zonekit/random.hpp"

namespace zonekit::synth {

using freq::Stability;

struct PlantedZone {
  Stability kind = Stability::high_stable;
  geometry::Ring polygon;
  /// Yield offset in T/Ha: added for high-stable, subtracted for low-stable,
  /// alternating sign by year for unstable.
  double effect = 2.0;
};

struct SynthSpec {
  geometry::Ring field;
  std::vector<PlantedZone> zones;
  std::size_t years = 7;
  double base_yield = 8.0;
  std::vector<double> year_means;  // per-year base; empty means base_yield every year

  // Exponential variogram of the additive noise; all zero disables it.
  double noise_nugget = 0.0;
  double noise_sill = 0.0;  // total sill
  double noise_range = 180.0;
  double lattice_spacing = 0.0;  // coarse simulation lattice; 0 picks one

  double spike_probability = 0.0;
  double spike_factor = 1.5;
  double flag_probability = 0.0;
  double edge_factor = 0.7;
  double edge_width = 15.0;

  double swath = 10.0;
  double sample_spacing = 2.0;
  double sample_interval_s = 1.0;

  double cell_size = 10.0;
  double border = 20.0;

  std::vector<double> scene_ndvi{0.309, 0.483};  // target field means, one per scene
  double scene_noise = 0.02;
  double cloud_fraction = 0.05;

  std::optional<std::uint64_t> seed;

  /// ConfigError for a missing seed, bad probabilities or sizes, zones
  /// leaving the field or overlapping each other; GeometryError for
  /// invalid polygons.
  void validate() const;
};

/// 840 x 540 m rectangle (4000 interior cells at 10 m with a 20 m border),
/// one high-stable, one low-stable and one unstable zone, seven years,
/// moderate spatially correlated noise and logging artifacts.
SynthSpec benchmark_spec(std::uint64_t seed);

/// Same geometry without noise or artifacts.
SynthSpec zero_noise_spec(std::uint64_t seed);

struct FieldYear {
  std::size_t year = 0;
  std::vector<ingest::YieldRecord> records;
};

struct SynthField {
  geometry::FieldBoundary boundary;
  geometry::BaseGrid grid;
  std::vector<FieldYear> years;
  std::vector<Stability> truth;  // per grid cell; background is unstable
  std::vector<int> zone_of;      // per grid cell; planted zone index or -1
};

/// Correlated Gaussian noise: Cholesky simulation on a coarse lattice
/// covering bbox, bilinearly interpolated, plus independent nugget noise.
class NoiseField {
 public:
  NoiseField(const geometry::BBox& bbox, double nugget, double sill, double range, double spacing = 0.0);

  bool enabled() const { return enabled_; }
  double spacing() const { return spacing_; }
  std::size_t lattice_size() const { return static_cast<std::size_t>(factor_.rows()); }

  /// One realization evaluated at points (lattice draw and nugget from rng).
  std::vector<double> sample(std::span<const Point2> points, Rng& rng) const;

 private:
  bool enabled_ = false;
  double nugget_ = 0.0;
  double spacing_ = 0.0;
  double x0_ = 0.0, y0_ = 0.0;
  std::size_t nx_ = 0, ny_ = 0;
  Eigen::MatrixXd factor_;  // lower Cholesky factor of the lattice covariance
};

/// Serpentine combine path inside the field polygon for one year.
std::vector<Point2> combine_path(const geometry::FieldBoundary& boundary, double swath, double spacing);

SynthField generate_field_years(const SynthSpec& spec);

/// Band pixels on a cell_size lattice over the field bounding box. NDVI
/// follows the planted persistent zones plus scene noise, centered on the
/// scene's target mean over in-field pixels; red-edge is constant over 2x2
/// pixel blocks; a cloud_fraction of pixels is cloudy.
std::vector<ingest::BandPixel> generate_scene(const SynthSpec& spec, const SynthField& field,
                                              std::size_t scene);

struct ClassScore {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  double precision = 1.0;
  double recall = 1.0;
  double iou = 1.0;
};

struct RecoveryScore {
  std::array<ClassScore, 3> classes;
  const ClassScore& operator[](Stability s) const { return classes[static_cast<std::size_t>(s)]; }
};

/// Confusion counts per class over the cells where mask is nonzero (all cells
/// when mask is empty). An empty denominator scores 1. Throws DataError when
/// lengths differ.
RecoveryScore score_zone_recovery(std::span<const Stability> predicted, std::span<const Stability> truth,
                                  std::span<const std::uint8_t> mask = {});

}  // namespace zonekit::synth
