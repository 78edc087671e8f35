#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "zonekit/geostat.hpp"
#include "zonekit/gwr.hpp"
#include "zonekit/lisa.hpp"
#include "zonekit/synth.hpp"
#include "zonekit/vi.hpp"
#include "zonekit/yield_clean.hpp"

namespace zonekit::config {

struct GridSettings {
  double cell_size = 10.0;
  double border = 20.0;
};

struct VariogramSettings {
  double lag_width = 10.0;
  double max_lag = 300.0;
  std::size_t max_points = 3000;  // deterministic stride subsample above this
  geostat::FitOptions fit;
};

struct FreqSettings {
  double stable_fraction = 0.6;
  std::size_t report_bins = 10;
};

struct ViSettings {
  vi::ViKind kind = vi::ViKind::NDVI;
  double cloud_max = 0.10;
  double scale = 1.0;
  geostat::IdwOptions idw;
};

struct SynthSettings {
  std::string preset = "benchmark";  // benchmark | zero_noise
  std::optional<std::size_t> years;
  std::optional<double> base_yield;
  std::optional<double> noise_nugget;
  std::optional<double> noise_sill;
  std::optional<double> noise_range;
  std::optional<double> spike_probability;
  std::optional<double> flag_probability;
  std::optional<double> zone_effect;
  std::optional<double> cloud_fraction;

  /// Preset with overrides applied.
  synth::SynthSpec spec(std::uint64_t seed) const;
};

/// Everything a run can be configured with. Sections map one to one onto
/// the members below; CLI flags override file values.
struct RunConfig {
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  GridSettings grid;
  clean::CleaningConfig clean;
  VariogramSettings variogram;
  geostat::KrigingOptions krige;
  double smooth_radius = 19.0;
  lisa::WeightOptions weights;
  lisa::LisaOptions lisa;
  FreqSettings freq;
  ViSettings vi;
  gwr::GwrOptions gwr;
  SynthSettings synth;

  void validate() const;
};

/// INI/TOML-style text: [section] headers, key = value lines, full-line
/// '#' or ';' comments, optional double quotes around values. Unknown sections or keys
/// are ConfigErrors.
RunConfig parse(std::string_view text, const std::string& origin = "<config>");
RunConfig load(const std::string& path);

/// Complete snapshot of the effective configuration.
nlohmann::json to_json(const RunConfig& config);

}  // namespace zonekit::config
