#include "zonekit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"

namespace zonekit::config {

namespace {

namespace pt = boost::property_tree;

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  std::string where(const std::string& key) const { return name_ + "." + key; }

  template <class Handler>
  void each(Handler&& handle) const {
    for (const auto& [key, node] : tree_) {
      if (!node.empty()) throw ConfigError("nested keys are not supported: " + where(key));
      handle(csv::lower(key), unquote(node.data()));
    }
  }

  double number(const std::string& key, const std::string& value) const {
    const auto v = csv::parse_double(value);
    if (!v) throw ConfigError("not a number: " + where(key) + " = " + value);
    return *v;
  }

  std::size_t count(const std::string& key, const std::string& value) const {
    const auto v = csv::parse_int(value);
    if (!v || *v < 0) throw ConfigError("not a non-negative integer: " + where(key) + " = " + value);
    return static_cast<std::size_t>(*v);
  }

  [[noreturn]] void unknown(const std::string& key) const { throw ConfigError("unknown config key: " + where(key)); }

 private:
  std::string name_;
  const pt::ptree& tree_;
};

void apply(RunConfig& c, const std::string& section, const Section& s) {
  if (section == "run") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "seed") c.seed = s.count(k, v);
      else if (k == "threads") c.threads = static_cast<unsigned>(s.count(k, v));
      else s.unknown(k);
    });
  } else if (section == "grid") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "cell_size") c.grid.cell_size = s.number(k, v);
      else if (k == "border") c.grid.border = s.number(k, v);
      else s.unknown(k);
    });
  } else if (section == "clean") {
    s.each([&](const std::string& k, const std::string& v) {
      auto& cl = c.clean;
      if (k == "yield_min") cl.yield_min = s.number(k, v);
      else if (k == "yield_max") cl.yield_max = s.number(k, v);
      else if (k == "zscore_limit") cl.zscore_limit = s.number(k, v);
      else if (k == "hampel_window") cl.hampel_window = s.count(k, v);
      else if (k == "hampel_nsigma") cl.hampel_nsigma = s.number(k, v);
      else if (k == "hampel_min_rel_scale") cl.hampel_min_rel_scale = s.number(k, v);
      else if (k == "ma_window") cl.ma_window = s.count(k, v);
      else s.unknown(k);
    });
  } else if (section == "variogram") {
    s.each([&](const std::string& k, const std::string& v) {
      auto& vg = c.variogram;
      if (k == "lag_width") vg.lag_width = s.number(k, v);
      else if (k == "max_lag") vg.max_lag = s.number(k, v);
      else if (k == "max_points") vg.max_points = s.count(k, v);
      else if (k == "max_iterations") vg.fit.max_iterations = s.count(k, v);
      else if (k == "restarts") vg.fit.restarts = s.count(k, v);
      else if (k == "ftol") vg.fit.ftol = s.number(k, v);
      else s.unknown(k);
    });
  } else if (section == "krige") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "global_max") c.krige.global_max = s.count(k, v);
      else if (k == "neighbors") c.krige.neighbors = s.count(k, v);
      else s.unknown(k);
    });
  } else if (section == "smooth") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "radius") c.smooth_radius = s.number(k, v);
      else s.unknown(k);
    });
  } else if (section == "lisa") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "permutations") c.lisa.permutations = s.count(k, v);
      else if (k == "alpha") c.lisa.alpha = s.number(k, v);
      else if (k == "band") c.weights.band = s.number(k, v);
      else if (k == "weights") {
        const auto w = csv::lower(v);
        if (w == "queen") c.weights.scheme = lisa::WeightScheme::queen;
        else if (w == "distance_band") c.weights.scheme = lisa::WeightScheme::distance_band;
        else throw ConfigError("lisa.weights must be queen or distance_band");
      } else s.unknown(k);
    });
  } else if (section == "freq") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "stable_fraction") c.freq.stable_fraction = s.number(k, v);
      else if (k == "report_bins") c.freq.report_bins = s.count(k, v);
      else s.unknown(k);
    });
  } else if (section == "vi") {
    s.each([&](const std::string& k, const std::string& v) {
      if (k == "index") {
        const auto kind = vi::parse_kind(v);
        if (!kind) throw ConfigError("unknown vegetation index: " + v);
        c.vi.kind = *kind;
      } else if (k == "cloud_max") c.vi.cloud_max = s.number(k, v);
      else if (k == "scale") c.vi.scale = s.number(k, v);
      else if (k == "idw_power") c.vi.idw.power = s.number(k, v);
      else if (k == "idw_radius") c.vi.idw.radius = s.number(k, v);
      else s.unknown(k);
    });
  } else if (section == "gwr") {
    s.each([&](const std::string& k, const std::string& v) {
      auto& g = c.gwr;
      if (k == "bandwidth") g.bandwidth = s.number(k, v);
      else if (k == "b_min") g.b_min = s.number(k, v);
      else if (k == "b_max") g.b_max = s.number(k, v);
      else if (k == "tol") g.tol = s.number(k, v);
      else if (k == "objective") {
        const auto o = csv::lower(v);
        if (o == "cv") g.objective = gwr::Objective::cv;
        else if (o == "aicc") g.objective = gwr::Objective::aicc;
        else throw ConfigError("gwr.objective must be cv or aicc");
      } else if (k == "ratio_threshold") g.zones.ratio_threshold = s.number(k, v);
      else if (k == "r2_min") g.zones.r2_min = s.number(k, v);
      else if (k == "yf_name") g.zones.yf_name = v;
      else if (k == "prior_name") g.zones.prior_name = v;
      else s.unknown(k);
    });
  } else if (section == "synth") {
    s.each([&](const std::string& k, const std::string& v) {
      auto& sy = c.synth;
      if (k == "preset") sy.preset = csv::lower(v);
      else if (k == "years") sy.years = s.count(k, v);
      else if (k == "base_yield") sy.base_yield = s.number(k, v);
      else if (k == "noise_nugget") sy.noise_nugget = s.number(k, v);
      else if (k == "noise_sill") sy.noise_sill = s.number(k, v);
      else if (k == "noise_range") sy.noise_range = s.number(k, v);
      else if (k == "spike_probability") sy.spike_probability = s.number(k, v);
      else if (k == "flag_probability") sy.flag_probability = s.number(k, v);
      else if (k == "zone_effect") sy.zone_effect = s.number(k, v);
      else if (k == "cloud_fraction") sy.cloud_fraction = s.number(k, v);
      else s.unknown(k);
    });
  } else {
    throw ConfigError("unknown config section: [" + section + "]");
  }
}

}  // namespace

synth::SynthSpec SynthSettings::spec(std::uint64_t seed) const {
  synth::SynthSpec s;
  if (preset == "benchmark") s = synth::benchmark_spec(seed);
  else if (preset == "zero_noise") s = synth::zero_noise_spec(seed);
  else throw ConfigError("synth.preset must be benchmark or zero_noise");
  if (years) {
    s.years = *years;
    if (s.year_means.size() != s.years) s.year_means.clear();
  }
  if (base_yield) {
    s.base_yield = *base_yield;
    s.year_means.clear();
  }
  if (noise_nugget) s.noise_nugget = *noise_nugget;
  if (noise_sill) s.noise_sill = *noise_sill;
  if (noise_range) s.noise_range = *noise_range;
  if (spike_probability) s.spike_probability = *spike_probability;
  if (flag_probability) s.flag_probability = *flag_probability;
  if (cloud_fraction) s.cloud_fraction = *cloud_fraction;
  if (zone_effect) {
    for (auto& z : s.zones) z.effect = *zone_effect;
  }
  return s;
}

void RunConfig::validate() const {
  if (!(grid.cell_size > 0.0) || !(grid.border >= 0.0)) throw ConfigError("grid needs cell_size > 0 and border >= 0");
  clean.validate();
  if (!(variogram.lag_width > 0.0) || !(variogram.max_lag > variogram.lag_width)) {
    throw ConfigError("variogram needs lag_width > 0 and max_lag > lag_width");
  }
  if (variogram.max_points < 10) throw ConfigError("variogram.max_points must be at least 10");
  if (krige.neighbors < 3) throw ConfigError("krige.neighbors must be at least 3");
  if (!(smooth_radius >= 0.0)) throw ConfigError("smooth.radius must be non-negative");
  if (lisa.permutations == 0) throw ConfigError("lisa.permutations must be positive");
  if (!(lisa.alpha > 0.0 && lisa.alpha < 1.0)) throw ConfigError("lisa.alpha must lie in (0, 1)");
  if (!(weights.band > 0.0)) throw ConfigError("lisa.band must be positive");
  if (!(freq.stable_fraction > 0.0 && freq.stable_fraction <= 1.0)) {
    throw ConfigError("freq.stable_fraction must lie in (0, 1]");
  }
  if (freq.report_bins == 0) throw ConfigError("freq.report_bins must be positive");
  if (!(vi.cloud_max > 0.0 && vi.cloud_max <= 1.0)) throw ConfigError("vi.cloud_max must lie in (0, 1]");
  if (!(vi.scale > 0.0) || !(vi.idw.power > 0.0) || !(vi.idw.radius > 0.0)) {
    throw ConfigError("vi scale, idw_power and idw_radius must be positive");
  }
  if (gwr.bandwidth && !(*gwr.bandwidth > 0.0)) throw ConfigError("gwr.bandwidth must be positive");
  if (!(gwr.tol > 0.0) || gwr.b_min < 0.0 || gwr.b_max < 0.0) throw ConfigError("invalid gwr search settings");
  if (!(gwr.zones.ratio_threshold >= 0.0) || !(gwr.zones.r2_min >= 0.0 && gwr.zones.r2_min <= 1.0)) {
    throw ConfigError("invalid gwr zone thresholds");
  }
}

RunConfig parse(std::string_view text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig c;
  for (const auto& [name, node] : tree) {
    const std::string section = csv::lower(name);
    if (node.empty()) throw ConfigError(origin + ": key outside any section: " + name);
    apply(c, section, Section(section, node));
  }
  c.validate();
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json j;
  // Thread count is left out: it never changes results.
  j["run"] = {{"seed", c.seed}};
  j["grid"] = {{"cell_size", c.grid.cell_size}, {"border", c.grid.border}};
  j["clean"] = {{"yield_min", c.clean.yield_min},
                {"yield_max", c.clean.yield_max},
                {"zscore_limit", c.clean.zscore_limit},
                {"hampel_window", c.clean.hampel_window},
                {"hampel_nsigma", c.clean.hampel_nsigma},
                {"hampel_min_rel_scale", c.clean.hampel_min_rel_scale},
                {"ma_window", c.clean.ma_window}};
  j["variogram"] = {{"lag_width", c.variogram.lag_width},
                    {"max_lag", c.variogram.max_lag},
                    {"max_points", c.variogram.max_points},
                    {"max_iterations", c.variogram.fit.max_iterations},
                    {"restarts", c.variogram.fit.restarts},
                    {"ftol", c.variogram.fit.ftol}};
  j["krige"] = {{"global_max", c.krige.global_max}, {"neighbors", c.krige.neighbors}};
  j["smooth"] = {{"radius", c.smooth_radius}};
  j["lisa"] = {{"permutations", c.lisa.permutations},
               {"alpha", c.lisa.alpha},
               {"weights", c.weights.scheme == lisa::WeightScheme::queen ? "queen" : "distance_band"},
               {"band", c.weights.band}};
  j["freq"] = {{"stable_fraction", c.freq.stable_fraction}, {"report_bins", c.freq.report_bins}};
  j["vi"] = {{"index", std::string(vi::to_string(c.vi.kind))},
             {"cloud_max", c.vi.cloud_max},
             {"scale", c.vi.scale},
             {"idw_power", c.vi.idw.power},
             {"idw_radius", std::isfinite(c.vi.idw.radius) ? json(c.vi.idw.radius) : json("inf")}};
  j["gwr"] = {{"bandwidth", c.gwr.bandwidth ? json(*c.gwr.bandwidth) : json(nullptr)},
              {"b_min", c.gwr.b_min},
              {"b_max", c.gwr.b_max},
              {"tol", c.gwr.tol},
              {"objective", c.gwr.objective == gwr::Objective::cv ? "cv" : "aicc"},
              {"ratio_threshold", c.gwr.zones.ratio_threshold},
              {"r2_min", c.gwr.zones.r2_min},
              {"yf_name", c.gwr.zones.yf_name},
              {"prior_name", c.gwr.zones.prior_name}};
  json sy = {{"preset", c.synth.preset}};
  auto opt = [&](const char* key, const auto& v) {
    if (v) sy[key] = *v;
  };
  opt("years", c.synth.years);
  opt("base_yield", c.synth.base_yield);
  opt("noise_nugget", c.synth.noise_nugget);
  opt("noise_sill", c.synth.noise_sill);
  opt("noise_range", c.synth.noise_range);
  opt("spike_probability", c.synth.spike_probability);
  opt("flag_probability", c.synth.flag_probability);
  opt("zone_effect", c.synth.zone_effect);
  opt("cloud_fraction", c.synth.cloud_fraction);
  j["synth"] = sy;
  return j;
}

}  // namespace zonekit::config
