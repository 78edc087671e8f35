#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "zonekit/cli.hpp"
#include "zonekit/config.hpp"
#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"
#include "zonekit/export.hpp"
#include "zonekit/ingest.hpp"
#include "zonekit/pipeline.hpp"

namespace zonekit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string config_path;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string upper_stem(const std::string& path) {
  std::string s = fs::path(path).stem().string();
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

json stats_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"stdev", s.stdev}, {"min", s.min}, {"max", s.max}};
}

json issues_json(const ingest::ParseReport& report) {
  json list = json::array();
  for (std::size_t i = 0; i < report.issues.size() && i < 100; ++i) {
    list.push_back({{"line", report.issues[i].line}, {"reason", report.issues[i].reason}});
  }
  return {{"rows", report.rows}, {"rejected", report.issues.size()}, {"issues", list}};
}

json clean_json(const clean::CleanResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage},
                      {"input", s.input},
                      {"output", s.output},
                      {"imputations", s.imputations},
                      {"after", stats_json(s.after)},
                      {"warnings", s.warnings}});
  }
  return {{"before", stats_json(r.raw)},
          {"after", stats_json(summarize(clean::yields(r.records)))},
          {"imputations", r.imputations()},
          {"stages", stages}};
}

json krige_json(const pipeline::KrigeStage& k) {
  return {{"samples", k.samples},
          {"excluded_border", k.excluded},
          {"variogram",
           {{"nugget", k.fit.model.nugget},
            {"sill", k.fit.model.sill},
            {"effective_range", k.fit.model.effective_range},
            {"objective", k.fit.objective}}},
          {"max_weight_sum_error", k.kriged.max_weight_sum_error},
          {"merged_duplicates", k.kriged.merged_duplicates},
          {"global_neighborhood", k.kriged.global_neighborhood},
          {"kriged", stats_json(summarize(k.kriged.estimate))},
          {"smoothed", stats_json(summarize(k.smoothed))}};
}

json lisa_json(const pipeline::MoranLayer& m) {
  std::size_t hh = 0, ll = 0;
  for (int c : m.lisa.code) {
    hh += c == 1;
    ll += c == -1;
  }
  return {{"cells", m.lisa.cells.size()}, {"global_moran", m.lisa.global_i}, {"significant_hh", hh},
          {"significant_ll", ll}};
}

json freq_json(const freq::FrequencyMap& fm) {
  std::size_t counts[3] = {0, 0, 0};
  std::size_t partial = 0;
  for (std::size_t c : fm.covered_cells()) {
    if (!fm.stability.empty()) ++counts[static_cast<std::size_t>(fm.stability[c])];
    partial += fm.partial[c];
  }
  return {{"years", fm.years},
          {"cells", fm.covered_cells().size()},
          {"partial", partial},
          {"high_stable", counts[0]},
          {"low_stable", counts[1]},
          {"unstable", counts[2]}};
}

ingest::Parsed<ingest::YieldRecord> read_yield(const std::string& path, std::ostream& err) {
  auto parsed = ingest::read_yield_csv(path);
  if (!parsed.report.clean()) {
    err << json{{"warning", {{"file", path}, {"rejected_rows", parsed.report.issues.size()}}}}.dump() << '\n';
  }
  return parsed;
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

class Command {
 public:
  Command(std::string name, const Globals& g) : name_(std::move(name)), g_(g) {}

  config::RunConfig& cfg() { return cfg_; }

  void setup() {
    if (!g_.config_path.empty()) cfg_ = config::load(g_.config_path);
    if (g_.seed) cfg_.seed = *g_.seed;
    if (g_.threads) cfg_.threads = *g_.threads;
    cfg_.validate();
    set_thread_count(cfg_.threads);
  }

  Manifest manifest() const {
    Manifest m(name_, cfg_.seed, config::to_json(cfg_));
    if (!g_.config_path.empty()) m.add_input("config", g_.config_path);
    return m;
  }

 private:
  std::string name_;
  const Globals& g_;
  config::RunConfig cfg_;
};

void write_manifest(Manifest& m, const std::string& output, const std::vector<std::string>& extra = {}) {
  m.add_output(output);
  for (const auto& e : extra) m.add_output(e);
  m.write(manifest_path(output));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto fail = [&](ErrorKind kind, const std::string& message) {
    err << json{{"error", {{"kind", std::string(to_string(kind))}, {"message", message}, {"exit_code", exit_code(kind)}}}}
               .dump()
        << '\n';
    return exit_code(kind);
  };

  CLI::App app{"Yield-map cleaning, LISA frequency maps and GWR management zones", "zonekit"};
  app.set_version_flag("--version", std::string(ZONEKIT_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores (overrides the config)");
  app.add_option("--config", g.config_path, "Config file")->check(CLI::ExistingFile);

  std::function<void()> action;
  auto command = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    return sub;
  };

  // grid
  std::string boundary_path, out_path;
  std::optional<double> cell_size, border;
  {
    auto* c = command("grid", "Build the base grid from a boundary GeoJSON");
    c->add_option("--boundary", boundary_path, "Field boundary GeoJSON")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Grid CSV")->required();
    c->add_option("--cell-size", cell_size, "Cell size in m");
    c->add_option("--border", border, "Border exclusion distance in m");
    c->callback([&] {
      action = [&] {
        Command cmd("grid", g);
        cmd.setup();
        auto& cfg = cmd.cfg();
        if (cell_size) cfg.grid.cell_size = *cell_size;
        if (border) cfg.grid.border = *border;
        cfg.validate();
        const auto boundary = ingest::read_boundary_geojson(boundary_path);
        const auto grid = geometry::build_grid(boundary, cfg.grid.cell_size, cfg.grid.border);
        ingest::write_grid_csv(out_path, grid);
        auto m = cmd.manifest();
        m.add_input("boundary", boundary_path);
        m.stages()["grid"] = {{"ncols", grid.ncols()},
                              {"nrows", grid.nrows()},
                              {"cells", grid.cell_count()},
                              {"interior", grid.interior_count()},
                              {"area", boundary.area()}};
        write_manifest(m, out_path);
        out << m.stages()["grid"].dump() << '\n';
      };
    });
  }

  // clean
  std::string in_path;
  {
    auto* c = command("clean", "Clean a raw yield log");
    c->add_option("--in", in_path, "Raw yield CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Cleaned yield CSV")->required();
    c->callback([&] {
      action = [&] {
        Command cmd("clean", g);
        cmd.setup();
        const auto raw = read_yield(in_path, err);
        const auto result = clean::clean_yield(raw.records, cmd.cfg().clean);
        ingest::write_yield_csv(out_path, result.records);
        auto m = cmd.manifest();
        m.add_input("yield", in_path);
        m.stages()["parse"] = issues_json(raw.report);
        m.stages()["clean"] = clean_json(result);
        write_manifest(m, out_path);
        const auto& s = m.stages()["clean"];
        out << json{{"before", s["before"]}, {"after", s["after"]}, {"imputations", s["imputations"]}}.dump() << '\n';
      };
    });
  }

  // krige
  std::string grid_path, variogram_path, geojson_path;
  {
    auto* c = command("krige", "Variogram fit, ordinary kriging and smoothing of a cleaned log");
    c->add_option("--in", in_path, "Cleaned yield CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Yield surface CSV")->required();
    c->add_option("--variogram", variogram_path, "Variogram JSON output");
    c->add_option("--geojson", geojson_path, "Surface GeoJSON output");
    c->callback([&] {
      action = [&] {
        Command cmd("krige", g);
        cmd.setup();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto records = read_yield(in_path, err);
        const auto stage = pipeline::krige_stage(records.records, grid, cmd.cfg());
        io::write_surface_csv(out_path, stage.smoothed, &stage.kriged.variance);
        std::vector<std::string> extra;
        if (!variogram_path.empty()) {
          io::write_json(variogram_path, io::variogram_json(stage.empirical, stage.fit));
          extra.push_back(variogram_path);
        }
        if (!geojson_path.empty()) {
          io::write_surface_geojson(geojson_path, stage.smoothed, grid);
          extra.push_back(geojson_path);
        }
        auto m = cmd.manifest();
        m.add_input("yield", in_path);
        m.add_input("grid", grid_path);
        m.stages()["krige"] = krige_json(stage);
        write_manifest(m, out_path, extra);
        out << m.stages()["krige"].dump() << '\n';
      };
    });
  }

  // lisa
  std::size_t layer = 0;
  {
    auto* c = command("lisa", "Local Moran clustering and MC coding of a yield surface");
    c->add_option("--in", in_path, "Yield surface CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "LISA CSV")->required();
    c->add_option("--layer", layer, "Year index; selects the permutation stream");
    c->callback([&] {
      action = [&] {
        Command cmd("lisa", g);
        cmd.setup();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto surface = ingest::read_surface_csv(in_path, grid, "value");
        const auto m_layer = pipeline::moran_layer(surface, grid, cmd.cfg(), layer);
        io::write_lisa_csv(out_path, m_layer.lisa);
        auto m = cmd.manifest();
        m.add_input("surface", in_path);
        m.add_input("grid", grid_path);
        m.stages()["lisa"] = lisa_json(m_layer);
        m.stages()["lisa"]["layer"] = layer;
        write_manifest(m, out_path);
        out << m.stages()["lisa"].dump() << '\n';
      };
    });
  }

  // freq
  std::string in_list;
  {
    auto* c = command("freq", "Stack yearly MC layers into a yield frequency map");
    c->add_option("--in", in_list, "Comma-separated LISA CSVs, one per year")->required();
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Frequency CSV")->required();
    c->callback([&] {
      action = [&] {
        Command cmd("freq", g);
        cmd.setup();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto files = split_list(in_list);
        if (files.empty()) throw ConfigError("freq needs at least one LISA file");
        std::vector<Surface> codes;
        auto m = cmd.manifest();
        for (const auto& f : files) {
          codes.push_back(ingest::read_surface_csv(f, grid, "MC"));
          m.add_input("lisa", f);
        }
        m.add_input("grid", grid_path);
        const auto fm = pipeline::frequency_map(codes, cmd.cfg());
        io::write_frequency_csv(out_path, fm);
        m.stages()["freq"] = freq_json(fm);
        write_manifest(m, out_path);
        out << m.stages()["freq"].dump() << '\n';
      };
    });
  }

  // vi
  std::string bands_path, index_name;
  std::optional<double> scale, cloud_max;
  {
    auto* c = command("vi", "Vegetation index surface from a band raster");
    c->add_option("--bands", bands_path, "Band raster CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "VI surface CSV")->required();
    c->add_option("--index", index_name, "NDVI, EVI, NDRE, WDRVI, GCVI or GNDVI");
    c->add_option("--scale", scale, "Band value multiplier");
    c->add_option("--cloud-max", cloud_max, "Keep pixels with cloud probability below this");
    c->callback([&] {
      action = [&] {
        Command cmd("vi", g);
        cmd.setup();
        auto& v = cmd.cfg().vi;
        if (!index_name.empty()) {
          const auto k = vi::parse_kind(index_name);
          if (!k) throw ConfigError("unknown vegetation index: " + index_name);
          v.kind = *k;
        }
        if (scale) v.scale = *scale;
        if (cloud_max) v.cloud_max = *cloud_max;
        cmd.cfg().validate();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto needed = vi::required_bands(v.kind);
        const auto pixels = ingest::read_band_raster(bands_path, needed, v.scale);
        const auto clear = ingest::cloud_filter(pixels.records, v.cloud_max);
        const auto surface = vi::vi_surface(v.kind, clear, grid, v.idw);
        io::write_surface_csv(out_path, surface);
        auto m = cmd.manifest();
        m.add_input("bands", bands_path);
        m.add_input("grid", grid_path);
        m.stages()["parse"] = issues_json(pixels.report);
        m.stages()["vi"] = {{"index", std::string(vi::to_string(v.kind))},
                            {"pixels", pixels.records.size()},
                            {"cloud_free", clear.size()},
                            {"surface", stats_json(summarize(surface))}};
        write_manifest(m, out_path);
        out << m.stages()["vi"].dump() << '\n';
      };
    });
  }

  // gwr
  std::string response_path, predictor_list, name_list, summary_path;
  std::optional<double> bandwidth;
  {
    auto* c = command("gwr", "Geographically weighted regression and zone labelling");
    c->add_option("--response", response_path, "Response surface CSV (current VI)")->required()->check(CLI::ExistingFile);
    c->add_option("--predictors", predictor_list, "Comma-separated predictor surface CSVs")->required();
    c->add_option("--names", name_list, "Comma-separated predictor names (default: upper-cased file stems)");
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "GWR CSV")->required();
    c->add_option("--summary", summary_path, "Run summary JSON");
    c->add_option("--bandwidth", bandwidth, "Fixed bandwidth in m (searched when absent)");
    c->callback([&] {
      action = [&] {
        Command cmd("gwr", g);
        cmd.setup();
        auto& opts = cmd.cfg().gwr;
        if (bandwidth) opts.bandwidth = *bandwidth;
        cmd.cfg().validate();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto files = split_list(predictor_list);
        auto names = split_list(name_list);
        if (files.empty()) throw ConfigError("gwr needs at least one predictor");
        if (!names.empty() && names.size() != files.size()) {
          throw ConfigError("--names must list one name per predictor");
        }
        auto m = cmd.manifest();
        m.add_input("response", response_path);
        std::vector<gwr::Predictor> predictors;
        for (std::size_t k = 0; k < files.size(); ++k) {
          predictors.push_back({names.empty() ? upper_stem(files[k]) : names[k],
                                ingest::read_surface_csv(files[k], grid)});
          m.add_input("predictor", files[k]);
        }
        m.add_input("grid", grid_path);
        const auto design = gwr::GwrDesign::make(grid, ingest::read_surface_csv(response_path, grid),
                                                 std::move(predictors), upper_stem(response_path));
        const auto result = gwr::gwr_fit(design, opts);
        io::write_gwr_csv(out_path, result);
        const auto summary = io::gwr_summary(result);
        std::vector<std::string> extra;
        if (!summary_path.empty()) {
          io::write_json(summary_path, summary);
          extra.push_back(summary_path);
        }
        m.stages()["gwr"] = summary;
        write_manifest(m, out_path, extra);
        out << summary.dump() << '\n';
      };
    });
  }

  // synth
  std::string out_dir, preset;
  {
    auto* c = command("synth", "Generate a synthetic benchmark field");
    c->add_option("--out-dir", out_dir, "Output directory")->required();
    c->add_option("--preset", preset, "benchmark or zero_noise");
    c->callback([&] {
      action = [&] {
        Command cmd("synth", g);
        cmd.setup();
        auto& s = cmd.cfg().synth;
        if (!preset.empty()) s.preset = csv::lower(preset);
        const auto spec = s.spec(cmd.cfg().seed);
        const auto field = synth::generate_field_years(spec);
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        std::vector<std::string> outputs;
        auto emit = [&](const std::string& name) {
          outputs.push_back((dir / name).string());
          return outputs.back();
        };
        ingest::write_boundary_geojson(emit("boundary.geojson"), field.boundary);
        ingest::write_grid_csv(emit("grid.csv"), field.grid);
        for (const auto& y : field.years) ingest::write_yield_csv(emit("yield_" + std::to_string(y.year) + ".csv"), y.records);
        constexpr std::array<ingest::Band, 5> all{ingest::Band::blue, ingest::Band::green, ingest::Band::red,
                                                  ingest::Band::red_edge, ingest::Band::nir};
        for (std::size_t k = 0; k < spec.scene_ndvi.size(); ++k) {
          ingest::write_band_raster(emit("bands_" + std::to_string(k) + ".csv"), synth::generate_scene(spec, field, k), all);
        }
        io::write_truth_csv(emit("truth.csv"), field);
        Manifest m = cmd.manifest();
        json years = json::array();
        for (const auto& y : field.years) {
          std::size_t flagged = 0;
          for (const auto& r : y.records) flagged += r.flagged;
          years.push_back({{"year", y.year}, {"records", y.records.size()}, {"flagged", flagged},
                           {"yield", stats_json(summarize(clean::yields(y.records)))}});
        }
        m.stages()["synth"] = {{"preset", s.preset}, {"years", years}, {"interior_cells", field.grid.interior_count()}};
        for (const auto& o : outputs) m.add_output(o);
        m.write((dir / "synth.manifest.json").string());
        out << json{{"outputs", outputs.size()}, {"interior_cells", field.grid.interior_count()}}.dump() << '\n';
      };
    });
  }

  // report
  std::string freq_path, truth_path, attributes_path, attribute, edges;
  std::optional<std::size_t> bins;
  {
    auto* c = command("report", "Frequency-vs-attribute table or zone recovery score");
    c->add_option("--freq", freq_path, "Frequency CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Report CSV (attributes) or JSON (truth)")->required();
    c->add_option("--truth", truth_path, "Synthetic truth CSV")->check(CLI::ExistingFile);
    c->add_option("--attributes", attributes_path, "Per-cell attribute CSV")->check(CLI::ExistingFile);
    c->add_option("--attribute", attribute, "Attribute to bin by");
    c->add_option("--bins", bins, "Number of equal-width bins");
    c->add_option("--edges", edges, "Comma-separated explicit bin edges");
    c->callback([&] {
      action = [&] {
        Command cmd("report", g);
        cmd.setup();
        if (truth_path.empty() == attributes_path.empty()) {
          throw ConfigError("report needs exactly one of --truth or --attributes");
        }
        const auto grid = ingest::read_grid_csv(grid_path);
        auto fm = io::read_frequency_csv(freq_path, grid);
        if (fm.stability.empty()) fm = freq::classify_stability(std::move(fm), cmd.cfg().freq.stable_fraction);
        auto m = cmd.manifest();
        m.add_input("freq", freq_path);
        m.add_input("grid", grid_path);
        if (!truth_path.empty()) {
          const auto truth = io::read_truth_csv(truth_path, grid);
          std::vector<std::uint8_t> mask(grid.cell_count(), 0);
          for (std::size_t c2 : grid.interior_cells()) mask[c2] = 1;
          const auto score = synth::score_zone_recovery(pipeline::predicted_zones(fm), truth, mask);
          const auto j = io::recovery_json(score);
          io::write_json(out_path, j);
          m.add_input("truth", truth_path);
          m.stages()["recovery"] = j;
          out << j.dump() << '\n';
        } else {
          if (attribute.empty()) throw ConfigError("report --attributes needs --attribute");
          const auto attrs = ingest::read_attributes_csv(attributes_path);
          freq::BinSpec spec;
          spec.count = bins.value_or(cmd.cfg().freq.report_bins);
          for (const auto& e : split_list(edges)) {
            const auto v = csv::parse_double(e);
            if (!v) throw ConfigError("bad bin edge: " + e);
            spec.edges.push_back(*v);
          }
          const auto report = freq::attribute_report(fm, attrs.records, attribute, spec);
          io::write_report_csv(out_path, report);
          m.add_input("attributes", attributes_path);
          m.stages()["parse"] = issues_json(attrs.report);
          m.stages()["report"] = {{"attribute", report.attribute}, {"cells", report.cells}, {"bins", report.bins.size()}};
          out << m.stages()["report"].dump() << '\n';
        }
        write_manifest(m, out_path);
      };
    });
  }

  // plot
  std::string column;
  unsigned pixel_scale = 4;
  {
    auto* c = command("plot", "Render a surface CSV as a PNG choropleth");
    c->add_option("--in", in_path, "Surface CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "PNG file")->required();
    c->add_option("--column", column, "Value column (default value, YF or MC)");
    c->add_option("--pixels", pixel_scale, "Pixels per cell");
    c->callback([&] {
      action = [&] {
        Command cmd("plot", g);
        cmd.setup();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto surface = ingest::read_surface_csv(in_path, grid, column);
        write_png(out_path, surface, 0.0, 0.0, pixel_scale);
        auto m = cmd.manifest();
        m.add_input("surface", in_path);
        m.add_input("grid", grid_path);
        m.stages()["plot"] = stats_json(summarize(surface));
        write_manifest(m, out_path);
      };
    });
  }

  // run
  std::string yield_list;
  {
    auto* c = command("run", "Full pipeline: clean, krige, LISA per year, frequency map, recovery");
    c->add_option("--yield", yield_list, "Comma-separated raw yield CSVs, one per year")->required();
    c->add_option("--grid", grid_path, "Grid CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out-dir", out_dir, "Output directory")->required();
    c->add_option("--truth", truth_path, "Synthetic truth CSV for a recovery score")->check(CLI::ExistingFile);
    c->callback([&] {
      action = [&] {
        Command cmd("run", g);
        cmd.setup();
        const auto& cfg = cmd.cfg();
        const auto grid = ingest::read_grid_csv(grid_path);
        const auto files = split_list(yield_list);
        if (files.empty()) throw ConfigError("run needs at least one yield file");
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        auto m = cmd.manifest();
        m.add_input("grid", grid_path);
        std::vector<std::string> outputs;
        std::vector<Surface> codes;
        json years = json::array();
        for (std::size_t y = 0; y < files.size(); ++y) {
          const auto raw = read_yield(files[y], err);
          m.add_input("yield", files[y]);
          const auto ys = pipeline::yield_surface(raw.records, grid, cfg);
          const auto ml = pipeline::moran_layer(ys.surface(), grid, cfg, y);
          const auto tag = std::to_string(y);
          outputs.push_back((dir / ("clean_" + tag + ".csv")).string());
          ingest::write_yield_csv(outputs.back(), ys.cleaned.records);
          outputs.push_back((dir / ("yield_" + tag + ".csv")).string());
          io::write_surface_csv(outputs.back(), ys.krige.smoothed, &ys.krige.kriged.variance);
          outputs.push_back((dir / ("lisa_" + tag + ".csv")).string());
          io::write_lisa_csv(outputs.back(), ml.lisa);
          codes.push_back(ml.codes);
          years.push_back({{"file", files[y]},
                           {"parse", issues_json(raw.report)},
                           {"clean", clean_json(ys.cleaned)},
                           {"krige", krige_json(ys.krige)},
                           {"lisa", lisa_json(ml)}});
        }
        const auto fm = pipeline::frequency_map(codes, cfg);
        outputs.push_back((dir / "freq.csv").string());
        io::write_frequency_csv(outputs.back(), fm);
        m.stages()["years"] = years;
        m.stages()["freq"] = freq_json(fm);
        json summary = {{"freq", m.stages()["freq"]}};
        if (!truth_path.empty()) {
          const auto truth = io::read_truth_csv(truth_path, grid);
          std::vector<std::uint8_t> mask(grid.cell_count(), 0);
          for (std::size_t c2 : grid.interior_cells()) mask[c2] = 1;
          const auto j = io::recovery_json(synth::score_zone_recovery(pipeline::predicted_zones(fm), truth, mask));
          outputs.push_back((dir / "recovery.json").string());
          io::write_json(outputs.back(), j);
          m.add_input("truth", truth_path);
          m.stages()["recovery"] = j;
          summary["recovery"] = j;
        }
        for (const auto& o : outputs) m.add_output(o);
        m.write((dir / "run.manifest.json").string());
        out << summary.dump() << '\n';
      };
    });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << ZONEKIT_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::usage, e.what());
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::io, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorKind::data, e.what());
  }
}

}  // namespace zonekit::cli
