#include "zonekit/export.hpp"

#include <fstream>
#include <sstream>

#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"

namespace zonekit::io {

namespace {

using csv::format_double;

std::optional<freq::Stability> parse_stability(std::string_view s) {
  for (auto k : {freq::Stability::high_stable, freq::Stability::low_stable, freq::Stability::unstable}) {
    if (csv::lower(s) == freq::to_string(k)) return k;
  }
  return std::nullopt;
}

std::size_t cell_field(const csv::Row& row, std::size_t column, std::size_t cells, const std::string& path) {
  const auto cell = column < row.fields.size() ? csv::parse_int(row.fields[column]) : std::nullopt;
  if (!cell || *cell < 0 || static_cast<std::size_t>(*cell) >= cells) {
    throw SchemaError(path + ":" + std::to_string(row.line) + ": cell index outside grid");
  }
  return static_cast<std::size_t>(*cell);
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on " + path);
}

void write_surface_csv(const std::string& path, const Surface& surface, const Surface* variance) {
  if (variance) require_same_grid(surface, *variance, "variance surface");
  std::ostringstream out;
  out << (variance ? "cell,value,variance\n" : "cell,value\n");
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (!surface.has(i)) continue;
    out << i << ',' << format_double(surface[i]);
    if (variance) out << ',' << format_double((*variance)[i]);
    out << '\n';
  }
  write_text(path, out.str());
}

void write_surface_geojson(const std::string& path, const Surface& surface, const geometry::BaseGrid& grid) {
  require_same_grid(grid.key(), surface.grid, "GeoJSON surface");
  std::ostringstream out;
  out << "{\"type\":\"FeatureCollection\",\"features\":[";
  bool first = true;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (!surface.has(i)) continue;
    const auto c = grid.center(i);
    out << (first ? "" : ",") << "\n{\"type\":\"Feature\",\"geometry\":{\"type\":\"Point\",\"coordinates\":["
        << format_double(c.x) << ',' << format_double(c.y) << "]},\"properties\":{\"cell\":" << i
        << ",\"value\":" << format_double(surface[i]) << "}}";
    first = false;
  }
  out << "\n]}\n";
  write_text(path, out.str());
}

nlohmann::json variogram_json(const geostat::EmpiricalVariogram& emp, const geostat::VariogramFit& fit) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : emp.bins) {
    bins.push_back({{"lag", b.lag}, {"semivariance", b.semivariance}, {"pairs", b.pairs}});
  }
  return {{"model", "exponential"},
          {"nugget", fit.model.nugget},
          {"sill", fit.model.sill},
          {"effective_range", fit.model.effective_range},
          {"objective", fit.objective},
          {"iterations", fit.iterations},
          {"lag_width", emp.lag_width},
          {"bins", bins}};
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_lisa_csv(const std::string& path, const lisa::LisaResult& r) {
  std::ostringstream out;
  out << "cell,local_I,p,quadrant,MC\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    out << r.cells[k] << ',' << format_double(r.local_i[k]) << ',' << format_double(r.p_value[k]) << ','
        << lisa::to_string(r.quadrant[k]) << ',' << r.code[k] << '\n';
  }
  write_text(path, out.str());
}

void write_frequency_csv(const std::string& path, const freq::FrequencyMap& fm) {
  std::ostringstream out;
  out << "cell,YF,P,class,partial\n";
  for (std::size_t c : fm.covered_cells()) {
    out << c << ',' << fm.yf[c] << ',' << fm.years << ',';
    if (!fm.stability.empty()) out << freq::to_string(fm.stability[c]);
    out << ',' << (fm.partial[c] ? 1 : 0) << '\n';
  }
  write_text(path, out.str());
}

freq::FrequencyMap read_frequency_csv(const std::string& path, const geometry::BaseGrid& grid) {
  const auto t = csv::read(path);
  const auto c_cell = t.require_column("cell", path);
  const auto c_yf = t.require_column("YF", path);
  const auto c_p = t.require_column("P", path);
  const auto c_class = t.column("class");
  const auto c_partial = t.column("partial");
  freq::FrequencyMap fm;
  fm.grid = grid.key();
  fm.yf.assign(grid.cell_count(), 0);
  fm.covered.assign(grid.cell_count(), 0);
  fm.partial.assign(grid.cell_count(), 0);
  bool classes = c_class.has_value();
  std::vector<freq::Stability> stability(grid.cell_count(), freq::Stability::unstable);
  for (const auto& row : t.rows) {
    const auto where = path + ":" + std::to_string(row.line);
    const std::size_t cell = cell_field(row, c_cell, grid.cell_count(), path);
    const auto yf = c_yf < row.fields.size() ? csv::parse_int(row.fields[c_yf]) : std::nullopt;
    const auto p = c_p < row.fields.size() ? csv::parse_int(row.fields[c_p]) : std::nullopt;
    if (!yf || !p || *p <= 0 || std::abs(*yf) > *p) throw SchemaError(where + ": bad YF or P");
    if (fm.years != 0 && fm.years != *p) throw SchemaError(where + ": inconsistent P");
    fm.years = static_cast<int>(*p);
    fm.yf[cell] = static_cast<int>(*yf);
    fm.covered[cell] = 1;
    if (c_partial && *c_partial < row.fields.size()) fm.partial[cell] = csv::parse_flag(row.fields[*c_partial]).value_or(false);
    if (classes) {
      const auto text = *c_class < row.fields.size() ? row.fields[*c_class] : std::string{};
      if (text.empty()) {
        classes = false;
      } else {
        const auto s = parse_stability(text);
        if (!s) throw SchemaError(where + ": unknown class " + text);
        stability[cell] = *s;
      }
    }
  }
  if (fm.years == 0) throw SchemaError(path + ": empty frequency map");
  if (classes) fm.stability = std::move(stability);
  return fm;
}

void write_report_csv(const std::string& path, const freq::AttributeReport& report) {
  std::ostringstream out;
  out << "bin_low,bin_high,count,mean_YF";
  for (int k = -report.years; k <= report.years; ++k) out << ",YF_" << (k > 0 ? "+" : "") << k;
  out << '\n';
  for (const auto& b : report.bins) {
    out << format_double(b.low) << ',' << format_double(b.high) << ',' << b.count << ','
        << format_double(b.mean_yf);
    for (std::size_t h : b.histogram) out << ',' << h;
    out << '\n';
  }
  write_text(path, out.str());
}

void write_gwr_csv(const std::string& path, const gwr::GwrResult& r) {
  const auto& d = r.design;
  const auto names = d.names();
  const auto k = static_cast<Eigen::Index>(names.size() + 1);
  std::ostringstream out;
  out << "cell,beta0";
  for (const auto& n : names) out << ",beta_" << n;
  out << ",beta0_std";
  for (const auto& n : names) out << ",beta_" << n << "_std";
  out << ",fitted,local_R2,zone\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << d.cells()[i];
    for (Eigen::Index c = 0; c < k; ++c) out << ',' << format_double(r.beta_raw(row, c));
    for (Eigen::Index c = 0; c < k; ++c) out << ',' << format_double(r.beta_std(row, c));
    out << ',' << format_double(r.fitted(row)) << ',' << format_double(r.r2(row)) << ','
        << gwr::to_string(r.zones[i]) << '\n';
  }
  write_text(path, out.str());
}

nlohmann::json gwr_summary(const gwr::GwrResult& r) {
  std::size_t counts[3] = {0, 0, 0};
  for (auto z : r.zones) ++counts[static_cast<std::size_t>(z)];
  nlohmann::json sds = nlohmann::json::object();
  const auto names = r.design.names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    sds[names[k]] = {{"mean", r.design.means()(static_cast<Eigen::Index>(k))},
                     {"sd", r.design.sds()(static_cast<Eigen::Index>(k))}};
  }
  return {{"response", r.design.response_name()},
          {"predictors", names},
          {"standardization", sds},
          {"cells", r.design.size()},
          {"bandwidth", r.bandwidth},
          {"searched", r.searched},
          {"objective", r.objective == gwr::Objective::cv ? "cv" : "aicc"},
          {"score", std::isfinite(r.score) ? nlohmann::json(r.score) : nlohmann::json(nullptr)},
          {"evaluations", r.evaluations},
          {"zones",
           {{"persistent", counts[0]}, {"incidental", counts[1]}, {"indeterminate", counts[2]}}}};
}

void write_truth_csv(const std::string& path, const synth::SynthField& field) {
  std::ostringstream out;
  out << "cell,class,zone\n";
  for (std::size_t c = 0; c < field.truth.size(); ++c) {
    if (!field.grid.interior(c)) continue;
    out << c << ',' << freq::to_string(field.truth[c]) << ',' << field.zone_of[c] << '\n';
  }
  write_text(path, out.str());
}

std::vector<freq::Stability> read_truth_csv(const std::string& path, const geometry::BaseGrid& grid) {
  const auto t = csv::read(path);
  const auto c_cell = t.require_column("cell", path);
  const auto c_class = t.require_column("class", path);
  std::vector<freq::Stability> out(grid.cell_count(), freq::Stability::unstable);
  for (const auto& row : t.rows) {
    const std::size_t cell = cell_field(row, c_cell, grid.cell_count(), path);
    const auto s = c_class < row.fields.size() ? parse_stability(row.fields[c_class]) : std::nullopt;
    if (!s) throw SchemaError(path + ":" + std::to_string(row.line) + ": unknown class");
    out[cell] = *s;
  }
  return out;
}

nlohmann::json recovery_json(const synth::RecoveryScore& score) {
  nlohmann::json j;
  for (auto k : {freq::Stability::high_stable, freq::Stability::low_stable, freq::Stability::unstable}) {
    const auto& c = score[k];
    j[std::string(freq::to_string(k))] = {{"precision", c.precision},
                                          {"recall", c.recall},
                                          {"iou", c.iou},
                                          {"true_positive", c.true_positive},
                                          {"false_positive", c.false_positive},
                                          {"false_negative", c.false_negative}};
  }
  return j;
}

}  // namespace zonekit::io
