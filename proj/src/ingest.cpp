#include "zonekit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"

namespace zonekit::ingest {

using csv::format_double;
using csv::parse_double;
namespace chr = std::chrono;

namespace {

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  auto y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
  if (!y || !mo || !d || s[4] != '-' || s[7] != '-') return std::nullopt;
  const chr::year_month_day ymd{chr::year{*y}, chr::month{static_cast<unsigned>(*mo)},
                                chr::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  long long millis = 0;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    auto h = digits(s, pos + 1, 2), m = digits(s, pos + 4, 2);
    if (!h || !m || s[pos + 3] != ':') return std::nullopt;
    hh = *h;
    mm = *m;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      auto sec = digits(s, pos + 1, 2);
      if (!sec) return std::nullopt;
      ss = *sec;
      pos += 3;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        int scale = 100;
        std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (scale > 0) millis += (s[pos] - '0') * scale;
          scale /= 10;
          ++pos;
        }
        if (pos == start) return std::nullopt;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  long long offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      auto oh = digits(s, pos + 1, 2);
      if (!oh) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      auto om = digits(s, mpos, 2);
      if (!om) return std::nullopt;
      offset_minutes = sign * (*oh * 60 + *om);
      pos = mpos + 2;
    }
  }
  if (pos != s.size()) return std::nullopt;
  const chr::sys_days day{ymd};
  const auto t = chr::time_point_cast<chr::milliseconds>(day) + chr::hours{hh} +
                 chr::minutes{mm} + chr::seconds{ss} + chr::milliseconds{millis} -
                 chr::minutes{offset_minutes};
  return t;
}

std::string format_timestamp(Timestamp t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{day};
  auto rest = t - day;
  const auto h = chr::duration_cast<chr::hours>(rest);
  rest -= h;
  const auto m = chr::duration_cast<chr::minutes>(rest);
  rest -= m;
  const auto sec = chr::duration_cast<chr::seconds>(rest);
  rest -= sec;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<int>(sec.count()), static_cast<int>(rest.count()));
  return buf;
}

Parsed<YieldRecord> read_yield_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_ts = t.require_column("timestamp", path);
  const std::size_t c_x = t.require_column("x", path);
  const std::size_t c_y = t.require_column("y", path);
  const std::size_t c_yield = t.require_column("yield", path);
  const std::size_t c_flag = t.require_column("flag", path);
  const std::size_t needed = std::max({c_ts, c_x, c_y, c_yield, c_flag}) + 1;

  Parsed<YieldRecord> out;
  out.report.rows = t.rows.size();
  for (const auto& row : t.rows) {
    if (row.fields.size() < needed) {
      out.report.issues.push_back({row.line, "too few fields"});
      continue;
    }
    YieldRecord r;
    const auto ts = parse_timestamp(row.fields[c_ts]);
    const auto x = parse_double(row.fields[c_x]);
    const auto y = parse_double(row.fields[c_y]);
    const auto v = parse_double(row.fields[c_yield]);
    const auto f = csv::parse_flag(row.fields[c_flag]);
    if (!ts) {
      out.report.issues.push_back({row.line, "bad timestamp '" + row.fields[c_ts] + "'"});
      continue;
    }
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      out.report.issues.push_back({row.line, "bad coordinates"});
      continue;
    }
    if (!v || !std::isfinite(*v)) {
      out.report.issues.push_back({row.line, "bad yield '" + row.fields[c_yield] + "'"});
      continue;
    }
    if (!f) {
      out.report.issues.push_back({row.line, "bad flag '" + row.fields[c_flag] + "'"});
      continue;
    }
    r.timestamp = *ts;
    r.x = *x;
    r.y = *y;
    r.yield = *v;
    r.flagged = *f;
    out.records.push_back(r);
  }
  return out;
}

void write_yield_csv(const std::string& path, std::span<const YieldRecord> records) {
  auto out = open_out(path);
  out << "timestamp,x,y,yield,flag\n";
  for (const auto& r : records)
    out << format_timestamp(r.timestamp) << ',' << format_double(r.x) << ','
        << format_double(r.y) << ',' << format_double(r.yield) << ',' << (r.flagged ? 1 : 0)
        << '\n';
  finish(out, path);
}

std::string_view band_name(Band b) {
  switch (b) {
    case Band::blue: return "blue";
    case Band::green: return "green";
    case Band::red: return "red";
    case Band::red_edge: return "rededge";
    case Band::nir: return "nir";
  }
  return "?";
}

std::optional<Band> parse_band(std::string_view name) {
  const std::string n = csv::lower(name);
  if (n == "blue") return Band::blue;
  if (n == "green") return Band::green;
  if (n == "red") return Band::red;
  if (n == "rededge" || n == "red_edge") return Band::red_edge;
  if (n == "nir") return Band::nir;
  return std::nullopt;
}

Parsed<BandPixel> read_band_raster(const std::string& path, std::span<const Band> bands,
                                   double scale) {
  const csv::Table t = csv::read(path);
  const std::size_t c_x = t.require_column("x", path);
  const std::size_t c_y = t.require_column("y", path);
  std::vector<std::pair<Band, std::size_t>> cols;
  for (Band b : bands) {
    std::optional<std::size_t> c = t.column(band_name(b));
    if (!c && b == Band::red_edge) c = t.column("red_edge");
    if (!c) throw SchemaError(path + ": requested band '" + std::string(band_name(b)) + "' absent");
    cols.emplace_back(b, *c);
  }
  std::optional<std::size_t> c_cloud = t.column("cloud_probability");
  std::size_t needed = std::max(c_x, c_y) + 1;
  for (const auto& [b, c] : cols) needed = std::max(needed, c + 1);
  if (c_cloud) needed = std::max(needed, *c_cloud + 1);

  Parsed<BandPixel> out;
  out.report.rows = t.rows.size();
  for (const auto& row : t.rows) {
    if (row.fields.size() < needed) {
      out.report.issues.push_back({row.line, "too few fields"});
      continue;
    }
    BandPixel p;
    const auto x = parse_double(row.fields[c_x]);
    const auto y = parse_double(row.fields[c_y]);
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      out.report.issues.push_back({row.line, "bad coordinates"});
      continue;
    }
    p.pos = {*x, *y};
    bool ok = true;
    for (const auto& [b, c] : cols) {
      const auto v = parse_double(row.fields[c]);
      if (!v || !std::isfinite(*v)) {
        out.report.issues.push_back({row.line, "bad " + std::string(band_name(b)) + " value"});
        ok = false;
        break;
      }
      p[b] = *v * scale;
    }
    if (!ok) continue;
    if (c_cloud) {
      const auto cp = parse_double(row.fields[*c_cloud]);
      if (!cp || !(*cp >= 0.0 && *cp <= 1.0)) {
        out.report.issues.push_back({row.line, "cloud_probability outside [0, 1]"});
        continue;
      }
      p.cloud_probability = *cp;
    }
    out.records.push_back(p);
  }
  return out;
}

void write_band_raster(const std::string& path, std::span<const BandPixel> pixels,
                       std::span<const Band> bands) {
  auto out = open_out(path);
  out << "x,y";
  for (Band b : bands) out << ',' << band_name(b);
  out << ",cloud_probability\n";
  for (const auto& p : pixels) {
    out << format_double(p.pos.x) << ',' << format_double(p.pos.y);
    for (Band b : bands) out << ',' << format_double(p[b]);
    out << ',' << format_double(p.cloud_probability) << '\n';
  }
  finish(out, path);
}

std::vector<BandPixel> cloud_filter(std::span<const BandPixel> pixels, double max_probability) {
  std::vector<BandPixel> out;
  for (const auto& p : pixels)
    if (p.cloud_probability < max_probability) out.push_back(p);
  return out;
}

namespace {
constexpr std::string_view kAttributeNames[] = {
    "clay", "silt",  "sand",     "phosphorus", "potassium", "magnesium",
    "ph",   "ec",    "slope",    "altitude",   "curvature", "aspect"};
}

std::span<const std::string_view> attribute_names() { return kAttributeNames; }

namespace {

template <class Self>
auto attribute_slot(Self& a, std::string_view name) -> decltype(&a.clay) {
  const std::string n = csv::lower(name);
  if (n == "clay") return &a.clay;
  if (n == "silt") return &a.silt;
  if (n == "sand") return &a.sand;
  if (n == "phosphorus" || n == "p") return &a.phosphorus;
  if (n == "potassium" || n == "k") return &a.potassium;
  if (n == "magnesium" || n == "mg") return &a.magnesium;
  if (n == "ph") return &a.ph;
  if (n == "ec") return &a.ec;
  if (n == "slope") return &a.slope;
  if (n == "altitude") return &a.altitude;
  if (n == "curvature") return &a.curvature;
  if (n == "aspect") return &a.aspect;
  return nullptr;
}

}  // namespace

std::optional<double>* CellAttributes::slot(std::string_view name) {
  return attribute_slot(*this, name);
}

std::optional<double> CellAttributes::get(std::string_view name) const {
  if (const auto* s = attribute_slot(*this, name)) return *s;
  std::string list;
  for (auto n : kAttributeNames) list += (list.empty() ? "" : ", ") + std::string(n);
  throw DataError("unknown attribute '" + std::string(name) + "'; available: " + list);
}

Parsed<CellAttributes> read_attributes_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_cell = t.require_column("cell", path);
  std::vector<std::pair<std::string_view, std::size_t>> cols;
  for (auto n : kAttributeNames)
    if (auto c = t.column(n)) cols.emplace_back(n, *c);

  Parsed<CellAttributes> out;
  out.report.rows = t.rows.size();
  for (const auto& row : t.rows) {
    const auto cell = row.fields.size() > c_cell ? csv::parse_int(row.fields[c_cell]) : std::nullopt;
    if (!cell || *cell < 0) {
      out.report.issues.push_back({row.line, "bad cell index"});
      continue;
    }
    CellAttributes a;
    a.cell = static_cast<std::size_t>(*cell);
    bool ok = true;
    for (const auto& [name, c] : cols) {
      if (c >= row.fields.size() || row.fields[c].empty()) continue;
      const auto v = parse_double(row.fields[c]);
      if (!v || !std::isfinite(*v)) {
        out.report.issues.push_back({row.line, "bad " + std::string(name) + " value"});
        ok = false;
        break;
      }
      *a.slot(name) = *v;
    }
    if (!ok) continue;
    if (a.clay && a.silt && a.sand) {
      const double total = *a.clay + *a.silt + *a.sand;
      if (total < 99.0 || total > 101.0) {
        out.report.issues.push_back({row.line, "clay + silt + sand outside [99, 101]"});
        continue;
      }
    }
    if (a.aspect && !(*a.aspect >= 0.0 && *a.aspect < 360.0)) {
      out.report.issues.push_back({row.line, "aspect outside [0, 360)"});
      continue;
    }
    out.records.push_back(a);
  }
  return out;
}

void write_attributes_csv(const std::string& path, std::span<const CellAttributes> rows) {
  auto out = open_out(path);
  out << "cell";
  for (auto n : kAttributeNames) out << ',' << n;
  out << '\n';
  for (const auto& r : rows) {
    out << r.cell;
    for (auto n : kAttributeNames) {
      const auto v = r.get(n);
      out << ',' << (v ? format_double(*v) : std::string());
    }
    out << '\n';
  }
  finish(out, path);
}

namespace {

geometry::Ring ring_from_json(const nlohmann::json& coords) {
  geometry::Ring ring;
  if (!coords.is_array()) throw SchemaError("GeoJSON: ring is not an array");
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
      throw SchemaError("GeoJSON: bad coordinate");
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  return ring;
}

}  // namespace

geometry::FieldBoundary parse_boundary_geojson(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("GeoJSON parse error: ") + e.what());
  }
  const nlohmann::json* geom = &doc;
  if (doc.value("type", "") == "FeatureCollection") {
    if (!doc.contains("features") || doc["features"].empty())
      throw SchemaError("GeoJSON: empty FeatureCollection");
    geom = &doc["features"][0];
  }
  if (geom->value("type", "") == "Feature") {
    if (!geom->contains("geometry")) throw SchemaError("GeoJSON: Feature without geometry");
    geom = &(*geom)["geometry"];
  }
  const std::string type = geom->value("type", "");
  if (type != "Polygon")
    throw SchemaError("GeoJSON: expected Polygon geometry, got '" + type + "'");
  const auto& coords = (*geom)["coordinates"];
  if (!coords.is_array() || coords.empty()) throw SchemaError("GeoJSON: Polygon has no rings");
  geometry::Ring outer = ring_from_json(coords[0]);
  std::vector<geometry::Ring> holes;
  for (std::size_t i = 1; i < coords.size(); ++i) holes.push_back(ring_from_json(coords[i]));
  return geometry::FieldBoundary::make(std::move(outer), std::move(holes));
}

geometry::FieldBoundary read_boundary_geojson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_boundary_geojson(buf.str());
}

void write_boundary_geojson(const std::string& path, const geometry::FieldBoundary& boundary) {
  // Written by hand so coordinates use the same shortest round-trip form as CSVs.
  auto ring_text = [](const geometry::Ring& r) {
    std::string s = "[";
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ",";
      s += "[" + format_double(r[i].x) + "," + format_double(r[i].y) + "]";
    }
    return s + "]";
  };
  auto out = open_out(path);
  out << "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\",\"properties\":{},"
         "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":["
      << ring_text(boundary.ring());
  for (const auto& h : boundary.holes()) out << ',' << ring_text(h);
  out << "]}}]}\n";
  finish(out, path);
}

geometry::BaseGrid read_grid_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_index = t.require_column("index", path);
  const std::size_t c_row = t.require_column("row", path);
  const std::size_t c_col = t.require_column("col", path);
  const std::size_t c_x = t.require_column("center_x", path);
  const std::size_t c_y = t.require_column("center_y", path);
  const std::size_t c_int = t.require_column("interior", path);
  struct Entry {
    std::size_t index, row, col;
    double x, y;
    bool interior;
  };
  std::vector<Entry> entries;
  std::size_t ncols = 0, nrows = 0;
  for (const auto& row : t.rows) {
    auto idx = csv::parse_int(row.fields.at(c_index));
    auto r = csv::parse_int(row.fields.at(c_row));
    auto c = csv::parse_int(row.fields.at(c_col));
    auto x = parse_double(row.fields.at(c_x));
    auto y = parse_double(row.fields.at(c_y));
    auto in = csv::parse_flag(row.fields.at(c_int));
    if (!idx || !r || !c || !x || !y || !in || *idx < 0 || *r < 0 || *c < 0)
      throw SchemaError(path + ":" + std::to_string(row.line) + ": malformed grid row");
    entries.push_back({static_cast<std::size_t>(*idx), static_cast<std::size_t>(*r),
                       static_cast<std::size_t>(*c), *x, *y, *in});
    ncols = std::max(ncols, entries.back().col + 1);
    nrows = std::max(nrows, entries.back().row + 1);
  }
  if (entries.empty()) throw SchemaError(path + ": empty grid");
  if (entries.size() != ncols * nrows) throw SchemaError(path + ": grid is not a full lattice");

  double cell = 0.0;
  const Entry& e0 = entries.front();
  for (const auto& e : entries) {
    if (e.col != e0.col) {
      cell = std::abs((e.x - e0.x) / (static_cast<double>(e.col) - static_cast<double>(e0.col)));
      break;
    }
    if (e.row != e0.row) {
      cell = std::abs((e.y - e0.y) / (static_cast<double>(e.row) - static_cast<double>(e0.row)));
      break;
    }
  }
  if (!(cell > 0.0)) throw SchemaError(path + ": cannot infer cell size from a 1x1 grid");
  // Cell sizes are whole or simple decimals in practice; snap away the
  // rounding left by center arithmetic.
  cell = std::round(cell * 1e6) / 1e6;

  GridKey key;
  key.cell_size = cell;
  key.ncols = ncols;
  key.nrows = nrows;
  key.origin_x = std::round((e0.x - (static_cast<double>(e0.col) + 0.5) * cell) * 1e6) / 1e6;
  key.origin_y = std::round((e0.y - (static_cast<double>(e0.row) + 0.5) * cell) * 1e6) / 1e6;
  std::vector<std::uint8_t> interior(key.cell_count(), 0);
  std::vector<std::uint8_t> seen(key.cell_count(), 0);
  for (const auto& e : entries) {
    if (e.index != e.row * ncols + e.col || seen[e.index])
      throw SchemaError(path + ": inconsistent cell index " + std::to_string(e.index));
    seen[e.index] = 1;
    interior[e.index] = e.interior ? 1 : 0;
  }
  return geometry::BaseGrid(key, std::move(interior));
}

void write_grid_csv(const std::string& path, const geometry::BaseGrid& grid) {
  auto out = open_out(path);
  out << "index,row,col,center_x,center_y,interior\n";
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const auto c = grid.cell(i);
    out << c.index << ',' << c.row << ',' << c.col << ',' << format_double(c.center.x) << ','
        << format_double(c.center.y) << ',' << (c.interior ? 1 : 0) << '\n';
  }
  finish(out, path);
}

Surface read_surface_csv(const std::string& path, const geometry::BaseGrid& grid,
                         std::string_view column) {
  const csv::Table t = csv::read(path);
  const std::size_t c_cell = t.require_column("cell", path);
  std::optional<std::size_t> c_value;
  if (!column.empty()) {
    c_value = t.require_column(column, path);
  } else {
    for (std::string_view name : {"value", "YF", "MC"})
      if ((c_value = t.column(name))) break;
    if (!c_value) throw SchemaError(path + ": no value, YF or MC column");
  }
  Surface s = grid.make_surface();
  for (const auto& row : t.rows) {
    const auto cell = row.fields.size() > c_cell ? csv::parse_int(row.fields[c_cell]) : std::nullopt;
    if (!cell || *cell < 0 || static_cast<std::size_t>(*cell) >= s.size())
      throw SchemaError(path + ":" + std::to_string(row.line) + ": cell index outside grid");
    if (*c_value >= row.fields.size() || row.fields[*c_value].empty()) continue;
    const auto v = parse_double(row.fields[*c_value]);
    if (!v) throw SchemaError(path + ":" + std::to_string(row.line) + ": bad value");
    s[static_cast<std::size_t>(*cell)] = *v;
  }
  return s;
}

}  // namespace zonekit::ingest
