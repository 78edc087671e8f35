#include "zonekit/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "zonekit/error.hpp"

namespace zonekit::synth {

namespace {

constexpr double kOriginX = 500000.0;
constexpr double kOriginY = 200000.0;

geometry::Ring box(double x0, double y0, double x1, double y1) {
  return {{kOriginX + x0, kOriginY + y0}, {kOriginX + x1, kOriginY + y0},
          {kOriginX + x1, kOriginY + y1}, {kOriginX + x0, kOriginY + y1}};
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  auto orient = [](Point2 p, Point2 q, Point2 r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  // Proper crossings only; shared edges between touching zones are allowed.
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool strictly_inside(Point2 p, const geometry::FieldBoundary& poly) {
  return geometry::point_in_polygon(p, poly) && geometry::distance_to_boundary(p, poly) > 1e-9;
}

bool overlaps(const geometry::FieldBoundary& a, const geometry::FieldBoundary& b) {
  const auto& ra = a.ring();
  const auto& rb = b.ring();
  for (std::size_t i = 0; i + 1 < ra.size(); ++i) {
    for (std::size_t j = 0; j + 1 < rb.size(); ++j) {
      if (segments_cross(ra[i], ra[i + 1], rb[j], rb[j + 1])) return true;
    }
  }
  for (const auto& p : ra) {
    if (strictly_inside(p, b)) return true;
  }
  for (const auto& p : rb) {
    if (strictly_inside(p, a)) return true;
  }
  // Identical or nested-with-shared-vertices rings: test a centroid-ish point.
  Point2 c{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < ra.size(); ++i) c = {c.x + ra[i].x, c.y + ra[i].y};
  const double n = static_cast<double>(ra.size() - 1);
  c = {c.x / n, c.y / n};
  return strictly_inside(c, a) && strictly_inside(c, b);
}

double zone_offset(const PlantedZone& zone, std::size_t year) {
  switch (zone.kind) {
    case Stability::high_stable: return zone.effect;
    case Stability::low_stable: return -zone.effect;
    case Stability::unstable: return year % 2 == 0 ? zone.effect : -zone.effect;
  }
  return 0.0;
}

int zone_at(Point2 p, const std::vector<geometry::FieldBoundary>& zones) {
  for (std::size_t z = 0; z < zones.size(); ++z) {
    if (geometry::point_in_polygon(p, zones[z])) return static_cast<int>(z);
  }
  return -1;
}

std::vector<geometry::FieldBoundary> zone_polygons(const SynthSpec& spec) {
  std::vector<geometry::FieldBoundary> out;
  for (const auto& z : spec.zones) out.push_back(geometry::FieldBoundary::make(z.polygon));
  return out;
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

void SynthSpec::validate() const {
  if (!seed) throw ConfigError("synth spec needs a seed");
  require_probability(spike_probability, "spike_probability");
  require_probability(flag_probability, "flag_probability");
  require_probability(cloud_fraction, "cloud_fraction");
  require_probability(edge_factor, "edge_factor");
  if (years == 0) throw ConfigError("synth spec needs at least one year");
  if (!year_means.empty() && year_means.size() != years) {
    throw ConfigError("year_means must have one entry per year");
  }
  if (!(noise_nugget >= 0.0) || !(noise_sill >= noise_nugget)) {
    throw ConfigError("noise needs 0 <= nugget <= sill");
  }
  if (noise_sill > noise_nugget && !(noise_range > 0.0)) throw ConfigError("noise range must be positive");
  if (!(swath > 0.0) || !(sample_spacing > 0.0) || !(sample_interval_s > 0.0)) {
    throw ConfigError("swath, sample spacing and interval must be positive");
  }
  if (!(cell_size > 0.0) || !(border >= 0.0) || !(edge_width >= 0.0) || !(spike_factor > 0.0)) {
    throw ConfigError("invalid synth geometry parameters");
  }
  if (!(scene_noise >= 0.0)) throw ConfigError("scene_noise must be non-negative");
  for (double m : scene_ndvi) {
    if (!(m > -1.0 && m < 1.0)) throw ConfigError("scene NDVI targets must lie in (-1, 1)");
  }
  const auto boundary = geometry::FieldBoundary::make(field);
  const auto zones = zone_polygons(*this);
  for (std::size_t i = 0; i < zones.size(); ++i) {
    for (const auto& p : zones[i].ring()) {
      if (!geometry::point_in_polygon(p, boundary)) throw ConfigError("planted zone lies outside the field");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (overlaps(zones[i], zones[j])) throw ConfigError("planted zones overlap");
    }
  }
}

SynthSpec benchmark_spec(std::uint64_t seed) {
  SynthSpec s = zero_noise_spec(seed);
  s.noise_nugget = 0.42;
  s.noise_sill = 1.02;
  s.noise_range = 180.0;
  s.spike_probability = 0.01;
  s.flag_probability = 0.002;
  s.year_means = {8.0, 7.4, 8.6, 7.8, 8.3, 7.6, 8.1};
  return s;
}

SynthSpec zero_noise_spec(std::uint64_t seed) {
  SynthSpec s;
  s.field = box(0, 0, 840, 540);
  s.zones = {
      {Stability::high_stable, box(60, 60, 360, 300), 2.0},
      {Stability::low_stable, box(460, 60, 760, 300), 2.0},
      {Stability::unstable, box(300, 360, 500, 480), 2.0},
  };
  s.seed = seed;
  return s;
}

NoiseField::NoiseField(const geometry::BBox& bbox, double nugget, double sill, double range, double spacing)
    : nugget_(nugget) {
  const double psill = sill - nugget;
  enabled_ = sill > 0.0;
  if (!enabled_ || !(psill > 0.0)) return;
  const double area = bbox.width() * bbox.height();
  spacing_ = spacing > 0.0 ? spacing : std::max(range / 12.0, std::sqrt(area / 2000.0));
  for (;;) {
    nx_ = static_cast<std::size_t>(std::ceil(bbox.width() / spacing_)) + 3;
    ny_ = static_cast<std::size_t>(std::ceil(bbox.height() / spacing_)) + 3;
    if (nx_ * ny_ <= 2500) break;
    spacing_ *= 1.1;
  }
  x0_ = bbox.min_x - spacing_;
  y0_ = bbox.min_y - spacing_;
  const auto n = static_cast<Eigen::Index>(nx_ * ny_);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double ax = static_cast<double>(a % static_cast<Eigen::Index>(nx_));
    const double ay = static_cast<double>(a / static_cast<Eigen::Index>(nx_));
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double bx = static_cast<double>(b % static_cast<Eigen::Index>(nx_));
      const double by = static_cast<double>(b / static_cast<Eigen::Index>(nx_));
      const double h = std::hypot(ax - bx, ay - by) * spacing_;
      cov(a, b) = cov(b, a) = psill * std::exp(-3.0 * h / range);
    }
    cov(a, a) += 1e-10 * psill;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("noise covariance is not positive definite");
  factor_ = llt.matrixL();
}

std::vector<double> NoiseField::sample(std::span<const Point2> points, Rng& rng) const {
  std::vector<double> out(points.size(), 0.0);
  if (!enabled_) return out;
  if (factor_.size() > 0) {
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(rng);
    const Eigen::VectorXd lattice = factor_.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double fx = (points[i].x - x0_) / spacing_;
      const double fy = (points[i].y - y0_) / spacing_;
      const auto ix = static_cast<std::size_t>(std::clamp(std::floor(fx), 0.0, static_cast<double>(nx_ - 2)));
      const auto iy = static_cast<std::size_t>(std::clamp(std::floor(fy), 0.0, static_cast<double>(ny_ - 2)));
      const double tx = std::clamp(fx - static_cast<double>(ix), 0.0, 1.0);
      const double ty = std::clamp(fy - static_cast<double>(iy), 0.0, 1.0);
      auto node = [&](std::size_t cx, std::size_t cy) {
        return lattice(static_cast<Eigen::Index>(cy * nx_ + cx));
      };
      out[i] = (1 - tx) * (1 - ty) * node(ix, iy) + tx * (1 - ty) * node(ix + 1, iy) +
               (1 - tx) * ty * node(ix, iy + 1) + tx * ty * node(ix + 1, iy + 1);
    }
  }
  if (nugget_ > 0.0) {
    const double sd = std::sqrt(nugget_);
    for (auto& v : out) v += sd * standard_normal(rng);
  }
  return out;
}

std::vector<Point2> combine_path(const geometry::FieldBoundary& boundary, double swath, double spacing) {
  const auto bb = boundary.bbox();
  std::vector<Point2> path;
  std::size_t pass = 0;
  for (double y = bb.min_y + swath / 2.0; y < bb.max_y; y = bb.min_y + swath / 2.0 + swath * static_cast<double>(++pass)) {
    const auto steps = static_cast<std::size_t>(std::floor(bb.width() / spacing));
    for (std::size_t k = 0; k <= steps; ++k) {
      const std::size_t s = pass % 2 == 0 ? k : steps - k;
      const Point2 p{bb.min_x + static_cast<double>(s) * spacing, y};
      if (geometry::point_in_polygon(p, boundary)) path.push_back(p);
    }
  }
  return path;
}

SynthField generate_field_years(const SynthSpec& spec) {
  spec.validate();
  const std::uint64_t seed = *spec.seed;
  auto boundary = geometry::FieldBoundary::make(spec.field);
  auto grid = geometry::build_grid(boundary, spec.cell_size, spec.border);
  const auto zones = zone_polygons(spec);

  SynthField out{boundary, grid, {}, {}, {}};
  out.truth.assign(grid.cell_count(), Stability::unstable);
  out.zone_of.assign(grid.cell_count(), -1);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const int z = zone_at(grid.center(c), zones);
    out.zone_of[c] = z;
    if (z >= 0) out.truth[c] = spec.zones[static_cast<std::size_t>(z)].kind;
  }

  const auto path = combine_path(boundary, spec.swath, spec.sample_spacing);
  std::vector<int> path_zone(path.size());
  std::vector<std::uint8_t> near_edge(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    path_zone[i] = zone_at(path[i], zones);
    near_edge[i] = geometry::distance_to_boundary(path[i], boundary) < spec.edge_width;
  }

  const NoiseField noise(boundary.bbox(), spec.noise_nugget, spec.noise_sill, spec.noise_range,
                         spec.lattice_spacing);
  using namespace std::chrono;
  const auto start = sys_days{year{2019} / August / 1} + hours{9};
  const auto step = milliseconds{static_cast<long long>(std::llround(spec.sample_interval_s * 1000.0))};

  for (std::size_t y = 0; y < spec.years; ++y) {
    Rng noise_rng(derive_seed(seed, 100 + y));
    Rng artifact_rng(derive_seed(seed, 200 + y));
    const auto values = noise.sample(path, noise_rng);
    const double mean = spec.year_means.empty() ? spec.base_yield : spec.year_means[y];
    FieldYear fy{y, {}};
    fy.records.reserve(path.size());
    auto t = time_point_cast<milliseconds>(start + days{365 * static_cast<long>(y)});
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0 && path[i].y != path[i - 1].y) t += seconds{20};  // headland turn
      double v = mean + values[i];
      if (path_zone[i] >= 0) v += zone_offset(spec.zones[static_cast<std::size_t>(path_zone[i])], y);
      if (near_edge[i]) v *= spec.edge_factor;
      const double spike_u = uniform01(artifact_rng);
      const double flag_u = uniform01(artifact_rng);
      const double junk = uniform(artifact_rng, 0.0, 2.0 * spec.base_yield);
      if (spike_u < spec.spike_probability) v *= spec.spike_factor;
      const bool flagged = flag_u < spec.flag_probability;
      if (flagged) v = junk;
      fy.records.push_back({t, path[i].x, path[i].y, v, flagged});
      t += step;
    }
    out.years.push_back(std::move(fy));
  }
  return out;
}

std::vector<ingest::BandPixel> generate_scene(const SynthSpec& spec, const SynthField& field,
                                              std::size_t scene) {
  if (scene >= spec.scene_ndvi.size()) throw ConfigError("scene index out of range");
  const auto& grid = field.grid;
  Rng rng(derive_seed(*spec.seed, 300 + scene));
  const double target = spec.scene_ndvi[scene];

  std::vector<double> ndvi(grid.cell_count());
  std::vector<std::uint8_t> inside(grid.cell_count());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    double vigor = 0.0;
    const int z = field.zone_of[c];
    if (z >= 0) {
      const auto& zone = spec.zones[static_cast<std::size_t>(z)];
      vigor = zone_offset(zone, scene) / std::max(zone.effect, 1e-12);
    }
    ndvi[c] = target + 0.08 * vigor + spec.scene_noise * standard_normal(rng);
    inside[c] = geometry::point_in_polygon(grid.center(c), field.boundary);
    if (inside[c]) {
      sum += ndvi[c];
      ++count;
    }
  }
  const double shift = count > 0 ? target - sum / static_cast<double>(count) : 0.0;
  for (auto& v : ndvi) v = std::clamp(v + shift, 0.02, 0.95);

  std::vector<ingest::BandPixel> pixels(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double n = ndvi[c];
    const double nir = 0.2 + 0.3 * n;
    const double red = nir * (1.0 - n) / (1.0 + n);
    auto& px = pixels[c];
    px.pos = grid.center(c);
    px[ingest::Band::nir] = nir;
    px[ingest::Band::red] = red;
    px[ingest::Band::green] = 0.35 * (red + nir);
    px[ingest::Band::blue] = 0.6 * red;
  }
  // Red-edge has twice the pixel size: one value per 2 x 2 block.
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto [r, col] = grid.row_col(c);
    const std::size_t r0 = r - r % 2;
    const std::size_t c0 = col - col % 2;
    double acc = 0.0;
    int k = 0;
    for (std::size_t rr = r0; rr < std::min(r0 + 2, grid.nrows()); ++rr) {
      for (std::size_t cc = c0; cc < std::min(c0 + 2, grid.ncols()); ++cc) {
        const auto& q = pixels[grid.index(rr, cc)];
        acc += 0.5 * (q[ingest::Band::red] + q[ingest::Band::nir]);
        ++k;
      }
    }
    pixels[c][ingest::Band::red_edge] = acc / k;
  }
  for (auto& px : pixels) {
    const double u = uniform01(rng);
    const double prob = uniform01(rng);
    if (u < spec.cloud_fraction) {
      px.cloud_probability = 0.3 + 0.7 * prob;
      for (auto& b : px.bands) b = 0.4;
    } else {
      px.cloud_probability = 0.05 * prob;
    }
  }
  return pixels;
}

RecoveryScore score_zone_recovery(std::span<const Stability> predicted, std::span<const Stability> truth,
                                  std::span<const std::uint8_t> mask) {
  if (predicted.size() != truth.size()) throw DataError("zone maps differ in length");
  if (!mask.empty() && mask.size() != truth.size()) throw DataError("mask length differs from zone maps");
  RecoveryScore out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const auto p = static_cast<std::size_t>(predicted[i]);
    const auto t = static_cast<std::size_t>(truth[i]);
    if (p == t) {
      ++out.classes[p].true_positive;
    } else {
      ++out.classes[p].false_positive;
      ++out.classes[t].false_negative;
    }
  }
  for (auto& c : out.classes) {
    const auto tp = static_cast<double>(c.true_positive);
    const std::size_t pred = c.true_positive + c.false_positive;
    const std::size_t real = c.true_positive + c.false_negative;
    const std::size_t uni = c.true_positive + c.false_positive + c.false_negative;
    c.precision = pred == 0 ? 1.0 : tp / static_cast<double>(pred);
    c.recall = real == 0 ? 1.0 : tp / static_cast<double>(real);
    c.iou = uni == 0 ? 1.0 : tp / static_cast<double>(uni);
  }
  return out;
}

}  // namespace zonekit::synth
