#include "zonekit/geostat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "spatial_index.hpp"
#include "zonekit/parallel.hpp"

namespace zonekit::geostat {

double VariogramModel::operator()(double h) const {
  if (h <= 0.0) return 0.0;
  return nugget + (sill - nugget) * (1.0 - std::exp(-3.0 * h / effective_range));
}

void VariogramModel::validate() const {
  if (!(nugget >= 0.0) || !(sill >= nugget) || !(effective_range > 0.0) || !std::isfinite(sill) ||
      !std::isfinite(effective_range))
    throw ConfigError("variogram: require 0 <= nugget <= sill and effective_range > 0");
}

EmpiricalVariogram empirical_variogram(std::span<const SamplePoint> points, double lag_width,
                                       double max_lag) {
  if (points.size() < 2) throw DataError("variogram: need at least 2 points");
  if (!(lag_width > 0.0)) throw ConfigError("variogram: lag_width must be > 0");
  if (!(max_lag > 0.0)) throw ConfigError("variogram: max_lag must be > 0");
  const bool all_coincident = std::all_of(points.begin(), points.end(), [&](const SamplePoint& p) {
    return p.pos == points.front().pos;
  });
  if (all_coincident) throw DataError("variogram: all points coincide (no spatial structure)");

  const auto nbins = static_cast<std::size_t>(std::ceil(max_lag / lag_width));
  std::vector<double> sum(std::max<std::size_t>(nbins, 1), 0.0);
  std::vector<std::size_t> count(sum.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = distance(points[i].pos, points[j].pos);
      if (d > max_lag) continue;
      const std::size_t b = std::min(static_cast<std::size_t>(d / lag_width), sum.size() - 1);
      const double diff = points[i].value - points[j].value;
      sum[b] += diff * diff;
      ++count[b];
    }
  }
  EmpiricalVariogram emp;
  emp.lag_width = lag_width;
  for (std::size_t b = 0; b < sum.size(); ++b) {
    if (count[b] == 0) continue;
    emp.bins.push_back({(static_cast<double>(b) + 0.5) * lag_width,
                        sum[b] / (2.0 * static_cast<double>(count[b])), count[b]});
  }
  return emp;
}

double fit_objective(const EmpiricalVariogram& emp, const VariogramModel& model) {
  double f = 0.0;
  for (const auto& b : emp.bins) {
    const double r = b.semivariance - model(b.lag);
    f += static_cast<double>(b.pairs) * r * r;
  }
  return f;
}

namespace {

using Vec3 = std::array<double, 3>;

// Parameters live in scaled coordinates u = (nugget, partial sill, range) / scale.
struct FitProblem {
  const EmpiricalVariogram* emp;
  Vec3 scale;
  Vec3 lower;
  Vec3 upper;

  VariogramModel model(const Vec3& u) const {
    VariogramModel m;
    m.nugget = u[0] * scale[0];
    m.sill = m.nugget + u[1] * scale[1];
    m.effective_range = u[2] * scale[2];
    return m;
  }
  Vec3 project(Vec3 u) const {
    for (std::size_t k = 0; k < 3; ++k) u[k] = std::clamp(u[k], lower[k], upper[k]);
    return u;
  }
  double operator()(const Vec3& u) const { return fit_objective(*emp, model(u)); }
};

struct SimplexResult {
  Vec3 best;
  double f;
  std::size_t iterations;
  bool converged;
};

SimplexResult nelder_mead(const FitProblem& prob, Vec3 start, double step, std::size_t max_iter,
                          double ftol, double f_ref) {
  std::array<Vec3, 4> x;
  std::array<double, 4> f;
  x[0] = prob.project(start);
  for (std::size_t k = 0; k < 3; ++k) {
    Vec3 v = x[0];
    v[k] += step * std::max(std::abs(v[k]), 0.1);
    if (v[k] > prob.upper[k]) v[k] = x[0][k] - step * std::max(std::abs(x[0][k]), 0.1);
    x[k + 1] = prob.project(v);
  }
  for (std::size_t i = 0; i < 4; ++i) f[i] = prob(x[i]);

  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::array<Vec3, 4> xs;
    std::array<double, 4> fs;
    for (std::size_t i = 0; i < 4; ++i) {
      xs[i] = x[order[i]];
      fs[i] = f[order[i]];
    }
    x = xs;
    f = fs;

    double diameter = 0.0;
    for (std::size_t i = 1; i < 4; ++i)
      for (std::size_t k = 0; k < 3; ++k) diameter = std::max(diameter, std::abs(x[i][k] - x[0][k]));
    const double spread = f[3] - f[0];
    if (spread <= ftol * std::abs(f[0]) + 1e-15 * f_ref || diameter <= 1e-12)
      return {x[0], f[0], it, true};

    Vec3 centroid{0, 0, 0};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k) centroid[k] += x[i][k] / 3.0;
    auto along = [&](double t) {
      Vec3 v;
      for (std::size_t k = 0; k < 3; ++k) v[k] = centroid[k] + t * (x[3][k] - centroid[k]);
      return prob.project(v);
    };
    const Vec3 xr = along(-1.0);
    const double fr = prob(xr);
    if (fr < f[0]) {
      const Vec3 xe = along(-2.0);
      const double fe = prob(xe);
      if (fe < fr) {
        x[3] = xe;
        f[3] = fe;
      } else {
        x[3] = xr;
        f[3] = fr;
      }
      continue;
    }
    if (fr < f[2]) {
      x[3] = xr;
      f[3] = fr;
      continue;
    }
    const bool outside = fr < f[3];
    const Vec3 xc = along(outside ? -0.5 : 0.5);
    const double fc = prob(xc);
    if (fc < (outside ? fr : f[3])) {
      x[3] = xc;
      f[3] = fc;
      continue;
    }
    for (std::size_t i = 1; i < 4; ++i) {
      Vec3 v;
      for (std::size_t k = 0; k < 3; ++k) v[k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
      x[i] = prob.project(v);
      f[i] = prob(x[i]);
    }
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  return {x[best], f[best], it, false};
}

}  // namespace

VariogramFit fit_exponential(const EmpiricalVariogram& emp, const FitOptions& options) {
  if (emp.bins.size() < 3) throw DataError("variogram fit: need at least 3 non-empty bins");
  double gmax = 0.0, lag_max = 0.0;
  for (const auto& b : emp.bins) {
    gmax = std::max(gmax, b.semivariance);
    lag_max = std::max(lag_max, b.lag);
  }
  if (!(gmax > 0.0)) {
    // Constant field: zero nugget and sill; the range is arbitrary.
    return {{0.0, 0.0, lag_max}, 0.0, 0};
  }

  FitProblem prob{&emp, {gmax, gmax, lag_max}, {0.0, 0.0, 1e-6}, {1e3, 1e3, 1e3}};

  // Heuristic starting points from the bin shape.
  const std::size_t n = emp.bins.size();
  double tail = 0.0;
  const std::size_t tail_from = n - std::max<std::size_t>(1, n / 3);
  for (std::size_t i = tail_from; i < n; ++i) tail += emp.bins[i].semivariance;
  tail /= static_cast<double>(n - tail_from);
  const auto& b0 = emp.bins[0];
  const auto& b1 = emp.bins[1];
  double nug0 = b0.semivariance - (b1.semivariance - b0.semivariance) / (b1.lag - b0.lag) * b0.lag;
  nug0 = std::clamp(nug0, 0.0, tail);
  double range0 = lag_max;
  for (const auto& b : emp.bins)
    if (b.semivariance >= nug0 + 0.95 * (tail - nug0)) {
      range0 = b.lag;
      break;
    }
  const double ps0 = std::max(tail - nug0, 1e-3 * gmax);
  const std::array<Vec3, 4> starts{Vec3{nug0 / gmax, ps0 / gmax, range0 / lag_max},
                                   Vec3{0.0, tail / gmax, range0 / lag_max},
                                   Vec3{nug0 / gmax, ps0 / gmax, 0.5 * range0 / lag_max},
                                   Vec3{0.5 * nug0 / gmax, ps0 / gmax, 2.0 * range0 / lag_max}};

  double f_ref = 0.0;
  for (const auto& b : emp.bins) f_ref += static_cast<double>(b.pairs) * b.semivariance * b.semivariance;

  SimplexResult best{starts[0], std::numeric_limits<double>::infinity(), 0, false};
  std::size_t total_iter = 0;
  bool any_converged = false;
  for (const Vec3& s : starts) {
    SimplexResult r = nelder_mead(prob, s, 0.25, options.max_iterations, options.ftol, f_ref);
    total_iter += r.iterations;
    // Restart from the optimum with a fresh simplex until it stops moving.
    for (std::size_t k = 0; k < options.restarts && r.converged; ++k) {
      SimplexResult again = nelder_mead(prob, r.best, 0.05, options.max_iterations, options.ftol, f_ref);
      total_iter += again.iterations;
      const bool improved = again.f < r.f - options.ftol * std::abs(r.f) - 1e-15 * f_ref;
      if (again.f <= r.f) r = again;
      if (!improved) break;
    }
    any_converged = any_converged || r.converged;
    if (r.f < best.f) best = r;
  }
  VariogramFit fit{prob.model(best.best), best.f, total_iter};
  if (!any_converged) throw FitError("variogram fit did not converge", fit);
  return fit;
}

struct OrdinaryKriger::Impl {
  VariogramModel model;
  KrigingOptions options;
  std::vector<SamplePoint> samples;
  std::vector<Point2> positions;
  std::size_t merged = 0;
  bool global = true;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  std::unique_ptr<detail::PointIndex> index;

  Eigen::MatrixXd system(const std::vector<std::size_t>& support) const {
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd a(k + 1, k + 1);
    for (Eigen::Index i = 0; i < k; ++i) {
      a(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < k; ++j) {
        const double g = model(distance(positions[support[static_cast<std::size_t>(i)]],
                                        positions[support[static_cast<std::size_t>(j)]]));
        a(i, j) = g;
        a(j, i) = g;
      }
      a(i, k) = 1.0;
      a(k, i) = 1.0;
    }
    a(k, k) = 0.0;
    return a;
  }
};

namespace {

void check_factor(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw NumericalError("kriging: singular system (rcond " + std::to_string(rc) + ")");
}

}  // namespace

OrdinaryKriger::OrdinaryKriger(std::span<const SamplePoint> points, const VariogramModel& model,
                               const KrigingOptions& options)
    : impl_(std::make_unique<Impl>()) {
  model.validate();
  impl_->model = model;
  impl_->options = options;
  // Coincident samples are merged; keying on coordinates also fixes the
  // sample order independently of the input order.
  std::map<std::pair<double, double>, std::pair<double, std::size_t>> merged;
  for (const auto& p : points) {
    if (!std::isfinite(p.value) || !std::isfinite(p.pos.x) || !std::isfinite(p.pos.y))
      throw DataError("kriging: non-finite sample");
    auto& slot = merged[{p.pos.x, p.pos.y}];
    slot.first += p.value;
    ++slot.second;
  }
  for (const auto& [pos, acc] : merged) {
    impl_->samples.push_back({{pos.first, pos.second}, acc.first / static_cast<double>(acc.second)});
    impl_->positions.push_back({pos.first, pos.second});
  }
  impl_->merged = points.size() - impl_->samples.size();
  if (impl_->samples.size() < 2) throw DataError("kriging: need at least 2 distinct sample locations");
  if (options.neighbors < 2) throw ConfigError("kriging: neighbors must be >= 2");

  impl_->global = impl_->samples.size() <= options.global_max;
  if (impl_->global) {
    std::vector<std::size_t> all(impl_->samples.size());
    std::iota(all.begin(), all.end(), 0);
    impl_->lu.compute(impl_->system(all));
    check_factor(impl_->lu);
  } else {
    impl_->index = std::make_unique<detail::PointIndex>(impl_->positions);
  }
}

OrdinaryKriger::~OrdinaryKriger() = default;
OrdinaryKriger::OrdinaryKriger(OrdinaryKriger&&) noexcept = default;
OrdinaryKriger& OrdinaryKriger::operator=(OrdinaryKriger&&) noexcept = default;

const std::vector<SamplePoint>& OrdinaryKriger::samples() const { return impl_->samples; }
std::size_t OrdinaryKriger::merged_duplicates() const { return impl_->merged; }
bool OrdinaryKriger::global() const { return impl_->global; }

KrigingPrediction OrdinaryKriger::predict(Point2 target) const {
  const Impl& m = *impl_;
  KrigingPrediction out;
  if (m.global) {
    out.support.resize(m.samples.size());
    std::iota(out.support.begin(), out.support.end(), 0);
  } else {
    out.support = m.index->nearest(target, std::min(m.options.neighbors, m.samples.size()));
  }
  const auto k = static_cast<Eigen::Index>(out.support.size());
  Eigen::VectorXd rhs(k + 1);
  for (Eigen::Index i = 0; i < k; ++i)
    rhs(i) = m.model(distance(target, m.positions[out.support[static_cast<std::size_t>(i)]]));
  rhs(k) = 1.0;

  Eigen::VectorXd sol;
  if (m.global) {
    sol = m.lu.solve(rhs);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.system(out.support));
    check_factor(lu);
    sol = lu.solve(rhs);
  }
  out.weights.resize(static_cast<std::size_t>(k));
  double est = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    out.weights[static_cast<std::size_t>(i)] = sol(i);
    est += sol(i) * m.samples[out.support[static_cast<std::size_t>(i)]].value;
  }
  out.lagrange = sol(k);
  out.estimate = est;
  out.variance = std::max(0.0, sol.head(k).dot(rhs.head(k)) + out.lagrange);
  if (!std::isfinite(out.estimate)) throw NumericalError("kriging: non-finite estimate");
  return out;
}

KrigingResult ordinary_krige(std::span<const SamplePoint> points, const VariogramModel& model,
                             const geometry::BaseGrid& grid, const KrigingOptions& options) {
  const OrdinaryKriger kriger(points, model, options);
  KrigingResult res;
  res.estimate = grid.make_surface();
  res.variance = grid.make_surface();
  res.merged_duplicates = kriger.merged_duplicates();
  res.global_neighborhood = kriger.global();
  const auto& cells = grid.interior_cells();
  std::vector<double> sum_error(cells.size(), 0.0);
  parallel_for(cells.size(), [&](std::size_t i) {
    const std::size_t cell = cells[i];
    const KrigingPrediction p = kriger.predict(grid.center(cell));
    res.estimate[cell] = p.estimate;
    res.variance[cell] = p.variance;
    const double w = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
    sum_error[i] = std::abs(w - 1.0);
  });
  for (double e : sum_error) res.max_weight_sum_error = std::max(res.max_weight_sum_error, e);
  return res;
}

Surface idw(std::span<const SamplePoint> points, const geometry::BaseGrid& grid,
            const IdwOptions& options) {
  if (!(options.power > 0.0)) throw ConfigError("idw: power must be > 0");
  if (!(options.radius > 0.0)) throw ConfigError("idw: radius must be > 0");
  Surface out = grid.make_surface();
  if (points.empty()) return out;
  std::vector<Point2> pos;
  pos.reserve(points.size());
  for (const auto& p : points) pos.push_back(p.pos);
  const bool unbounded = std::isinf(options.radius);
  std::unique_ptr<detail::PointIndex> index;
  if (!unbounded) index = std::make_unique<detail::PointIndex>(pos);

  const auto& cells = grid.interior_cells();
  parallel_for(cells.size(), [&](std::size_t i) {
    const std::size_t cell = cells[i];
    const Point2 c = grid.center(cell);
    std::vector<std::size_t> hits;
    if (unbounded) {
      hits.resize(points.size());
      std::iota(hits.begin(), hits.end(), 0);
    } else {
      hits = index->within(c, options.radius);
    }
    if (hits.empty()) return;
    double zero_sum = 0.0;
    std::size_t zero_count = 0;
    double num = 0.0, den = 0.0;
    for (std::size_t h : hits) {
      const double d = distance(c, pos[h]);
      if (d == 0.0) {
        zero_sum += points[h].value;
        ++zero_count;
        continue;
      }
      const double w = std::pow(d, -options.power);
      num += w * points[h].value;
      den += w;
    }
    out[cell] = zero_count > 0 ? zero_sum / static_cast<double>(zero_count) : num / den;
  });
  return out;
}

Surface convolve_mean(const Surface& surface, const geometry::BaseGrid& grid, double radius) {
  if (!(surface.grid == grid.key())) throw DataError("convolve_mean: surface is on another grid");
  if (!(radius >= 0.0)) throw ConfigError("convolve_mean: radius must be >= 0");
  const double cs = grid.cell_size();
  const auto reach = static_cast<long>(std::floor(radius / cs));
  std::vector<std::pair<long, long>> offsets;
  for (long dr = -reach; dr <= reach; ++dr)
    for (long dc = -reach; dc <= reach; ++dc)
      if (std::hypot(static_cast<double>(dr), static_cast<double>(dc)) * cs <= radius + 1e-9)
        offsets.emplace_back(dr, dc);

  Surface out = grid.make_surface();
  const auto nrows = static_cast<long>(grid.nrows());
  const auto ncols = static_cast<long>(grid.ncols());
  parallel_for(surface.size(), [&](std::size_t cell) {
    if (!surface.has(cell)) return;
    const auto [row, col] = grid.row_col(cell);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [dr, dc] : offsets) {
      const long r = static_cast<long>(row) + dr;
      const long c = static_cast<long>(col) + dc;
      if (r < 0 || c < 0 || r >= nrows || c >= ncols) continue;
      const double v = surface[grid.index(static_cast<std::size_t>(r), static_cast<std::size_t>(c))];
      if (std::isnan(v)) continue;
      sum += v;
      ++n;
    }
    out[cell] = sum / static_cast<double>(n);
  });
  return out;
}

}  // namespace zonekit::geostat
