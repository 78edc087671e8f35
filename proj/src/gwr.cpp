#include "zonekit/gwr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "zonekit/csv.hpp"
#include "zonekit/error.hpp"
#include "zonekit/parallel.hpp"

namespace zonekit::gwr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Radius beyond which the kernel falls under kWeightFloor.
double cutoff_radius(double bandwidth) { return bandwidth * std::sqrt(2.0 * std::log(1.0 / kWeightFloor)); }

double mean_of(const Eigen::VectorXd& v) { return v.sum() / static_cast<double>(v.size()); }

double population_sd(const Eigen::VectorXd& v) {
  const double m = mean_of(v);
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size()));
}

struct Neighborhood {
  std::vector<std::size_t> rows;
  std::vector<double> weights;
};

Neighborhood neighborhood(const GwrDesign& design, std::size_t row, double bandwidth,
                          bool exclude_self) {
  Neighborhood nb;
  const auto& grid = design.grid();
  const double radius = cutoff_radius(bandwidth);
  const auto [r0, c0] = grid.row_col(design.cells()[row]);
  const long reach = static_cast<long>(std::ceil(radius / grid.cell_size())) + 1;
  const long nrows = static_cast<long>(grid.nrows());
  const long ncols = static_cast<long>(grid.ncols());
  const long rlo = std::max(0L, static_cast<long>(r0) - reach);
  const long rhi = std::min(nrows - 1, static_cast<long>(r0) + reach);
  const long clo = std::max(0L, static_cast<long>(c0) - reach);
  const long chi = std::min(ncols - 1, static_cast<long>(c0) + reach);
  for (long r = rlo; r <= rhi; ++r) {
    for (long c = clo; c <= chi; ++c) {
      const long other = design.row_of(grid.index(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
      if (other < 0) continue;
      const auto j = static_cast<std::size_t>(other);
      if (exclude_self && j == row) continue;
      const double w = gaussian_weight(design.distance(row, j), bandwidth);
      if (w <= 0.0) continue;
      nb.rows.push_back(j);
      nb.weights.push_back(w);
    }
  }
  return nb;
}

LocalFit fit_subset(const GwrDesign& design, std::size_t row, std::span<const std::size_t> rows,
                    std::span<const double> weights) {
  LocalFit fit;
  const std::size_t k = design.predictor_count() + 1;
  const auto& x = design.x();
  const auto& y = design.y();
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  fit.weight_sum = wsum;
  if (!(wsum > static_cast<double>(k)) || rows.size() < k) return fit;

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd a(m, static_cast<Eigen::Index>(k));
  Eigen::VectorXd b(m);
  double ybar = 0.0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const double sw = std::sqrt(weights[t]);
    a.row(t) = sw * x.row(static_cast<Eigen::Index>(rows[t]));
    b(t) = sw * y(static_cast<Eigen::Index>(rows[t]));
    ybar += weights[t] * y(static_cast<Eigen::Index>(rows[t]));
  }
  ybar /= wsum;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < static_cast<Eigen::Index>(k)) return fit;
  fit.beta = qr.solve(b);
  if (!fit.beta.allFinite()) return fit;

  double ssr = 0.0;
  double sst = 0.0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto j = static_cast<Eigen::Index>(rows[t]);
    const double res = y(j) - x.row(j).dot(fit.beta);
    ssr += weights[t] * res * res;
    const double dev = y(j) - ybar;
    sst += weights[t] * dev * dev;
  }
  if (sst > 0.0) fit.r2 = std::clamp(1.0 - ssr / sst, 0.0, 1.0);

  const Eigen::VectorXd xi = x.row(static_cast<Eigen::Index>(row)).transpose();
  fit.fitted = xi.dot(fit.beta);
  // h_ii = w_ii x_i' (A'A)^-1 x_i with A'A = P R'R P'.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::VectorXd px = qr.colsPermutation().transpose() * xi;
  const Eigen::VectorXd v = r.transpose().triangularView<Eigen::Lower>().solve(px);
  double self_w = 0.0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t] == row) self_w = weights[t];
  }
  fit.leverage = self_w * v.squaredNorm();
  fit.ok = true;
  return fit;
}

std::vector<LocalFit> fit_all(const GwrDesign& design, double bandwidth, bool exclude_self) {
  std::vector<LocalFit> fits(design.size());
  parallel_for(design.size(), [&](std::size_t i) {
    const auto nb = neighborhood(design, i, bandwidth, exclude_self);
    fits[i] = fit_subset(design, i, nb.rows, nb.weights);
  });
  return fits;
}

void require_bandwidth(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("GWR bandwidth must be positive and finite");
  }
}

}  // namespace

GwrDesign GwrDesign::make(const geometry::BaseGrid& grid, const Surface& response,
                          std::vector<Predictor> predictors, std::string response_name) {
  if (predictors.empty()) throw DataError("GWR design needs at least one predictor");
  require_same_grid(grid.key(), response.grid, "GWR response");
  for (const auto& p : predictors) {
    require_same_grid(grid.key(), p.surface.grid, "GWR predictor " + p.name);
    for (const auto& q : predictors) {
      if (&p != &q && csv::lower(p.name) == csv::lower(q.name)) {
        throw DataError("duplicate GWR predictor name: " + p.name);
      }
    }
  }

  GwrDesign d{grid, response, std::move(response_name), std::move(predictors)};
  d.row_of_.assign(grid.cell_count(), -1);
  for (std::size_t cell : grid.interior_cells()) {
    if (!response.has(cell)) continue;
    bool ok = true;
    for (const auto& p : d.predictors_) ok = ok && p.surface.has(cell);
    if (!ok) continue;
    d.row_of_[cell] = static_cast<long>(d.cells_.size());
    d.cells_.push_back(cell);
  }
  const auto n = static_cast<Eigen::Index>(d.cells_.size());
  const auto p = static_cast<Eigen::Index>(d.predictors_.size());
  if (n < p + 2) throw DataError("GWR design has too few usable cells");

  d.y_.resize(n);
  d.raw_.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t cell = d.cells_[static_cast<std::size_t>(i)];
    d.y_(i) = response[cell];
    for (Eigen::Index k = 0; k < p; ++k) d.raw_(i, k) = d.predictors_[static_cast<std::size_t>(k)].surface[cell];
  }
  if (d.y_.maxCoeff() == d.y_.minCoeff()) throw DataError("degenerate GWR design: constant response");

  d.means_.resize(p);
  d.sds_.resize(p);
  d.x_.resize(n, p + 1);
  d.x_.col(0).setOnes();
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::VectorXd col = d.raw_.col(k);
    d.means_(k) = mean_of(col);
    d.sds_(k) = population_sd(col);
    if (col.maxCoeff() == col.minCoeff()) {
      throw DataError("GWR predictor is constant: " + d.predictors_[static_cast<std::size_t>(k)].name);
    }
    d.x_.col(k + 1) = (col.array() - d.means_(k)) / d.sds_(k);
  }
  return d;
}

std::vector<std::string> GwrDesign::names() const {
  std::vector<std::string> out;
  for (const auto& p : predictors_) out.push_back(p.name);
  return out;
}

std::optional<std::size_t> GwrDesign::predictor_index(std::string_view name) const {
  const std::string want = csv::lower(name);
  for (std::size_t k = 0; k < predictors_.size(); ++k) {
    if (csv::lower(predictors_[k].name) == want) return k;
  }
  return std::nullopt;
}

double GwrDesign::distance(std::size_t a, std::size_t b) const {
  return grid_.cell_distance(cells_[a], cells_[b]);
}

std::vector<std::size_t> GwrDesign::rows_within(std::size_t row, double radius) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (distance(row, j) <= radius) out.push_back(j);
  }
  return out;
}

double gaussian_weight(double d, double bandwidth) {
  require_bandwidth(bandwidth);
  const double w = std::exp(-(d * d) / (2.0 * bandwidth * bandwidth));
  return w < kWeightFloor ? 0.0 : w;
}

std::vector<double> gaussian_weights(const GwrDesign& design, std::size_t row, double bandwidth) {
  std::vector<double> w(design.size());
  for (std::size_t j = 0; j < design.size(); ++j) w[j] = gaussian_weight(design.distance(row, j), bandwidth);
  return w;
}

LocalFit fit_local(const GwrDesign& design, std::size_t row, std::span<const double> weights) {
  if (weights.size() != design.size()) throw DataError("weight vector length does not match design");
  std::vector<std::size_t> rows;
  std::vector<double> w;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) {
      rows.push_back(j);
      w.push_back(weights[j]);
    }
  }
  return fit_subset(design, row, rows, w);
}

GoldenResult golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ConfigError("golden section needs lo < hi");
  if (!(tol > 0.0)) throw ConfigError("golden section tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  GoldenResult out;
  bool any_finite = false;
  auto eval = [&](double x) {
    ++out.evaluations;
    const double v = f(x);
    if (std::isfinite(v)) {
      any_finite = true;
      return v;
    }
    return kInf;
  };

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  if (!any_finite) throw NumericalError("objective is non-finite across the whole search interval");

  if (fc <= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  // A bracket end that never moved: the minimum sits at the boundary.
  if (a == lo) {
    out.x = lo;
  } else if (b == hi) {
    out.x = hi;
  }
  return out;
}

std::size_t golden_evaluation_bound(double lo, double hi, double tol) {
  const double rho = (std::sqrt(5.0) - 1.0) / 2.0;
  const double ratio = (hi - lo) / tol;
  if (ratio <= 1.0) return 2;
  return static_cast<std::size_t>(std::ceil(std::log(ratio) / std::log(1.0 / rho))) + 2;
}

double cv_score(const GwrDesign& design, double bandwidth) {
  require_bandwidth(bandwidth);
  const auto fits = fit_all(design, bandwidth, true);
  double total = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].ok) return kInf;
    const double res = design.y()(static_cast<Eigen::Index>(i)) - fits[i].fitted;
    total += res * res;
  }
  return total;
}

double aicc_score(const GwrDesign& design, double bandwidth) {
  require_bandwidth(bandwidth);
  const auto fits = fit_all(design, bandwidth, false);
  double rss = 0.0;
  double trace = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].ok) return kInf;
    const double res = design.y()(static_cast<Eigen::Index>(i)) - fits[i].fitted;
    rss += res * res;
    trace += fits[i].leverage;
  }
  const auto n = static_cast<double>(design.size());
  if (!(rss > 0.0) || !(n - 2.0 - trace > 0.0)) return kInf;
  const double sigma = std::sqrt(rss / n);
  return 2.0 * n * std::log(sigma) + n * std::log(2.0 * std::numbers::pi) +
         n * (n + trace) / (n - 2.0 - trace);
}

GoldenResult golden_search_bandwidth(const GwrDesign& design, double b_min, double b_max, double tol,
                                     Objective objective) {
  if (!(b_min < b_max)) throw ConfigError("bandwidth search needs b_min < b_max");
  if (b_min < design.grid().cell_size()) throw ConfigError("bandwidth search needs b_min >= cell size");
  auto f = [&](double b) { return objective == Objective::cv ? cv_score(design, b) : aicc_score(design, b); };
  return golden_section(f, b_min, b_max, tol);
}

std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::persistent: return "persistent";
    case Zone::incidental: return "incidental";
    case Zone::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Zone classify_cell(double beta_prior, double beta_yf, double r2, const ZoneOptions& options) {
  if (is_missing(r2) || r2 < options.r2_min || !std::isfinite(beta_prior) || !std::isfinite(beta_yf)) {
    return Zone::indeterminate;
  }
  const double ratio = std::abs(beta_yf) / (std::abs(beta_prior) + 1e-12);
  return ratio >= options.ratio_threshold ? Zone::persistent : Zone::incidental;
}

std::vector<Zone> classify_zones(const GwrResult& result, const ZoneOptions& options) {
  const auto yf = result.design.predictor_index(options.yf_name);
  const auto prior = result.design.predictor_index(options.prior_name);
  if (!yf) throw ConfigError("GWR design has no predictor named " + options.yf_name);
  if (!prior) throw ConfigError("GWR design has no predictor named " + options.prior_name);
  std::vector<Zone> zones(result.design.size(), Zone::indeterminate);
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (!result.defined[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    zones[i] = classify_cell(result.beta_std(row, static_cast<Eigen::Index>(*prior + 1)),
                             result.beta_std(row, static_cast<Eigen::Index>(*yf + 1)),
                             result.r2(row), options);
  }
  return zones;
}

GwrResult gwr_fit(const GwrDesign& design, const GwrOptions& options) {
  GwrResult out(design);
  out.objective = options.objective;
  if (options.bandwidth) {
    require_bandwidth(*options.bandwidth);
    out.bandwidth = *options.bandwidth;
    out.score = options.objective == Objective::cv ? cv_score(design, out.bandwidth)
                                                   : aicc_score(design, out.bandwidth);
  } else {
    const double lo = options.b_min > 0.0 ? options.b_min : 2.0 * design.grid().cell_size();
    const double hi = options.b_max > 0.0 ? options.b_max : design.grid().bbox().diagonal();
    const auto search = golden_search_bandwidth(design, lo, hi, options.tol, options.objective);
    out.bandwidth = search.x;
    // An endpoint result was never evaluated by the search itself.
    out.score = search.x == lo || search.x == hi
                    ? (options.objective == Objective::cv ? cv_score(design, search.x)
                                                          : aicc_score(design, search.x))
                    : search.value;
    out.evaluations = search.evaluations;
    out.searched = true;
  }

  const auto n = static_cast<Eigen::Index>(design.size());
  const auto k = static_cast<Eigen::Index>(design.predictor_count() + 1);
  const double nan = kMissing;
  out.beta_std = Eigen::MatrixXd::Constant(n, k, nan);
  out.beta_raw = Eigen::MatrixXd::Constant(n, k, nan);
  out.fitted = Eigen::VectorXd::Constant(n, nan);
  out.r2 = Eigen::VectorXd::Constant(n, nan);
  out.defined.assign(design.size(), 0);

  const auto fits = fit_all(design, out.bandwidth, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& fit = fits[static_cast<std::size_t>(i)];
    if (!fit.ok) continue;
    out.defined[static_cast<std::size_t>(i)] = 1;
    out.beta_std.row(i) = fit.beta.transpose();
    double intercept = fit.beta(0);
    for (Eigen::Index c = 1; c < k; ++c) {
      const double raw = fit.beta(c) / design.sds()(c - 1);
      out.beta_raw(i, c) = raw;
      intercept -= raw * design.means()(c - 1);
    }
    out.beta_raw(i, 0) = intercept;
    out.fitted(i) = fit.fitted;
    out.r2(i) = fit.r2;
  }
  // Zones need both the YF and the prior-scene predictor; other designs
  // are left unlabelled.
  if (design.predictor_index(options.zones.yf_name) && design.predictor_index(options.zones.prior_name)) {
    out.zones = classify_zones(out, options.zones);
  } else {
    out.zones.assign(design.size(), Zone::indeterminate);
  }
  return out;
}

namespace {

Surface scatter(const GwrDesign& design, const Eigen::VectorXd& values) {
  Surface s = design.grid().make_surface();
  for (std::size_t i = 0; i < design.size(); ++i) s[design.cells()[i]] = values(static_cast<Eigen::Index>(i));
  return s;
}

}  // namespace

Surface GwrResult::coefficient_surface(std::size_t column, bool standardized) const {
  if (column > design.predictor_count()) throw DataError("coefficient column out of range");
  const auto& m = standardized ? beta_std : beta_raw;
  return scatter(design, m.col(static_cast<Eigen::Index>(column)));
}

Surface GwrResult::r2_surface() const { return scatter(design, r2); }

Surface GwrResult::fitted_surface() const { return scatter(design, fitted); }

Surface GwrResult::zone_surface() const {
  Surface s = design.grid().make_surface();
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (zones[i] == Zone::persistent) s[design.cells()[i]] = 1.0;
    if (zones[i] == Zone::incidental) s[design.cells()[i]] = 0.0;
  }
  return s;
}

Refinement refine_with_new_scene(const GwrResult& previous, const Surface& new_scene,
                                 const GwrOptions& options) {
  const auto& prev = previous.design;
  require_same_grid(prev.grid().key(), new_scene.grid, "refinement scene");
  const auto prior = prev.predictor_index(options.zones.prior_name);
  if (!prior) throw ConfigError("GWR design has no predictor named " + options.zones.prior_name);

  std::vector<Predictor> predictors = prev.predictors();
  predictors[*prior].surface = prev.response_surface();
  const auto design = GwrDesign::make(prev.grid(), new_scene, std::move(predictors), prev.response_name());

  Refinement out{gwr_fit(design, options), {}};
  const auto& next = out.result.design;
  for (std::size_t cell = 0; cell < prev.grid().cell_count(); ++cell) {
    const long a = prev.row_of(cell);
    const long b = next.row_of(cell);
    if (a < 0 && b < 0) continue;
    const bool changed = a < 0 || b < 0 ||
                         previous.zones[static_cast<std::size_t>(a)] != out.result.zones[static_cast<std::size_t>(b)];
    if (changed) out.changed_cells.push_back(cell);
  }
  return out;
}

}  // namespace zonekit::gwr
