#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/error.hpp"
#include "zonekit/geometry.hpp"

namespace zonekit::geostat {

struct SamplePoint {
  Point2 pos;
  double value = 0.0;
};

/// Exponential semivariogram, effective-range form:
///   gamma(h) = nugget + (sill - nugget) * (1 - exp(-3 h / effective_range)),
/// gamma(0) = 0. The model reaches 95% of the partial sill at effective_range.
struct VariogramModel {
  double nugget = 0.0;
  double sill = 1.0;  // total sill
  double effective_range = 100.0;

  double operator()(double h) const;
  double partial_sill() const { return sill - nugget; }
  /// Throws ConfigError unless 0 <= nugget <= sill and effective_range > 0.
  void validate() const;
};

struct VariogramBin {
  double lag = 0.0;  // bin center
  double semivariance = 0.0;
  std::size_t pairs = 0;
};

struct EmpiricalVariogram {
  double lag_width = 0.0;
  std::vector<VariogramBin> bins;  // non-empty bins, increasing lag
};

/// Classical (Matheron) estimator over all pairs with distance <= max_lag,
/// binned by floor(d / lag_width). Throws DataError for < 2 points or when
/// all points coincide.
EmpiricalVariogram empirical_variogram(std::span<const SamplePoint> points, double lag_width,
                                       double max_lag);

struct FitOptions {
  std::size_t max_iterations = 20000;
  std::size_t restarts = 6;
  double ftol = 1e-8;  // relative objective tolerance
};

struct VariogramFit {
  VariogramModel model;
  double objective = 0.0;  // pair-weighted SSE
  std::size_t iterations = 0;
};

class FitError : public NumericalError {
 public:
  FitError(const std::string& what, VariogramFit best) : NumericalError(what), best_(best) {}
  const VariogramFit& best() const { return best_; }

 private:
  VariogramFit best_;
};

/// Pair-count weighted least squares fit by box-projected Nelder-Mead with
/// restarts. Requires >= 3 bins. Throws FitError (carrying the best point)
/// when the simplex does not converge within max_iterations.
VariogramFit fit_exponential(const EmpiricalVariogram& emp, const FitOptions& options = {});

double fit_objective(const EmpiricalVariogram& emp, const VariogramModel& model);

struct KrigingOptions {
  // Up to this many (deduplicated) samples one global system is factored
  // once; above it each cell uses its `neighbors` nearest samples.
  std::size_t global_max = 1000;
  std::size_t neighbors = 64;
};

struct KrigingPrediction {
  double estimate = kMissing;
  double variance = kMissing;
  double lagrange = 0.0;
  std::vector<std::size_t> support;  // indices into OrdinaryKriger::samples()
  std::vector<double> weights;
};

/// Ordinary kriging predictor. Coincident samples are merged (mean value)
/// before any system is built. predict() is const and thread-safe.
class OrdinaryKriger {
 public:
  OrdinaryKriger(std::span<const SamplePoint> points, const VariogramModel& model,
                 const KrigingOptions& options = {});
  ~OrdinaryKriger();
  OrdinaryKriger(OrdinaryKriger&&) noexcept;
  OrdinaryKriger& operator=(OrdinaryKriger&&) noexcept;

  KrigingPrediction predict(Point2 target) const;

  const std::vector<SamplePoint>& samples() const;
  std::size_t merged_duplicates() const;
  bool global() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct KrigingResult {
  Surface estimate;
  Surface variance;
  double max_weight_sum_error = 0.0;  // max |sum(weights) - 1| over cells
  std::size_t merged_duplicates = 0;
  bool global_neighborhood = true;
};

/// Prediction at every interior cell center.
KrigingResult ordinary_krige(std::span<const SamplePoint> points, const VariogramModel& model,
                             const geometry::BaseGrid& grid, const KrigingOptions& options = {});

struct IdwOptions {
  double power = 2.0;
  double radius = 50.0;  // m; infinity disables the cutoff
};

/// sum(w z) / sum(w), w = d^-power over samples within radius of each
/// interior cell center. Samples at zero distance are returned directly
/// (their mean if several). Cells with no sample in range stay missing.
Surface idw(std::span<const SamplePoint> points, const geometry::BaseGrid& grid,
            const IdwOptions& options = {});

/// Mean of the non-missing cells whose centers lie within `radius` of each
/// non-missing cell (the cell itself included). Missing cells stay missing.
Surface convolve_mean(const Surface& surface, const geometry::BaseGrid& grid,
                      double radius = 19.0);

}  // namespace zonekit::geostat
