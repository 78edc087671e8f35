#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"

namespace zonekit::gwr {

struct Predictor {
  std::string name;
  Surface surface;
};

/// Regression design over the interior cells where the response and every
/// predictor have values. Predictors are z-scored (population sd) over those
/// cells; the intercept column is always present.
class GwrDesign {
 public:
  /// Throws DataError for: no predictors, a constant predictor, a constant
  /// response, surfaces on another grid, or too few usable cells.
  static GwrDesign make(const geometry::BaseGrid& grid, const Surface& response,
                        std::vector<Predictor> predictors, std::string response_name = "response");

  std::size_t size() const { return cells_.size(); }
  std::size_t predictor_count() const { return predictors_.size(); }
  const geometry::BaseGrid& grid() const { return grid_; }
  const std::vector<std::size_t>& cells() const { return cells_; }
  const std::string& response_name() const { return response_name_; }
  const Surface& response_surface() const { return response_; }
  const std::vector<Predictor>& predictors() const { return predictors_; }
  std::vector<std::string> names() const;
  std::optional<std::size_t> predictor_index(std::string_view name) const;

  const Eigen::VectorXd& y() const { return y_; }
  /// n x (p + 1): intercept column then standardized predictors.
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& raw() const { return raw_; }  // n x p
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& sds() const { return sds_; }

  /// Design row of a grid cell, or -1.
  long row_of(std::size_t cell) const { return row_of_[cell]; }
  /// Lattice distance between two design rows.
  double distance(std::size_t a, std::size_t b) const;
  /// Rows whose centers lie within radius of row's center, ascending.
  std::vector<std::size_t> rows_within(std::size_t row, double radius) const;

 private:
  GwrDesign(geometry::BaseGrid grid, Surface response, std::string response_name,
            std::vector<Predictor> predictors)
      : grid_(std::move(grid)),
        response_(std::move(response)),
        response_name_(std::move(response_name)),
        predictors_(std::move(predictors)) {}

  geometry::BaseGrid grid_;
  Surface response_;
  std::string response_name_;
  std::vector<Predictor> predictors_;
  std::vector<std::size_t> cells_;
  std::vector<long> row_of_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd raw_;
  Eigen::VectorXd means_;
  Eigen::VectorXd sds_;
};

inline constexpr double kWeightFloor = 1e-6;

/// exp(-d^2 / (2 b^2)); values below kWeightFloor become 0.
double gaussian_weight(double d, double bandwidth);

/// Kernel weights from `row` to every design row (dense, w_ii = 1).
std::vector<double> gaussian_weights(const GwrDesign& design, std::size_t row, double bandwidth);

struct LocalFit {
  bool ok = false;
  Eigen::VectorXd beta;  // standardized units, intercept first
  double r2 = kMissing;
  double fitted = kMissing;  // prediction at the center row
  double leverage = 0.0;     // hat-matrix diagonal entry for the center row
  double weight_sum = 0.0;
};

/// Weighted least squares at `row` via column-pivoted Householder QR on
/// sqrt(W) X. Not ok when sum(w) <= p + 1 or the local design is rank
/// deficient.
LocalFit fit_local(const GwrDesign& design, std::size_t row, std::span<const double> weights);

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Golden-section minimization on [lo, hi] until the bracket width is
/// <= tol. A bracket end that never moved is returned exactly, so
/// monotone objectives yield the interval endpoint; `value` is then the best
/// value the search evaluated, not f at the endpoint. Non-finite values are
/// treated as +inf; throws NumericalError if every evaluation is
/// non-finite.
GoldenResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                            double tol);

/// ceil(log((hi - lo) / tol) / log(1 / rho)) + 2, rho = (sqrt(5) - 1) / 2.
std::size_t golden_evaluation_bound(double lo, double hi, double tol);

enum class Objective { cv, aicc };

/// Leave-one-out CV: sum_i (y_i - yhat_{!=i}(b))^2 with w_ii = 0;
/// +inf if any local fit fails.
double cv_score(const GwrDesign& design, double bandwidth);
/// Corrected AIC of the full fit; +inf when undefined.
double aicc_score(const GwrDesign& design, double bandwidth);

GoldenResult golden_search_bandwidth(const GwrDesign& design, double b_min, double b_max,
                                     double tol = 1.0, Objective objective = Objective::cv);

enum class Zone : std::uint8_t { persistent, incidental, indeterminate };

std::string_view to_string(Zone z);

struct ZoneOptions {
  double ratio_threshold = 0.5;
  double r2_min = 0.3;
  std::string yf_name = "YF";
  std::string prior_name = "NDVI1";
};

/// Persistent when |beta_yf| / (|beta_prior| + 1e-12) >= ratio_threshold,
/// incidental otherwise; indeterminate when r2 is missing or < r2_min.
Zone classify_cell(double beta_prior, double beta_yf, double r2, const ZoneOptions& options = {});

struct GwrOptions {
  std::optional<double> bandwidth;  // fixed; searched when absent
  double b_min = 0.0;               // 0: 2 x cell size
  double b_max = 0.0;               // 0: bounding-box diagonal of the grid
  double tol = 1.0;
  Objective objective = Objective::cv;
  ZoneOptions zones;
};

struct GwrResult {
  explicit GwrResult(GwrDesign d) : design(std::move(d)) {}

  GwrDesign design;
  double bandwidth = 0.0;
  double score = 0.0;  // CV (or AICc) at the bandwidth
  Objective objective = Objective::cv;
  std::size_t evaluations = 0;  // objective evaluations spent searching
  bool searched = false;
  Eigen::MatrixXd beta_std;  // n x (p + 1); NaN rows where undefined
  Eigen::MatrixXd beta_raw;  // same, in predictor units
  Eigen::VectorXd fitted;
  Eigen::VectorXd r2;
  std::vector<std::uint8_t> defined;
  std::vector<Zone> zones;

  /// column 0 is the intercept, k >= 1 the k-th predictor.
  Surface coefficient_surface(std::size_t column, bool standardized) const;
  Surface r2_surface() const;
  Surface fitted_surface() const;
  Surface zone_surface() const;  // persistent=1, incidental=0, indeterminate missing
};

/// Zone label per design row. Throws ConfigError when the YF or prior
/// predictor named in options is not part of the design.
std::vector<Zone> classify_zones(const GwrResult& result, const ZoneOptions& options = {});

/// Fits every design row at options.bandwidth (golden search when absent)
/// and labels zones. Designs lacking the YF or prior predictor named in
/// options.zones get every row indeterminate.
GwrResult gwr_fit(const GwrDesign& design, const GwrOptions& options = {});

struct Refinement {
  GwrResult result;
  std::vector<std::size_t> changed_cells;  // grid cells whose zone label changed
};

/// Re-fits with `new_scene` as the response and the previous response in the
/// prior-scene predictor slot (other predictors kept), then relabels.
Refinement refine_with_new_scene(const GwrResult& previous, const Surface& new_scene,
                                 const GwrOptions& options = {});

}  // namespace zonekit::gwr
