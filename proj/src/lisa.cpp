#include "zonekit/lisa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zonekit/error.hpp"
#include "zonekit/parallel.hpp"
#include "zonekit/random.hpp"

namespace zonekit::lisa {

namespace {

// |I_perm| within this relative distance of |I_obs| counts as a tie (extreme).
constexpr double kTieTolerance = 1e-12;

struct Standardized {
  std::vector<double> z;  // (x - mean) / sd, population sd
  double sum_sq_dev = 0.0;
};

Standardized standardize(const Surface& surface, const SpatialWeights& w) {
  if (!(surface.grid == w.grid)) throw DataError("moran: surface and weights are on different grids");
  const std::size_t n = w.rows();
  if (n < 2) throw DataError("moran: need at least 2 cells");
  std::vector<double> x(n);
  for (std::size_t r = 0; r < n; ++r) {
    x[r] = surface[w.cells[r]];
    if (std::isnan(x[r])) throw DataError("moran: weights row refers to a missing cell");
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  Standardized s;
  s.z.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    s.z[r] = x[r] - mean;
    s.sum_sq_dev += s.z[r] * s.z[r];
  }
  const double sd = std::sqrt(s.sum_sq_dev / static_cast<double>(n));
  if (!(sd > 0.0) || sd < 1e-14 * (std::abs(mean) + 1.0))
    throw NumericalError("moran: zero variance, statistic undefined");
  for (double& v : s.z) v /= sd;
  return s;
}

double spatial_lag(const SpatialWeights& w, std::size_t row, const std::vector<double>& z) {
  const auto nb = w.neighbors_of(row);
  const auto wt = w.weights_of(row);
  double lag = 0.0;
  for (std::size_t t = 0; t < nb.size(); ++t) lag += wt[t] * z[nb[t]];
  return lag;
}

Quadrant quadrant_of(double z, double lag) {
  const bool high = z > 0.0;
  const bool high_lag = lag > 0.0;
  if (high) return high_lag ? Quadrant::HH : Quadrant::HL;
  return high_lag ? Quadrant::LH : Quadrant::LL;
}

}  // namespace

double SpatialWeights::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

SpatialWeights build_weights(const geometry::BaseGrid& grid, const WeightOptions& options,
                             const Surface* mask) {
  if (mask && !(mask->grid == grid.key())) throw DataError("weights: mask is on another grid");
  if (options.scheme == WeightScheme::distance_band && !(options.band > 0.0))
    throw ConfigError("weights: distance band must be > 0");

  SpatialWeights w;
  w.scheme = options.scheme;
  w.band = options.scheme == WeightScheme::distance_band ? options.band : 0.0;
  w.grid = grid.key();
  std::vector<long> row_of(grid.cell_count(), -1);
  for (std::size_t cell : grid.interior_cells()) {
    if (mask && !mask->has(cell)) continue;
    row_of[cell] = static_cast<long>(w.cells.size());
    w.cells.push_back(cell);
  }
  if (w.cells.size() < 2) throw DataError("weights: need at least 2 cells");

  std::vector<std::pair<long, long>> offsets;
  const double cs = grid.cell_size();
  if (options.scheme == WeightScheme::queen) {
    for (long dr = -1; dr <= 1; ++dr)
      for (long dc = -1; dc <= 1; ++dc)
        if (dr != 0 || dc != 0) offsets.emplace_back(dr, dc);
  } else {
    const auto reach = static_cast<long>(std::floor(options.band / cs));
    for (long dr = -reach; dr <= reach; ++dr)
      for (long dc = -reach; dc <= reach; ++dc)
        if ((dr != 0 || dc != 0) &&
            std::hypot(static_cast<double>(dr), static_cast<double>(dc)) * cs <= options.band + 1e-9)
          offsets.emplace_back(dr, dc);
  }

  const auto nrows = static_cast<long>(grid.nrows());
  const auto ncols = static_cast<long>(grid.ncols());
  w.offsets.push_back(0);
  std::vector<std::size_t> nb;
  for (std::size_t r = 0; r < w.cells.size(); ++r) {
    const auto [row, col] = grid.row_col(w.cells[r]);
    nb.clear();
    for (const auto& [dr, dc] : offsets) {
      const long rr = static_cast<long>(row) + dr;
      const long cc = static_cast<long>(col) + dc;
      if (rr < 0 || cc < 0 || rr >= nrows || cc >= ncols) continue;
      const long target = row_of[grid.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc))];
      if (target >= 0) nb.push_back(static_cast<std::size_t>(target));
    }
    std::sort(nb.begin(), nb.end());
    if (nb.empty()) w.isolated.push_back(r);
    const double wt = nb.empty() ? 0.0 : 1.0 / static_cast<double>(nb.size());
    for (std::size_t j : nb) {
      w.neighbors.push_back(j);
      w.weights.push_back(wt);
    }
    w.offsets.push_back(w.neighbors.size());
  }
  return w;
}

double global_moran(const Surface& surface, const SpatialWeights& w) {
  const Standardized s = standardize(surface, w);
  const double n = static_cast<double>(w.rows());
  double cross = 0.0, sq = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    cross += s.z[r] * spatial_lag(w, r, s.z);
    sq += s.z[r] * s.z[r];
  }
  const double s0 = w.total_weight();
  if (!(s0 > 0.0)) throw NumericalError("moran: no neighbour pairs");
  return (n / s0) * cross / sq;
}

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::HH: return "HH";
    case Quadrant::LL: return "LL";
    case Quadrant::HL: return "HL";
    case Quadrant::LH: return "LH";
  }
  return "?";
}

int moran_code(Quadrant q, double p_value, double alpha) {
  if (!(p_value <= alpha)) return 0;
  if (q == Quadrant::HH) return 1;
  if (q == Quadrant::LL) return -1;
  return 0;
}

Surface LisaResult::code_surface() const {
  Surface s(grid);
  for (std::size_t r = 0; r < cells.size(); ++r) s[cells[r]] = static_cast<double>(code[r]);
  return s;
}

LisaResult local_moran(const Surface& surface, const SpatialWeights& w, const LisaOptions& options) {
  if (options.permutations == 0) throw ConfigError("lisa: permutations must be >= 1");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("lisa: alpha must be in (0, 1)");
  const Standardized s = standardize(surface, w);
  const std::size_t n = w.rows();

  LisaResult res;
  res.grid = w.grid;
  res.cells = w.cells;
  res.local_i.resize(n);
  res.p_value.resize(n);
  res.quadrant.resize(n);
  res.code.resize(n);
  res.global_i = global_moran(surface, w);

  parallel_for(n, [&](std::size_t r) {
    const double lag = spatial_lag(w, r, s.z);
    const double obs = s.z[r] * lag;
    res.local_i[r] = obs;
    res.quadrant[r] = quadrant_of(s.z[r], lag);

    const auto nb = w.neighbors_of(r);
    const auto wt = w.weights_of(r);
    const std::size_t k = nb.size();
    std::size_t extreme = 0;
    if (k == 0) {
      extreme = options.permutations;
    } else {
      Rng rng(derive_seed(options.seed, w.cells[r]));
      std::vector<std::size_t> pool;
      pool.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != r) pool.push_back(j);
      const double threshold = std::abs(obs) * (1.0 - kTieTolerance);
      const std::size_t m = pool.size();
      for (std::size_t perm = 0; perm < options.permutations; ++perm) {
        double plag = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          const std::size_t pick = t + static_cast<std::size_t>(uniform_index(rng, m - t));
          std::swap(pool[t], pool[pick]);
          plag += wt[t] * s.z[pool[t]];
        }
        if (std::abs(s.z[r] * plag) >= threshold) ++extreme;
      }
    }
    res.p_value[r] = static_cast<double>(extreme + 1) / static_cast<double>(options.permutations + 1);
    res.code[r] = moran_code(res.quadrant[r], res.p_value[r], options.alpha);
  });
  return res;
}

}  // namespace zonekit::lisa
