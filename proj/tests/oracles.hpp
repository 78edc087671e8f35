#pragma once

// Reference implementations written directly from the defining formulas.
// They share no code with the library beyond the RNG primitives, which the
// permutation test must reproduce to compare p-values exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/random.hpp"

namespace zk_oracle {

/// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

/// Least squares through the normal equations. Rows of x include the
/// intercept column when wanted.
inline std::vector<double> ols(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t p = x[0].size();
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) a[j][k] += x[i][j] * x[i][k];
      b[j] += x[i][j] * y[i];
    }
  return dense_solve(a, b);
}

/// Queen neighbour cells of `cell` on a full lattice, ascending.
inline std::vector<std::size_t> queen_cells(const zonekit::geometry::BaseGrid& g, std::size_t cell) {
  const auto [r, c] = g.row_col(cell);
  std::vector<std::size_t> out;
  for (long dr = -1; dr <= 1; ++dr)
    for (long dc = -1; dc <= 1; ++dc) {
      if (!dr && !dc) continue;
      const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(g.nrows()) || cc >= static_cast<long>(g.ncols())) continue;
      out.push_back(g.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)));
    }
  std::sort(out.begin(), out.end());
  return out;
}

struct LisaCell {
  double local_i;
  double p;
  int code;
};

/// Conditional permutation LISA on a grid whose cells are all interior
/// (row r == cell r). Each cell draws from Rng(derive_seed(seed, cell)) and
/// refills its neighbour slots with a partial Fisher-Yates shuffle of the
/// other cells, the pool persisting across permutations.
inline std::vector<LisaCell> lisa(const zonekit::geometry::BaseGrid& g, const zonekit::Surface& s,
                                  std::size_t perms, double alpha, std::uint64_t seed) {
  using namespace zonekit;
  const std::size_t n = g.cell_count();
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += s[i];
  mean /= static_cast<double>(n);
  double var = 0;
  for (std::size_t i = 0; i < n; ++i) var += (s[i] - mean) * (s[i] - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (s[i] - mean) / sd;

  std::vector<LisaCell> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = queen_cells(g, i);
    const double w = 1.0 / static_cast<double>(nb.size());
    double lag = 0;
    for (auto j : nb) lag += w * z[j];
    const double obs = z[i] * lag;
    std::vector<std::size_t> pool;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pool.push_back(j);
    Rng rng(derive_seed(seed, i));
    std::size_t extreme = 0;
    for (std::size_t p = 0; p < perms; ++p) {
      double pl = 0;
      for (std::size_t t = 0; t < nb.size(); ++t) {
        const auto pick = t + uniform_index(rng, pool.size() - t);
        std::swap(pool[t], pool[pick]);
        pl += w * z[pool[t]];
      }
      if (std::abs(z[i] * pl) >= std::abs(obs) * (1 - 1e-12)) ++extreme;
    }
    const double pv = (static_cast<double>(extreme) + 1.0) / (static_cast<double>(perms) + 1.0);
    int code = 0;
    if (pv <= alpha && z[i] > 0 && lag > 0) code = 1;
    if (pv <= alpha && z[i] <= 0 && lag <= 0) code = -1;
    out[i] = {obs, pv, code};
  }
  return out;
}

}  // namespace zk_oracle
