#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/geometry.hpp"

namespace zonekit::lisa {

enum class WeightScheme { queen, distance_band };

struct WeightOptions {
  WeightScheme scheme = WeightScheme::queen;
  double band = 15.0;  // m, distance_band only (inclusive)
};

/// Row-compressed neighbour lists over a set of grid cells. Row r refers to
/// grid cell cells[r]; neighbours are row ids in ascending order.
struct SpatialWeights {
  WeightScheme scheme = WeightScheme::queen;
  double band = 0.0;
  bool row_standardized = true;
  GridKey grid;
  std::vector<std::size_t> cells;
  std::vector<std::size_t> offsets;  // size rows + 1
  std::vector<std::size_t> neighbors;
  std::vector<double> weights;
  std::vector<std::size_t> isolated;  // rows without neighbours

  std::size_t rows() const { return cells.size(); }
  std::span<const std::size_t> neighbors_of(std::size_t row) const {
    return {neighbors.data() + offsets[row], offsets[row + 1] - offsets[row]};
  }
  std::span<const double> weights_of(std::size_t row) const {
    return {weights.data() + offsets[row], offsets[row + 1] - offsets[row]};
  }
  double total_weight() const;  // S0
};

/// Binary contiguity among the grid's interior cells (or, when `mask` is
/// given, among interior cells where mask has a value), then row
/// standardization. Needs at least 2 cells.
SpatialWeights build_weights(const geometry::BaseGrid& grid, const WeightOptions& options = {},
                             const Surface* mask = nullptr);

/// Global Moran's I = (n / S0) * sum_ij w_ij z_i z_j / sum_i z_i^2.
/// Throws NumericalError for zero variance. Every weights row must have a
/// value in the surface.
double global_moran(const Surface& surface, const SpatialWeights& w);

enum class Quadrant : std::uint8_t { HH, LL, HL, LH };

std::string_view to_string(Quadrant q);

/// +1 for significant HH, -1 for significant LL, 0 otherwise (outliers and
/// non-significant cells).
int moran_code(Quadrant q, double p_value, double alpha);

struct LisaOptions {
  std::size_t permutations = 999;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct LisaResult {
  GridKey grid;
  std::vector<std::size_t> cells;
  std::vector<double> local_i;
  std::vector<double> p_value;
  std::vector<Quadrant> quadrant;
  std::vector<int> code;
  double global_i = 0.0;

  /// MC codes as a surface (missing outside `cells`).
  Surface code_surface() const;
};

/// Local Moran I_i = z_i * sum_j w_ij z_j with z standardized by the
/// population standard deviation. Pseudo p-values come from conditional
/// permutation: for each cell, its neighbour slots are refilled with values
/// drawn without replacement from all other cells, and
/// p = (#{|I_perm| >= |I_obs|} + 1) / (permutations + 1).
///
/// Each cell uses its own stream Rng(derive_seed(seed, grid cell index)).
/// The pool of other rows starts in ascending row order and persists across
/// that cell's permutations; every permutation performs a partial
/// Fisher-Yates over it (draw t swaps slot t with t + uniform_index(n-1-t))
/// and the t-th drawn value fills the t-th neighbour slot.
LisaResult local_moran(const Surface& surface, const SpatialWeights& w,
                       const LisaOptions& options = {});

}  // namespace zonekit::lisa
