#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/ingest.hpp"

namespace zonekit::freq {

/// v' = 2 (v - min) / (max - min) - 1 over the non-missing cells.
/// Throws NumericalError for a constant surface.
Surface minmax_normalize(const Surface& surface);

enum class Stability : std::uint8_t { high_stable, low_stable, unstable };

std::string_view to_string(Stability s);

struct FrequencyMap {
  GridKey grid;
  int years = 0;                      // P
  std::vector<int> yf;                // per grid cell
  std::vector<std::uint8_t> covered;  // present in at least one year
  std::vector<std::uint8_t> partial;  // covered but missing in some year
  std::vector<Stability> stability;   // filled by classify_stability

  std::vector<std::size_t> covered_cells() const;
  Surface yf_surface() const;
};

/// YF_i = sum_k MC_{i,k}. Layer values must be -1, 0 or +1; a cell missing
/// in a year contributes 0 for it and is flagged partial.
FrequencyMap stack_frequency(std::span<const Surface> mc_layers);

/// high-stable if YF >= frac * P, low-stable if YF <= -frac * P, else
/// unstable (both thresholds inclusive). frac must lie in (0, 1].
FrequencyMap classify_stability(FrequencyMap fm, double frac = 0.6);

struct BinSpec {
  std::size_t count = 0;      // equal-width bins over the attribute range
  std::vector<double> edges;  // explicit ascending edges; wins when non-empty
};

struct ReportBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double mean_yf = kMissing;
  std::vector<std::size_t> histogram;  // index k holds cells with YF = k - P
};

struct AttributeReport {
  std::string attribute;
  int years = 0;
  std::vector<ReportBin> bins;
  std::size_t cells = 0;  // attributed covered cells
};

/// Bins are [low, high) except the last, which is closed. Every covered cell
/// with the attribute present lands in exactly one bin (values outside
/// explicit edges are clamped into the end bins). Unknown attribute names
/// throw DataError listing the available ones.
AttributeReport attribute_report(const FrequencyMap& fm,
                                 std::span<const ingest::CellAttributes> attrs,
                                 std::string_view attribute, const BinSpec& bins);

}  // namespace zonekit::freq
