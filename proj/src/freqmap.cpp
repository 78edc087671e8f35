#include "zonekit/freqmap.hpp"

#include <algorithm>
#include <cmath>

#include "zonekit/error.hpp"

namespace zonekit::freq {

Surface minmax_normalize(const Surface& surface) {
  const SummaryStats s = summarize(surface);
  if (s.count == 0 || !(s.max > s.min)) throw NumericalError("minmax_normalize: zero value range");
  Surface out(surface.grid);
  const double span = s.max - s.min;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (!surface.has(i)) continue;
    const double v = surface[i];
    // Pin the extremes so they land on -1/+1 exactly.
    out[i] = v == s.min ? -1.0 : v == s.max ? 1.0 : 2.0 * (v - s.min) / span - 1.0;
  }
  return out;
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::high_stable: return "high-stable";
    case Stability::low_stable: return "low-stable";
    case Stability::unstable: return "unstable";
  }
  return "?";
}

std::vector<std::size_t> FrequencyMap::covered_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (covered[i]) out.push_back(i);
  return out;
}

Surface FrequencyMap::yf_surface() const {
  Surface s(grid);
  for (std::size_t i = 0; i < yf.size(); ++i)
    if (covered[i]) s[i] = yf[i];
  return s;
}

FrequencyMap stack_frequency(std::span<const Surface> mc_layers) {
  if (mc_layers.empty()) throw DataError("stack_frequency: need at least one year");
  FrequencyMap fm;
  fm.grid = mc_layers.front().grid;
  fm.years = static_cast<int>(mc_layers.size());
  const std::size_t n = fm.grid.cell_count();
  fm.yf.assign(n, 0);
  fm.covered.assign(n, 0);
  fm.partial.assign(n, 0);
  fm.stability.assign(n, Stability::unstable);
  std::vector<int> present(n, 0);
  for (const Surface& layer : mc_layers) {
    if (!(layer.grid == fm.grid) || layer.size() != n)
      throw DataError("stack_frequency: layers are on different grids");
    for (std::size_t i = 0; i < n; ++i) {
      if (!layer.has(i)) continue;
      const double v = layer[i];
      if (v != -1.0 && v != 0.0 && v != 1.0)
        throw DataError("stack_frequency: Moran codes must be -1, 0 or +1");
      fm.yf[i] += static_cast<int>(v);
      ++present[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    fm.covered[i] = present[i] > 0;
    fm.partial[i] = present[i] > 0 && present[i] < fm.years;
  }
  return fm;
}

FrequencyMap classify_stability(FrequencyMap fm, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw ConfigError("classify_stability: frac must be in (0, 1]");
  if (fm.years < 1) throw DataError("classify_stability: frequency map has no years");
  const double cut = frac * fm.years;
  fm.stability.assign(fm.yf.size(), Stability::unstable);
  for (std::size_t i = 0; i < fm.yf.size(); ++i) {
    if (!fm.covered[i]) continue;
    if (fm.yf[i] >= cut - 1e-12) fm.stability[i] = Stability::high_stable;
    else if (fm.yf[i] <= -cut + 1e-12) fm.stability[i] = Stability::low_stable;
  }
  return fm;
}

AttributeReport attribute_report(const FrequencyMap& fm,
                                 std::span<const ingest::CellAttributes> attrs,
                                 std::string_view attribute, const BinSpec& spec) {
  ingest::CellAttributes probe;
  (void)probe.get(attribute);  // throws for unknown names

  std::vector<std::pair<double, int>> samples;  // attribute value, YF
  for (const auto& a : attrs) {
    if (a.cell >= fm.covered.size() || !fm.covered[a.cell]) continue;
    const auto v = a.get(attribute);
    if (v) samples.emplace_back(*v, fm.yf[a.cell]);
  }
  if (samples.empty())
    throw DataError("attribute_report: no covered cell has attribute '" + std::string(attribute) + "'");

  std::vector<double> edges = spec.edges;
  if (edges.empty()) {
    if (spec.count == 0) throw ConfigError("attribute_report: need a bin count or edges");
    double lo = samples.front().first, hi = lo;
    for (const auto& s : samples) {
      lo = std::min(lo, s.first);
      hi = std::max(hi, s.first);
    }
    const std::size_t count = hi > lo ? spec.count : 1;
    for (std::size_t b = 0; b <= count; ++b)
      edges.push_back(b == count ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(count));
  }
  if (edges.size() < 2) throw ConfigError("attribute_report: need at least 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] >= edges[i - 1])) throw ConfigError("attribute_report: edges must ascend");

  AttributeReport rep;
  rep.attribute = std::string(attribute);
  rep.years = fm.years;
  const std::size_t nb = edges.size() - 1;
  rep.bins.resize(nb);
  std::vector<double> sums(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    rep.bins[b].low = edges[b];
    rep.bins[b].high = edges[b + 1];
    rep.bins[b].histogram.assign(static_cast<std::size_t>(2 * fm.years + 1), 0);
  }
  for (const auto& [v, yf] : samples) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t b = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    b = std::min(b, nb - 1);
    auto& bin = rep.bins[b];
    ++bin.count;
    sums[b] += yf;
    bin.histogram[static_cast<std::size_t>(yf + fm.years)]++;
  }
  for (std::size_t b = 0; b < nb; ++b)
    if (rep.bins[b].count) rep.bins[b].mean_yf = sums[b] / static_cast<double>(rep.bins[b].count);
  rep.cells = samples.size();
  return rep;
}

}  // namespace zonekit::freq
