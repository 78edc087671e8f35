#include "zonekit/yield_clean.hpp"

#include <algorithm>
#include <cmath>

#include "zonekit/error.hpp"

namespace zonekit::clean {

namespace {

constexpr double kMadScale = 1.4826;

constexpr std::string_view kOrder[] = {"remove_flagged", "range_filter", "zscore_filter",
                                       "sort_by_time",   "hampel_impute", "moving_average"};

void fill(StageReport* report, std::string_view stage, std::size_t input,
          std::span<const YieldRecord> out) {
  if (!report) return;
  report->stage = std::string(stage);
  report->input = input;
  report->output = out.size();
  const auto y = yields(out);
  report->after = summarize(y);
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

void CleaningConfig::validate() const {
  if (!(yield_min < yield_max)) throw ConfigError("clean: yield_min must be < yield_max");
  if (!(zscore_limit > 0.0)) throw ConfigError("clean: zscore_limit must be > 0");
  if (hampel_window < 3 || hampel_window % 2 == 0)
    throw ConfigError("clean: hampel_window must be odd and >= 3");
  if (!(hampel_nsigma > 0.0)) throw ConfigError("clean: hampel_nsigma must be > 0");
  if (!(hampel_min_rel_scale >= 0.0)) throw ConfigError("clean: hampel_min_rel_scale must be >= 0");
  if (ma_window < 3) throw ConfigError("clean: ma_window must be >= 3");
}

std::vector<double> yields(std::span<const YieldRecord> records) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.yield);
  return y;
}

std::vector<YieldRecord> remove_flagged(std::span<const YieldRecord> records,
                                        StageReport* report) {
  std::vector<YieldRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const YieldRecord& r) { return !r.flagged; });
  fill(report, kOrder[0], records.size(), out);
  return out;
}

std::vector<YieldRecord> range_filter(std::span<const YieldRecord> records, double min, double max,
                                      StageReport* report) {
  if (!(min < max)) throw ConfigError("range_filter: min must be < max");
  std::vector<YieldRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const YieldRecord& r) { return r.yield >= min && r.yield <= max; });
  fill(report, kOrder[1], records.size(), out);
  return out;
}

std::vector<YieldRecord> zscore_filter(std::span<const YieldRecord> records, double limit,
                                       StageReport* report) {
  const auto y = yields(records);
  const SummaryStats s = summarize(y);
  std::vector<YieldRecord> out;
  if (s.count < 2 || !(s.stdev > 0.0)) {
    out.assign(records.begin(), records.end());
    fill(report, kOrder[2], records.size(), out);
    if (report) report->warnings.push_back("zero variance or fewer than 2 records; z-score skipped");
    return out;
  }
  for (const auto& r : records)
    if (std::abs(r.yield - s.mean) / s.stdev <= limit) out.push_back(r);
  fill(report, kOrder[2], records.size(), out);
  return out;
}

std::vector<YieldRecord> sort_by_time(std::span<const YieldRecord> records) {
  std::vector<YieldRecord> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(), [](const YieldRecord& a, const YieldRecord& b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

std::vector<YieldRecord> hampel_impute(std::span<const YieldRecord> records, std::size_t window,
                                       double nsigma, double min_rel_scale, StageReport* report) {
  if (window < 3 || window % 2 == 0) throw ConfigError("hampel: window must be odd and >= 3");
  std::vector<YieldRecord> out = sort_by_time(records);
  if (out.size() < window) {
    fill(report, kOrder[4], records.size(), out);
    if (report) report->warnings.push_back("fewer records than the Hampel window; skipped");
    return out;
  }
  const auto x = yields(out);
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::size_t imputed = 0;
  std::vector<double> buf, dev;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t lo = c >= half ? c - half : 0;
    const std::size_t hi = std::min(n, c + half + 1);
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
    double sum = 0.0;
    for (double v : buf) sum += v;
    const double mean = sum / static_cast<double>(buf.size());
    const double med = median_of(buf);
    dev.clear();
    for (std::size_t i = lo; i < hi; ++i) dev.push_back(std::abs(x[i] - med));
    const double mad = median_of(dev);
    const double scale = std::max(kMadScale * mad, min_rel_scale * std::abs(med));
    if (std::abs(x[c] - med) > nsigma * scale) {
      out[c].yield = mean;
      ++imputed;
    }
  }
  fill(report, kOrder[4], records.size(), out);
  if (report) report->imputations = imputed;
  return out;
}

std::vector<YieldRecord> moving_average(std::span<const YieldRecord> records, std::size_t window,
                                        StageReport* report) {
  if (window == 0) throw ConfigError("moving_average: window must be >= 1");
  std::vector<YieldRecord> out(records.begin(), records.end());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += records[j].yield;
    out[i].yield = sum / static_cast<double>(i + 1 - first);
  }
  fill(report, kOrder[5], records.size(), out);
  return out;
}

std::size_t CleanResult::imputations() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.imputations;
  return n;
}

std::span<const std::string_view> pipeline_order() { return kOrder; }

CleanResult clean_yield(std::span<const YieldRecord> raw, const CleaningConfig& config) {
  config.validate();
  CleanResult result;
  result.raw = summarize(yields(raw));
  result.stages.resize(6);
  auto& st = result.stages;
  auto a = remove_flagged(raw, &st[0]);
  auto b = range_filter(a, config.yield_min, config.yield_max, &st[1]);
  auto c = zscore_filter(b, config.zscore_limit, &st[2]);
  auto d = sort_by_time(c);
  fill(&st[3], kOrder[3], c.size(), d);
  auto e = hampel_impute(d, config.hampel_window, config.hampel_nsigma,
                         config.hampel_min_rel_scale, &st[4]);
  result.records = moving_average(e, config.ma_window, &st[5]);
  return result;
}

}  // namespace zonekit::clean
