#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zonekit/core.hpp"
#include "zonekit/ingest.hpp"

namespace zonekit::clean {

using ingest::YieldRecord;

struct CleaningConfig {
  double yield_min = 1.0;   // T/Ha, inclusive
  double yield_max = 16.0;  // T/Ha, inclusive
  double zscore_limit = 3.0;
  std::size_t hampel_window = 7;  // odd
  double hampel_nsigma = 3.0;
  // Lower bound on the Hampel scale as a fraction of the window median;
  // stops flat windows from re-flagging values that were already imputed.
  double hampel_min_rel_scale = 0.1;
  // Trailing window in samples. Should grow with field length (longer
  // passes tolerate more smoothing).
  std::size_t ma_window = 6;

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// What one stage did to the record stream.
struct StageReport {
  std::string stage;
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t imputations = 0;  // Hampel only
  SummaryStats after;
  std::vector<std::string> warnings;
};

std::vector<YieldRecord> remove_flagged(std::span<const YieldRecord> records,
                                        StageReport* report = nullptr);

/// Keeps min <= yield <= max.
std::vector<YieldRecord> range_filter(std::span<const YieldRecord> records, double min, double max,
                                      StageReport* report = nullptr);

/// Single pass: mean and population stdev are computed once over the input
/// and records with |z| > limit dropped. Zero variance returns the input
/// with a warning.
std::vector<YieldRecord> zscore_filter(std::span<const YieldRecord> records, double limit = 3.0,
                                       StageReport* report = nullptr);

/// Stable sort by timestamp.
std::vector<YieldRecord> sort_by_time(std::span<const YieldRecord> records);

/// Centered rolling Hampel detector; windows are truncated at the series
/// ends. The center is replaced by the window mean when
/// |x - median| > nsigma * max(1.4826 * MAD, min_rel_scale * |median|).
/// Detection always uses the input values, never earlier imputations.
/// Input is sorted by timestamp first.
std::vector<YieldRecord> hampel_impute(std::span<const YieldRecord> records, std::size_t window,
                                       double nsigma, double min_rel_scale = 0.1,
                                       StageReport* report = nullptr);

/// Trailing mean over up to `window` samples ending at each record.
/// Input must be time ordered. Not idempotent.
std::vector<YieldRecord> moving_average(std::span<const YieldRecord> records,
                                        std::size_t window = 6, StageReport* report = nullptr);

std::vector<double> yields(std::span<const YieldRecord> records);

struct CleanResult {
  std::vector<YieldRecord> records;
  SummaryStats raw;
  std::vector<StageReport> stages;  // in execution order

  std::size_t imputations() const;
};

/// flagged -> range -> z-score -> sort by time -> Hampel -> moving average.
CleanResult clean_yield(std::span<const YieldRecord> raw, const CleaningConfig& config = {});

/// Stage names in the order clean_yield applies them.
std::span<const std::string_view> pipeline_order();

}  // namespace zonekit::clean
