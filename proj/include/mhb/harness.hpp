#pragma once

// Trial orchestration and summary statistics: warm-up discard, Tukey
// fences, quartiles by linear interpolation between closest ranks (R-7).

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mhb {

using NanoClock = std::function<std::int64_t()>;

/// steady_clock in nanoseconds.
std::int64_t monotonic_ns();

struct TrialOptions {
  int trials = 100;
  int warmup = 10;
  double tukey_k = 1.5;
};

/// Thrown when a trial fails; carries the samples recorded before it.
class TrialError : public std::runtime_error {
 public:
  TrialError(const std::string& what, std::vector<double> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<double>& partial() const noexcept { return partial_; }

 private:
  std::vector<double> partial_;
};

/// Times warmup + trials invocations of `thunk`; returns the last `trials`
/// durations in execution order.
std::vector<double> run_trials(const std::function<void()>& thunk, const TrialOptions& options,
                               const NanoClock& clock = monotonic_ns);

/// Like run_trials, for benchmarks that time themselves: each invocation
/// returns its own sample.
std::vector<double> run_measured_trials(const std::function<double()>& measure, const TrialOptions& options);

/// R-7 quantile of ascending data: h = (n-1)p, interpolate x[floor h], x[floor h + 1].
double quantile_sorted(std::span<const double> sorted, double p);

struct Fences {
  double low;
  double high;
};

/// [q1 - k IQR, q3 + k IQR] of `samples`.
Fences tukey_fences(std::span<const double> samples, double k = 1.5);

/// Samples inside `fences`, order preserved.
std::vector<double> apply_fences(std::span<const double> samples, const Fences& fences);

/// Single pass: fences from `samples`, then filtered. Order preserved.
std::vector<double> tukey_filter(std::span<const double> samples, double k = 1.5);

/// n / sum(1 / x_i).
double harmonic_mean(std::span<const double> values);

struct RunStats {
  std::size_t n_raw = 0;
  std::size_t n_kept = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Harmonic mean of per-sample throughput, bytes/s.
  std::optional<double> hmean_Bps;
};

/// Statistics of the kept samples. When `bytes_per_sample` is given each
/// sample's throughput is bytes / duration.
RunStats summarize(std::span<const double> kept, std::optional<double> bytes_per_sample = std::nullopt);

/// Filter then summarize; n_raw counts the unfiltered samples.
RunStats analyze(std::span<const double> raw, double k, std::optional<double> bytes_per_sample = std::nullopt);

using Params = std::vector<std::pair<std::string, std::string>>;

/// `key=value` pairs joined by `;`.
std::string format_params(const Params& params);
Params parse_params(const std::string& text);

struct TrialSeries {
  std::string label;
  Params params;
  /// Raw samples in execution order, warm-up already discarded.
  std::vector<double> samples;
  /// Optional per-operation totals (ns) over the recorded trials.
  std::map<std::string, double> breakdown;
  std::optional<double> bytes_per_sample;
};

struct SeriesRecord {
  TrialSeries series;
  RunStats stats;
};

SeriesRecord make_record(TrialSeries series, double tukey_k);

struct CsvFiles {
  std::string raw;
  std::string summary;
  std::optional<std::string> breakdown;
};

/// Writes `<name>_raw.csv` and `<name>_summary.csv` into `dir` (and
/// `<name>_breakdown.csv` when any series carries a breakdown).
CsvFiles write_csv(const std::string& dir, const std::string& name, std::span<const SeriesRecord> records);

inline constexpr const char* kRawHeader = "benchmark,params,trial_index,value_ns";
inline constexpr const char* kSummaryHeader =
    "benchmark,params,n_raw,n_kept,mean_ns,std_ns,median_ns,q1_ns,q3_ns,min_ns,max_ns,hmean_Bps";
inline constexpr const char* kBreakdownHeader = "benchmark,params,op,total_ns";

struct RawRow {
  std::string benchmark;
  std::string params;
  std::size_t trial_index;
  double value_ns;
};

struct SummaryRow {
  std::string benchmark;
  std::string params;
  RunStats stats;
};

struct BreakdownRow {
  std::string benchmark;
  std::string params;
  std::string op;
  double total_ns;
};

std::vector<RawRow> read_raw_csv(const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);
std::vector<BreakdownRow> read_breakdown_csv(const std::string& path);

}  // namespace mhb
