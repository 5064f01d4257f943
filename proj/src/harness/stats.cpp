#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "mhb/harness.hpp"

namespace mhb {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Fences tukey_fences(std::span<const double> samples, double k) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  return {q1 - k * iqr, q3 + k * iqr};
}

std::vector<double> apply_fences(std::span<const double> samples, const Fences& fences) {
  std::vector<double> kept;
  kept.reserve(samples.size());
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(kept),
               [&](double v) { return v >= fences.low && v <= fences.high; });
  return kept;
}

std::vector<double> tukey_filter(std::span<const double> samples, double k) {
  if (samples.empty()) throw std::invalid_argument("tukey_filter needs at least one sample");
  return apply_fences(samples, tukey_fences(samples, k));
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("harmonic mean of an empty set");
  double inverse_sum = 0.0;
  for (double v : values) {
    if (v == 0.0) throw std::domain_error("harmonic mean of a zero value");
    inverse_sum += 1.0 / v;
  }
  return static_cast<double>(values.size()) / inverse_sum;
}

RunStats summarize(std::span<const double> kept, std::optional<double> bytes_per_sample) {
  if (kept.empty()) throw std::invalid_argument("summarize needs at least one sample");
  RunStats s;
  s.n_raw = s.n_kept = kept.size();
  const double n = static_cast<double>(kept.size());
  s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / n;
  // Identical samples must report exactly that value.
  if (std::all_of(kept.begin(), kept.end(), [&](double v) { return v == kept.front(); })) s.mean = kept.front();
  double ss = 0.0;
  for (double v : kept) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);

  std::vector<double> sorted(kept.begin(), kept.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);

  if (bytes_per_sample) {
    // H = n / sum(1 / tput_i), tput_i = bytes / (ns_i * 1e-9)
    double inverse_sum = 0.0;
    for (double ns : kept) {
      if (ns <= 0.0) throw std::domain_error("throughput of a zero-duration sample");
      inverse_sum += ns * 1e-9 / *bytes_per_sample;
    }
    s.hmean_Bps = n / inverse_sum;
  }
  return s;
}

RunStats analyze(std::span<const double> raw, double k, std::optional<double> bytes_per_sample) {
  const auto kept = tukey_filter(raw, k);
  RunStats s = summarize(kept, bytes_per_sample);
  s.n_raw = raw.size();
  return s;
}

SeriesRecord make_record(TrialSeries series, double tukey_k) {
  const bool has_k = std::any_of(series.params.begin(), series.params.end(),
                                 [](const auto& kv) { return kv.first == "tukey_k"; });
  if (!has_k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", tukey_k);
    series.params.emplace_back("tukey_k", buf);
  }
  RunStats stats = analyze(series.samples, tukey_k, series.bytes_per_sample);
  return SeriesRecord{std::move(series), stats};
}

}  // namespace mhb
