#include <chrono>

#include "mhb/harness.hpp"

namespace mhb {

std::int64_t monotonic_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

namespace {

void check(const TrialOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (options.warmup < 0) throw std::invalid_argument("warmup must be >= 0");
}

std::vector<double> collect(const std::function<double()>& sample, const TrialOptions& options) {
  check(options);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(options.trials));
  const int total = options.warmup + options.trials;
  for (int i = 0; i < total; ++i) {
    double value;
    try {
      value = sample();
    } catch (const std::exception& e) {
      throw TrialError("trial " + std::to_string(i) + " failed after " + std::to_string(samples.size()) +
                           " recorded sample(s): " + e.what(),
                       std::move(samples));
    }
    if (i >= options.warmup) samples.push_back(value);
  }
  return samples;
}

}  // namespace

std::vector<double> run_trials(const std::function<void()>& thunk, const TrialOptions& options,
                               const NanoClock& clock) {
  return collect(
      [&] {
        const std::int64_t start = clock();
        thunk();
        return static_cast<double>(clock() - start);
      },
      options);
}

std::vector<double> run_measured_trials(const std::function<double()>& measure, const TrialOptions& options) {
  return collect(measure, options);
}

}  // namespace mhb
