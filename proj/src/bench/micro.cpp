#include <atomic>
#include <cmath>
#include <thread>

#include "mhb/bench.hpp"
#include "mhb/channel.hpp"
#include "mhb/worker_pool.hpp"

namespace mhb {

std::string to_string(MicroKind kind) {
  switch (kind) {
    case MicroKind::ChannelOps: return "channel_ops";
    case MicroKind::Notify: return "notify";
    case MicroKind::Spawn: return "spawn";
    case MicroKind::Parinit: return "parinit";
  }
  return "unknown";
}

MicroKind parse_micro_kind(const std::string& name) {
  if (name == "channel_ops") return MicroKind::ChannelOps;
  if (name == "notify") return MicroKind::Notify;
  if (name == "spawn") return MicroKind::Spawn;
  if (name == "parinit") return MicroKind::Parinit;
  throw std::invalid_argument("unknown micro kind '" + name + "'");
}

namespace {

std::uint64_t fib_recursive(int n) { return n <= 2 ? 1 : fib_recursive(n - 1) + fib_recursive(n - 2); }

std::uint64_t fib_iterative(int n) {
  std::uint64_t a = 1, b = 1;
  for (int i = 3; i <= n; ++i) b = std::exchange(a, b) + b;
  return n <= 0 ? 0 : b;
}

TrialSeries make_series(const std::string& label, Params params, std::vector<double> samples) {
  TrialSeries s;
  s.label = label;
  s.params = std::move(params);
  s.samples = std::move(samples);
  return s;
}

std::vector<TrialSeries> channel_ops(const MicroParams& params, const TrialOptions& trials) {
  if (params.batch < 1) throw std::invalid_argument("channel batch must be >= 1");
  const auto batch = static_cast<std::size_t>(params.batch);
  BoundedChannel<std::int64_t> channel(batch);
  std::vector<double> takes, fetches;
  int trial = 0;
  std::int64_t next = 0;

  auto puts = run_measured_trials(
      [&] {
        const bool recorded = trial++ >= trials.warmup;
        const std::int64_t first = next;

        std::int64_t t0 = monotonic_ns();
        for (std::size_t i = 0; i < batch; ++i) channel.put(next++);
        const double put_ns = static_cast<double>(monotonic_ns() - t0) / static_cast<double>(batch);

        std::int64_t seen = 0;
        t0 = monotonic_ns();
        for (std::size_t i = 0; i < batch; ++i) seen += channel.fetch();
        const double fetch_ns = static_cast<double>(monotonic_ns() - t0) / static_cast<double>(batch);
        if (seen != first * static_cast<std::int64_t>(batch)) throw IntegrityError("channel fetch returned a wrong item");

        bool in_order = true;
        t0 = monotonic_ns();
        for (std::size_t i = 0; i < batch; ++i) in_order &= channel.take() == first + static_cast<std::int64_t>(i);
        const double take_ns = static_cast<double>(monotonic_ns() - t0) / static_cast<double>(batch);
        if (!in_order) throw IntegrityError("channel take broke FIFO order");

        if (recorded) {
          fetches.push_back(fetch_ns);
          takes.push_back(take_ns);
        }
        return put_ns;
      },
      trials);

  const Params p{{"batch", std::to_string(params.batch)}};
  return {make_series("channel_put", p, std::move(puts)), make_series("channel_take", p, std::move(takes)),
          make_series("channel_fetch", p, std::move(fetches))};
}

std::vector<TrialSeries> notify(const TrialOptions& trials) {
  RendezvousChannel<std::int64_t> wake;
  BoundedChannel<std::int64_t> woke_at(1);
  std::atomic<bool> failed{false};
  const int total = trials.warmup + trials.trials;

  std::thread sleeper([&] {
    for (int i = 0; i < total; ++i) {
      const std::int64_t token = wake.take();
      const std::int64_t now = monotonic_ns();
      if (token != i) failed = true;
      woke_at.put(now);
    }
  });

  std::int64_t sequence = 0;
  std::vector<double> samples;
  try {
    samples = run_measured_trials(
        [&] {
          wake.wait_for_taker();
          wake.offer(sequence++);
          const std::int64_t posted = monotonic_ns();
          wake.await_taken();
          const std::int64_t woke = woke_at.take();
          return static_cast<double>(woke - posted);
        },
        trials);
  } catch (...) {
    sleeper.detach();
    throw;
  }
  sleeper.join();
  if (failed) throw IntegrityError("notify delivered tokens out of order");
  return {make_series("notify", {}, std::move(samples))};
}

std::vector<TrialSeries> spawn(const MicroParams& params, const TrialOptions& trials) {
  if (params.fib_n < 1) throw std::invalid_argument("fib_n must be >= 1");
  WorkerPool pool(params.workers);
  const Params p{{"workers", std::to_string(params.workers)}};

  auto null_samples = run_trials([&] { pool.submit([] {}).get(); }, trials);

  const std::uint64_t expected = fib_iterative(params.fib_n);
  auto fib_samples = run_trials(
      [&] {
        const auto numbers = pool.submit([n = params.fib_n] { return fibonacci_task(n); }).get();
        if (numbers.size() != static_cast<std::size_t>(params.fib_n) || numbers.back() != expected)
          throw IntegrityError("fib task returned a wrong value");
      },
      trials);

  Params fib_params = p;
  fib_params.emplace_back("fib_n", std::to_string(params.fib_n));
  return {make_series("spawn_null", p, std::move(null_samples)),
          make_series("spawn_fib", std::move(fib_params), std::move(fib_samples))};
}

double init_value(std::size_t i) { return 1.0 + 0.5 * static_cast<double>(i % 1024); }

void init_range(std::vector<double>& a, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) a[i] = init_value(i);
}

void verify_init(const std::vector<double>& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != init_value(i)) throw IntegrityError("array element " + std::to_string(i) + " not initialized");
}

std::vector<TrialSeries> parinit(const MicroParams& params, const TrialOptions& trials) {
  const std::size_t n = std::max<std::size_t>(1, params.array_bytes / sizeof(double));
  std::vector<double> array(n, 0.0);
  WorkerPool pool(params.workers);
  const auto w = static_cast<std::size_t>(params.workers);

  auto parallel = run_measured_trials(
      [&] {
        std::fill(array.begin(), array.end(), 0.0);
        const std::int64_t start = monotonic_ns();
        std::vector<std::future<void>> parts;
        parts.reserve(w);
        for (std::size_t k = 0; k < w; ++k)
          parts.push_back(pool.submit([&, k] { init_range(array, n * k / w, n * (k + 1) / w); }));
        for (auto& f : parts) f.get();
        const auto elapsed = static_cast<double>(monotonic_ns() - start);
        verify_init(array);
        return elapsed;
      },
      trials);

  auto sequential = run_measured_trials(
      [&] {
        std::fill(array.begin(), array.end(), 0.0);
        const std::int64_t start = monotonic_ns();
        init_range(array, 0, n);
        const auto elapsed = static_cast<double>(monotonic_ns() - start);
        verify_init(array);
        return elapsed;
      },
      trials);

  const Params p{{"workers", std::to_string(params.workers)}, {"array_bytes", std::to_string(n * sizeof(double))}};
  return {make_series("parinit", p, std::move(parallel)),
          make_series("parinit_sequential", {{"array_bytes", std::to_string(n * sizeof(double))}},
                      std::move(sequential))};
}

}  // namespace

std::vector<std::uint64_t> fibonacci_task(int n) {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 1; k <= n; ++k) out.push_back(fib_recursive(k));
  return out;
}

std::vector<TrialSeries> micro_run(MicroKind kind, const MicroParams& params, const TrialOptions& trials) {
  if (params.workers < 1) throw std::invalid_argument("workers must be >= 1");
  switch (kind) {
    case MicroKind::ChannelOps: return channel_ops(params, trials);
    case MicroKind::Notify: return notify(trials);
    case MicroKind::Spawn: return spawn(params, trials);
    case MicroKind::Parinit: return parinit(params, trials);
  }
  throw std::invalid_argument("unknown micro kind");
}

}  // namespace mhb
