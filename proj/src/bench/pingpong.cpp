#include <algorithm>

#include "mhb/bench.hpp"

namespace mhb {

namespace {

constexpr Tag kPingTag = 2000;
constexpr Tag kPongTag = 2001;

}  // namespace

std::vector<std::size_t> pingpong_sizes(std::size_t max_bytes) {
  if (max_bytes < 1) throw std::invalid_argument("ping-pong needs a positive maximum size");
  std::vector<std::size_t> sizes;
  for (std::size_t s = 1; s <= max_bytes; s *= 2) sizes.push_back(s);
  if (sizes.back() != max_bytes) sizes.push_back(max_bytes);
  return sizes;
}

PingPongResult pingpong_run(Communicator& comm, const std::vector<std::size_t>& sizes, const TrialOptions& trials) {
  if (comm.size() != 2) throw std::invalid_argument("ping-pong needs exactly 2 ranks, got " + std::to_string(comm.size()));
  const Rank me = comm.rank();
  PingPongResult result;
  std::vector<double> mean_throughputs;

  for (std::size_t bytes : sizes) {
    Bytes message(bytes);
    for (std::size_t i = 0; i < bytes; ++i) message[i] = static_cast<std::byte>((i * 31 + bytes) & 0xFF);

    comm.barrier();
    std::vector<double> samples;
    if (me == 0) {
      samples = run_measured_trials(
          [&] {
            const std::int64_t start = monotonic_ns();
            comm.send(1, kPingTag, message);
            const Bytes echo = comm.recv(1, kPongTag);
            const auto rtt = static_cast<double>(monotonic_ns() - start);
            if (echo != message) throw IntegrityError("ping-pong echo differs at " + std::to_string(bytes) + " bytes");
            return rtt;
          },
          trials);
    } else {
      run_measured_trials(
          [&] {
            Bytes ping = comm.recv(0, kPingTag);
            comm.send(0, kPongTag, ping);
            return 0.0;
          },
          trials);
    }

    if (me == 0) {
      TrialSeries series;
      series.label = "pingpong";
      series.params = {{"backend", to_string(comm.backend())},
                       {"bytes", std::to_string(bytes)}};
      series.samples = std::move(samples);
      // throughput = bytes / (RTT / 2)
      series.bytes_per_sample = 2.0 * static_cast<double>(bytes);
      const RunStats stats = analyze(series.samples, trials.tukey_k);
      mean_throughputs.push_back(2.0 * static_cast<double>(bytes) / (stats.mean * 1e-9));
      result.series.push_back(std::move(series));
    }
  }
  if (me == 0 && !mean_throughputs.empty()) result.hmean_throughput_Bps = harmonic_mean(mean_throughputs);
  return result;
}

}  // namespace mhb
