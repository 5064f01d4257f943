#pragma once

// Benchmark programs: BSP ring, ping-pong, intra-node microbenchmarks and
// the HPCG timing/verification runs. Every benchmark checks the data it
// moves or computes in the same run that produces its timings.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhb/comm.hpp"
#include "mhb/harness.hpp"
#include "mhb/kernels.hpp"

namespace mhb {

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- BSP ring

struct BspConfig {
  int steps = 10;
  std::int64_t reads = 1'000'000;
  std::int64_t writes = 1'000'000;
  std::int64_t flops = 1'000'000;
  std::size_t array_bytes = std::size_t{8} << 20;
  std::size_t msg_bytes = std::size_t{64} << 10;
  /// Forward the payload received in the previous step instead of a fresh
  /// one, so after a multiple of P steps every rank holds its own again.
  bool token_trace = false;
};

/// Bytes of step/origin header carried by every BSP message; smaller
/// configured messages are padded up to it.
inline constexpr std::size_t kBspHeaderBytes = 16;

struct BspResult {
  /// Total time per trial, recorded on rank 0 (empty elsewhere), with a
  /// read/write/flop/comm breakdown summed over the recorded trials.
  TrialSeries series;
  double checksum = 0.0;
  /// Origin rank of the payload held after the last step (token mode).
  Rank final_origin = -1;
  /// Token mode with steps % P == 0: the held payload equals this rank's
  /// original byte for byte.
  bool token_returned = false;
};

/// Collective. Per step: `reads` loads, `writes` stores and `flops` fused
/// multiply-adds over the working array, then send to (r+1) mod P and
/// receive from (r-1) mod P. Throws IntegrityError on a wrong payload.
BspResult bsp_run(Communicator& comm, const BspConfig& config, const TrialOptions& trials);

Params bsp_params(const BspConfig& config, int ranks, Backend backend);

// ----------------------------------------------------------------- ping-pong

/// 1, 2, 4, ... up to and including max_bytes.
std::vector<std::size_t> pingpong_sizes(std::size_t max_bytes);

struct PingPongResult {
  /// One series of round-trip times per message size (rank 0 only).
  std::vector<TrialSeries> series;
  /// Harmonic mean over sizes of size / (mean RTT / 2).
  double hmean_throughput_Bps = 0.0;
};

/// Exactly two ranks: rank 0 sends, rank 1 echoes, rank 0 times the round
/// trip and checks the echo. Throws IntegrityError on a corrupted echo.
PingPongResult pingpong_run(Communicator& comm, const std::vector<std::size_t>& sizes, const TrialOptions& trials);

// ------------------------------------------------------- intra-node kinds

enum class MicroKind { ChannelOps, Notify, Spawn, Parinit };

std::string to_string(MicroKind kind);
MicroKind parse_micro_kind(const std::string& name);

struct MicroParams {
  /// Worker pool width (spawn) or number of initializing workers (parinit).
  int workers = 4;
  int fib_n = 20;
  /// Channel operations timed per sample; the sample is the per-op mean.
  int batch = 1000;
  std::size_t array_bytes = 50'000'000;
};

/// channel_ops: channel_put / channel_take / channel_fetch series.
/// notify: wake-up latency through a capacity-0 channel.
/// spawn: spawn_null and spawn_fib series (submit to a pool, then fetch).
/// parinit: parinit (W workers) and parinit_sequential series.
std::vector<TrialSeries> micro_run(MicroKind kind, const MicroParams& params, const TrialOptions& trials);

/// First n Fibonacci numbers, each by naive recursion (fib(1) = fib(2) = 1).
std::vector<std::uint64_t> fibonacci_task(int n);

// ---------------------------------------------------------------- HPCG

struct HpcgConfig {
  int nx = 16;
  int ny = 16;
  int nz = 16;
  int iterations = 1;
  MgConfig mg{};
};

/// Collective. Builds the problem and hierarchy (untimed), then times
/// `iterations` preconditioned CG iterations from a zero guess per trial,
/// bracketed by barriers. Rank 0 returns the series with the per-phase
/// breakdown summed over recorded trials.
std::optional<TrialSeries> hpcg_timing(Communicator& comm, const HpcgConfig& config, const TrialOptions& trials);

/// Local grid rules for benchmark runs: every dimension >= 16 and a
/// multiple of 8. Throws std::invalid_argument otherwise.
void check_benchmark_grid(int nx, int ny, int nz);

struct HpcgSweep {
  std::vector<int> local_sizes{16, 32, 64};
  std::vector<int> rank_counts{1, 2, 4, 8};
  Backend backend = Backend::InProcess;
  int iterations = 1;
  MgConfig mg{};
};

/// Runs every (local size, rank count) pair as its own in-process or
/// localhost-TCP job and returns one record per pair.
std::vector<SeriesRecord> run_hpcg_sweep(const HpcgSweep& sweep, const TrialOptions& trials);

}  // namespace mhb
