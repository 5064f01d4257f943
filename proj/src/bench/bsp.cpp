#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "mhb/bench.hpp"

namespace mhb {

namespace {

constexpr Tag kBspTag = 3000;

using Clock = std::chrono::steady_clock;

std::int64_t since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

std::byte filler(Rank origin, std::uint64_t step, std::size_t i, bool token) {
  const std::uint64_t salt = token ? 0 : step * 7;
  return static_cast<std::byte>((static_cast<std::uint64_t>(origin) * 131 + salt + i) & 0xFF);
}

void write_payload(Bytes& buf, std::uint64_t step, Rank origin, bool token) {
  std::memcpy(buf.data(), &step, 8);
  const auto o = static_cast<std::uint32_t>(origin);
  std::memcpy(buf.data() + 8, &o, 4);
  std::memset(buf.data() + 12, 0, 4);
  for (std::size_t i = kBspHeaderBytes; i < buf.size(); ++i) buf[i] = filler(origin, step, i, token);
}

void check_payload(const Bytes& buf, std::size_t expected_size, std::uint64_t step, Rank origin, bool token,
                   Rank me) {
  auto fail = [&](const std::string& what) {
    throw IntegrityError("BSP rank " + std::to_string(me) + " step " + std::to_string(step) + ": " + what);
  };
  if (buf.size() != expected_size) fail("payload has " + std::to_string(buf.size()) + " bytes");
  std::uint64_t got_step;
  std::uint32_t got_origin;
  std::memcpy(&got_step, buf.data(), 8);
  std::memcpy(&got_origin, buf.data() + 8, 4);
  if (got_step != step) fail("payload carries step " + std::to_string(got_step));
  if (got_origin != static_cast<std::uint32_t>(origin))
    fail("payload from origin " + std::to_string(got_origin) + ", expected " + std::to_string(origin));
  for (std::size_t i = kBspHeaderBytes; i < buf.size(); ++i)
    if (buf[i] != filler(origin, token ? 0 : step, i, token)) fail("payload body corrupted at byte " + std::to_string(i));
}

struct Workspace {
  std::vector<double> array;
  std::size_t cursor = 0;
  double acc = 1.0;

  double reads(std::int64_t count) {
    double sum = 0.0;
    const std::size_t n = array.size();
    for (std::int64_t k = 0; k < count; ++k) {
      sum += array[cursor];
      if (++cursor == n) cursor = 0;
    }
    return sum;
  }

  void writes(std::int64_t count, double value) {
    const std::size_t n = array.size();
    for (std::int64_t k = 0; k < count; ++k) {
      array[cursor] = value;
      if (++cursor == n) cursor = 0;
    }
  }

  void flops(std::int64_t count) {
    double a = acc;
    for (std::int64_t k = 0; k < count; ++k) a = std::fma(a, 0.999999, 1e-6);
    acc = a;
  }
};

}  // namespace

Params bsp_params(const BspConfig& config, int ranks, Backend backend) {
  return {{"np", std::to_string(ranks)},
          {"backend", to_string(backend)},
          {"steps", std::to_string(config.steps)},
          {"reads", std::to_string(config.reads)},
          {"writes", std::to_string(config.writes)},
          {"flops", std::to_string(config.flops)},
          {"array_bytes", std::to_string(config.array_bytes)},
          {"msg_bytes", std::to_string(config.msg_bytes)},
          {"token", config.token_trace ? "1" : "0"}};
}

BspResult bsp_run(Communicator& comm, const BspConfig& config, const TrialOptions& trials) {
  if (config.steps < 0 || config.reads < 0 || config.writes < 0 || config.flops < 0)
    throw std::invalid_argument("BSP operation counts must be non-negative");
  if (config.msg_bytes < 1) throw std::invalid_argument("BSP messages need at least one byte");

  const Rank me = comm.rank();
  const int size = comm.size();
  const Rank next = (me + 1) % size;
  const Rank prev = (me + size - 1) % size;
  const std::size_t wire_bytes = std::max(config.msg_bytes, kBspHeaderBytes);
  const bool token = config.token_trace;

  Workspace ws;
  ws.array.assign(std::max<std::size_t>(1, config.array_bytes / sizeof(double)), 1.0);

  BspResult result;
  result.series.label = token ? "bsp_token" : "bsp";
  std::int64_t read_ns = 0, write_ns = 0, flop_ns = 0, comm_ns = 0;
  double checksum = 0.0;
  int trial = 0;

  Bytes original(wire_bytes);
  write_payload(original, 0, me, token);

  auto one_trial = [&]() -> double {
    const bool recorded = trial++ >= trials.warmup;
    Bytes held = original;
    Rank held_origin = me;

    comm.barrier();
    const auto start = Clock::now();
    for (int step = 0; step < config.steps; ++step) {
      const auto s = static_cast<std::uint64_t>(step);
      auto t = Clock::now();
      checksum += ws.reads(config.reads);
      const std::int64_t dr = since(t);

      t = Clock::now();
      ws.writes(config.writes, static_cast<double>(step));
      const std::int64_t dw = since(t);

      t = Clock::now();
      ws.flops(config.flops);
      const std::int64_t df = since(t);

      t = Clock::now();
      if (token) {
        std::memcpy(held.data(), &s, 8);
      } else {
        write_payload(held, s, me, false);
      }
      comm.send(next, kBspTag, held);
      held = comm.recv(prev, kBspTag);
      const Rank expected_origin = token ? (held_origin + size - 1) % size : prev;
      check_payload(held, wire_bytes, s, expected_origin, token, me);
      held_origin = expected_origin;
      const std::int64_t dc = since(t);

      if (recorded) {
        read_ns += dr;
        write_ns += dw;
        flop_ns += df;
        comm_ns += dc;
      }
    }
    comm.barrier();
    const double total = static_cast<double>(since(start));

    result.final_origin = held_origin;
    if (token && config.steps % size == 0) {
      // Step counter in the header was rewritten in flight; compare the rest.
      result.token_returned = held.size() == original.size() &&
                              std::equal(held.begin() + 8, held.end(), original.begin() + 8);
      if (!result.token_returned) throw IntegrityError("BSP token did not return to rank " + std::to_string(me));
    }
    return total;
  };

  auto samples = run_measured_trials(one_trial, trials);
  result.checksum = checksum + ws.acc;
  if (!std::isfinite(result.checksum)) throw IntegrityError("BSP compute checksum is not finite");
  if (me == 0) {
    result.series.params = bsp_params(config, size, comm.backend());
    result.series.samples = std::move(samples);
    result.series.breakdown = {{"read", static_cast<double>(read_ns)},
                               {"write", static_cast<double>(write_ns)},
                               {"flop", static_cast<double>(flop_ns)},
                               {"comm", static_cast<double>(comm_ns)}};
  }
  return result;
}

}  // namespace mhb
