#pragma once

// Rank-addressed message passing with tagged point-to-point operations and
// tree-based collectives. Two interchangeable transports exist: in-process
// (ranks are threads sharing mailboxes) and TCP (full socket mesh).

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mhb {

using Rank = int;
using Tag = std::uint32_t;
using Bytes = std::vector<std::byte>;

enum class Backend { InProcess, Tcp };

std::string to_string(Backend backend);
Backend parse_backend(const std::string& name);

/// Tags at or above this value are reserved for collectives and bring-up.
inline constexpr Tag kFirstReservedTag = 0xFFFF0000u;

inline constexpr std::size_t kDefaultBufferCap = std::size_t{64} << 20;

class CommError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised in every rank blocked on communication when the job is torn down.
class JobAborted : public CommError {
 public:
  using CommError::CommError;
};

/// A rank's entry procedure failed; what() names the rank.
class JobError : public std::runtime_error {
 public:
  JobError(Rank rank, const std::string& what)
      : std::runtime_error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
  Rank rank() const noexcept { return rank_; }

 private:
  Rank rank_;
};

struct CommCounters {
  std::uint64_t sends = 0;
  std::uint64_t recvs = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t allreduces = 0;
  std::uint64_t barriers = 0;
};

class Transport;

class Communicator {
 public:
  Communicator(Rank rank, int size, Backend backend, std::unique_ptr<Transport> transport);
  ~Communicator();
  Communicator(Communicator&&) noexcept;
  Communicator& operator=(Communicator&&) noexcept;
  Communicator(const Communicator&) = delete;
  Communicator& operator=(const Communicator&) = delete;

  Rank rank() const noexcept { return rank_; }
  int size() const noexcept { return size_; }
  Backend backend() const noexcept { return backend_; }

  /// Buffered send. Returns once the payload is queued for `dest`; blocks
  /// only while the (rank, dest) pair already buffers more than the cap.
  void send(Rank dest, Tag tag, std::span<const std::byte> payload);

  /// Oldest unconsumed message from `source` carrying `tag`.
  Bytes recv(Rank source, Tag tag);

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void send_values(Rank dest, Tag tag, std::span<const T> values) {
    send(dest, tag, std::as_bytes(values));
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  std::vector<T> recv_values(Rank source, Tag tag) {
    Bytes raw = recv(source, tag);
    if (raw.size() % sizeof(T) != 0)
      throw CommError("received payload of " + std::to_string(raw.size()) +
                      " bytes is not a whole number of elements");
    std::vector<T> out(raw.size() / sizeof(T));
    if (!raw.empty()) std::memcpy(out.data(), raw.data(), raw.size());
    return out;
  }

  /// Sum over all ranks, reduced along a binary tree rooted at rank 0 and
  /// broadcast back; every rank receives the same bits.
  double allreduce_sum(double local);

  void barrier();

  const CommCounters& counters() const noexcept { return counters_; }

 private:
  void check_peer(Rank peer, const char* what) const;
  double reduce_broadcast(double local, Tag reduce_tag, Tag bcast_tag);

  Rank rank_;
  int size_;
  Backend backend_;
  std::unique_ptr<Transport> transport_;
  CommCounters counters_;
};

struct JobOptions {
  Backend backend = Backend::InProcess;
  std::size_t buffer_cap = kDefaultBufferCap;
  /// Coordinator address for the TCP transport. Port 0 picks a free port.
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::chrono::milliseconds connect_timeout{10000};
};

/// Runs `entry` once per rank on its own thread and joins them. If any rank
/// throws, every rank still blocked in communication is released with
/// JobAborted and the first failure is rethrown as JobError.
void run_job(int size, const JobOptions& options, const std::function<void(Communicator&)>& entry);

template <class F>
auto spawn_job(int size, const JobOptions& options, F&& entry) {
  using R = std::invoke_result_t<F&, Communicator&>;
  if constexpr (std::is_void_v<R>) {
    run_job(size, options, [&](Communicator& comm) { entry(comm); });
  } else {
    std::vector<std::optional<R>> slots(size > 0 ? static_cast<std::size_t>(size) : 0);
    run_job(size, options, [&](Communicator& comm) {
      slots[static_cast<std::size_t>(comm.rank())].emplace(entry(comm));
    });
    std::vector<R> results;
    results.reserve(slots.size());
    for (auto& slot : slots) results.push_back(std::move(*slot));
    return results;
  }
}

template <class F>
auto spawn_job(int size, Backend backend, F&& entry) {
  JobOptions options;
  options.backend = backend;
  return spawn_job(size, options, std::forward<F>(entry));
}

/// Settings for one rank of a multi-process TCP job.
struct TcpConfig {
  Rank rank = 0;
  int size = 1;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::size_t buffer_cap = kDefaultBufferCap;
  std::chrono::milliseconds connect_timeout{10000};
};

/// Joins a TCP job as one rank. Rank 0 listens on host:port as the
/// coordinator; the call returns once the full mesh is connected.
Communicator connect_tcp(const TcpConfig& config);

}  // namespace mhb
