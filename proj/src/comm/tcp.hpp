#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "comm/mailbox.hpp"
#include "comm/transport.hpp"

namespace mhb {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  ~UniqueFd();
  UniqueFd(UniqueFd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& other) noexcept;
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

/// Bound, listening IPv4 socket. Port 0 asks the kernel for a free port.
UniqueFd listen_on(const std::string& host, std::uint16_t port, int backlog);
std::uint16_t local_port(const UniqueFd& fd);

class TcpTransport final : public Transport {
 public:
  /// Rank 0 may be handed an already-listening coordinator socket.
  explicit TcpTransport(const TcpConfig& config, UniqueFd coordinator = {});
  ~TcpTransport() override;

  void send(Rank dest, Tag tag, std::span<const std::byte> payload) override;
  Bytes recv(Rank source, Tag tag) override;
  void abort(const std::string& reason) override;

 private:
  void bring_up_coordinator(UniqueFd listener);
  void bring_up_worker();
  void reader_loop(Rank peer);

  TcpConfig config_;
  Mailbox mailbox_;
  std::vector<UniqueFd> peers_;
  std::vector<std::thread> readers_;
  std::atomic<bool> aborted_{false};
  std::atomic<bool> closing_{false};
};

}  // namespace mhb
