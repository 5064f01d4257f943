#include "comm/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "mhb/wire.hpp"

namespace mhb {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void throw_errno(const std::string& what) {
  throw CommError(what + ": " + std::strerror(errno));
}

in_addr resolve_ipv4(const std::string& host) {
  in_addr addr{};
  if (::inet_pton(AF_INET, host.c_str(), &addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr)
    throw CommError("cannot resolve host '" + host + "'");
  addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
  ::freeaddrinfo(result);
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

void write_all(int fd, std::span<const std::byte> data) {
  const auto* p = reinterpret_cast<const char*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::send(fd, p, left, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket write");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

/// False on orderly EOF before the first byte; throws on EOF mid-buffer.
bool read_exact(int fd, std::span<std::byte> data) {
  auto* p = reinterpret_cast<char*>(data.data());
  std::size_t got = 0;
  while (got < data.size()) {
    const ssize_t n = ::recv(fd, p + got, data.size() - got, 0);
    if (n == 0) {
      if (got == 0) return false;
      throw CommError("connection closed mid-frame");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket read");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

void write_frame(int fd, std::uint32_t source, Tag tag, std::span<const std::byte> payload) {
  const wire::HeaderBytes header = wire::encode_header({source, tag, payload.size()});
  write_all(fd, header);
  if (!payload.empty()) write_all(fd, payload);
}

struct Frame {
  wire::FrameHeader header;
  Bytes payload;
};

std::optional<Frame> read_frame(int fd) {
  wire::HeaderBytes raw;
  if (!read_exact(fd, raw)) return std::nullopt;
  Frame frame{wire::decode_header(raw), {}};
  frame.payload.resize(frame.header.length);
  if (frame.header.length > 0 && !read_exact(fd, frame.payload)) throw CommError("connection closed mid-frame");
  return frame;
}

Frame expect_frame(int fd, Tag tag, const char* what) {
  auto frame = read_frame(fd);
  if (!frame) throw CommError(std::string("connection closed while waiting for ") + what);
  if (frame->header.tag != tag) throw CommError(std::string("unexpected frame while waiting for ") + what);
  return std::move(*frame);
}

void wait_readable(int fd, Clock::time_point deadline, const char* what) {
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) throw CommError(std::string("timed out waiting for ") + what);
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left));
    if (rc > 0) return;
    if (rc < 0 && errno != EINTR) throw_errno("poll");
  }
}

UniqueFd accept_one(const UniqueFd& listener, Clock::time_point deadline) {
  wait_readable(listener.get(), deadline, "peer connection");
  const int fd = ::accept(listener.get(), nullptr, nullptr);
  if (fd < 0) throw_errno("accept");
  set_nodelay(fd);
  return UniqueFd(fd);
}

UniqueFd connect_to(in_addr addr, std::uint16_t port, Clock::time_point deadline) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr = addr;
  sa.sin_port = htons(port);
  for (;;) {
    UniqueFd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd) throw_errno("socket");
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) == 0) {
      set_nodelay(fd.get());
      return fd;
    }
    if (errno != ECONNREFUSED && errno != EINTR && errno != ETIMEDOUT && errno != EAGAIN)
      throw_errno("connect");
    if (Clock::now() >= deadline) throw CommError("connection timeout reaching " + std::string(inet_ntoa(addr)) +
                                                  ":" + std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

// Address table entry: IPv4 address in network order, then LE port.
constexpr std::size_t kEntrySize = 8;

}  // namespace

UniqueFd::~UniqueFd() {
  if (fd_ >= 0) ::close(fd_);
}

UniqueFd& UniqueFd::operator=(UniqueFd&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

UniqueFd listen_on(const std::string& host, std::uint16_t port, int backlog) {
  UniqueFd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd) throw_errno("socket");
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr = host.empty() ? in_addr{htonl(INADDR_ANY)} : resolve_ipv4(host);
  sa.sin_port = htons(port);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
    throw_errno("bind " + host + ":" + std::to_string(port));
  if (::listen(fd.get(), backlog) != 0) throw_errno("listen");
  return fd;
}

std::uint16_t local_port(const UniqueFd& fd) {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  if (::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&sa), &len) != 0) throw_errno("getsockname");
  return ntohs(sa.sin_port);
}

TcpTransport::TcpTransport(const TcpConfig& config, UniqueFd coordinator)
    : config_(config), mailbox_(config.size, config.buffer_cap), peers_(static_cast<std::size_t>(config.size)) {
  if (config.size < 1 || config.rank < 0 || config.rank >= config.size)
    throw std::invalid_argument("invalid TCP rank/size");
  if (config.rank == 0) {
    if (!coordinator) coordinator = listen_on(config.host, config.port, config.size + 8);
    bring_up_coordinator(std::move(coordinator));
  } else {
    bring_up_worker();
  }
  for (Rank peer = 0; peer < config_.size; ++peer)
    if (peer != config_.rank) readers_.emplace_back([this, peer] { reader_loop(peer); });
}

void TcpTransport::bring_up_coordinator(UniqueFd listener) {
  const auto deadline = Clock::now() + config_.connect_timeout;
  const int size = config_.size;
  Bytes table(static_cast<std::size_t>(size) * kEntrySize);
  for (int n = 1; n < size; ++n) {
    UniqueFd fd = accept_one(listener, deadline);
    wait_readable(fd.get(), deadline, "hello frame");
    const Frame hello = expect_frame(fd.get(), wire::kHelloTag, "hello frame");
    const auto peer = static_cast<Rank>(hello.header.source);
    if (peer <= 0 || peer >= size || peers_[static_cast<std::size_t>(peer)])
      throw CommError("bad or duplicate hello from rank " + std::to_string(peer));
    const Frame address = expect_frame(fd.get(), wire::kAddressTag, "listener address");
    if (address.payload.size() != 4) throw CommError("malformed listener address");
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    if (::getpeername(fd.get(), reinterpret_cast<sockaddr*>(&sa), &len) != 0) throw_errno("getpeername");
    std::byte* entry = table.data() + static_cast<std::size_t>(peer) * kEntrySize;
    std::memcpy(entry, &sa.sin_addr, 4);
    std::memcpy(entry + 4, address.payload.data(), 4);
    peers_[static_cast<std::size_t>(peer)] = std::move(fd);
  }
  for (int peer = 1; peer < size; ++peer)
    write_frame(peers_[static_cast<std::size_t>(peer)].get(), 0, wire::kAddressTag, table);
}

void TcpTransport::bring_up_worker() {
  const auto deadline = Clock::now() + config_.connect_timeout;
  const Rank me = config_.rank;
  const int size = config_.size;
  const auto self_id = static_cast<std::uint32_t>(me);

  UniqueFd listener = listen_on("", 0, size + 8);
  std::byte port_le[4];
  wire::store_le(port_le, local_port(listener), 4);

  UniqueFd coordinator = connect_to(resolve_ipv4(config_.host), config_.port, deadline);
  write_frame(coordinator.get(), self_id, wire::kHelloTag, {});
  write_frame(coordinator.get(), self_id, wire::kAddressTag, port_le);
  wait_readable(coordinator.get(), deadline, "address table");
  const Frame table = expect_frame(coordinator.get(), wire::kAddressTag, "address table");
  if (table.payload.size() != static_cast<std::size_t>(size) * kEntrySize) throw CommError("malformed address table");
  peers_[0] = std::move(coordinator);

  // Lower ranks listen for us; we listen for higher ranks.
  for (Rank lower = 1; lower < me; ++lower) {
    const std::byte* entry = table.payload.data() + static_cast<std::size_t>(lower) * kEntrySize;
    in_addr addr;
    std::memcpy(&addr, entry, 4);
    const auto port = static_cast<std::uint16_t>(wire::load_le(entry + 4, 4));
    UniqueFd fd = connect_to(addr, port, deadline);
    write_frame(fd.get(), self_id, wire::kHelloTag, {});
    peers_[static_cast<std::size_t>(lower)] = std::move(fd);
  }
  for (int n = me + 1; n < size; ++n) {
    UniqueFd fd = accept_one(listener, deadline);
    wait_readable(fd.get(), deadline, "hello frame");
    const Frame hello = expect_frame(fd.get(), wire::kHelloTag, "hello frame");
    const auto peer = static_cast<Rank>(hello.header.source);
    if (peer <= me || peer >= size || peers_[static_cast<std::size_t>(peer)])
      throw CommError("bad or duplicate hello from rank " + std::to_string(peer));
    peers_[static_cast<std::size_t>(peer)] = std::move(fd);
  }
}

void TcpTransport::reader_loop(Rank peer) {
  const int fd = peers_[static_cast<std::size_t>(peer)].get();
  bool said_bye = false;
  try {
    for (;;) {
      auto frame = read_frame(fd);
      if (!frame) break;
      if (frame->header.source != static_cast<std::uint32_t>(peer))
        throw CommError("frame from rank " + std::to_string(peer) + " claims source " +
                        std::to_string(frame->header.source));
      if (frame->header.tag == wire::kByeTag) {
        said_bye = true;
        mailbox_.close_source(peer);
        continue;
      }
      try {
        mailbox_.push(peer, frame->header.tag, std::move(frame->payload));
      } catch (const JobAborted&) {
        // keep draining so the peer never blocks on a dead reader
      }
    }
  } catch (const std::exception& e) {
    if (!aborted_ && !closing_) mailbox_.abort("connection to rank " + std::to_string(peer) + " failed: " + e.what());
    return;
  }
  if (!said_bye && !aborted_ && !closing_)
    mailbox_.abort("lost connection to rank " + std::to_string(peer));
}

TcpTransport::~TcpTransport() {
  closing_ = true;
  const auto self_id = static_cast<std::uint32_t>(config_.rank);
  if (!aborted_) {
    for (auto& fd : peers_) {
      if (!fd) continue;
      try {
        write_frame(fd.get(), self_id, wire::kByeTag, {});
      } catch (const CommError&) {
      }
      ::shutdown(fd.get(), SHUT_WR);
    }
  }
  mailbox_.abort("transport closed");
  for (auto& reader : readers_) reader.join();
}

void TcpTransport::send(Rank dest, Tag tag, std::span<const std::byte> payload) {
  if (aborted_) throw JobAborted("job aborted");
  if (dest == config_.rank) {
    mailbox_.push(dest, tag, Bytes(payload.begin(), payload.end()));
    return;
  }
  try {
    write_frame(peers_[static_cast<std::size_t>(dest)].get(), static_cast<std::uint32_t>(config_.rank), tag,
                payload);
  } catch (const CommError& e) {
    if (aborted_ || mailbox_.aborted()) throw JobAborted(std::string("job aborted: ") + e.what());
    throw;
  }
}

Bytes TcpTransport::recv(Rank source, Tag tag) { return mailbox_.pop(source, tag); }

void TcpTransport::abort(const std::string& reason) {
  if (aborted_.exchange(true)) return;
  mailbox_.abort(reason);
  for (auto& fd : peers_)
    if (fd) ::shutdown(fd.get(), SHUT_RDWR);
}

Communicator connect_tcp(const TcpConfig& config) {
  return Communicator(config.rank, config.size, Backend::Tcp, std::make_unique<TcpTransport>(config));
}

}  // namespace mhb
