#include "mhb/comm.hpp"

#include <bit>

#include "comm/transport.hpp"

namespace mhb {

namespace {

constexpr Tag kReduceTag = 0xFFFFFF00u;
constexpr Tag kBcastTag = 0xFFFFFF01u;
constexpr Tag kBarrierReduceTag = 0xFFFFFF02u;
constexpr Tag kBarrierBcastTag = 0xFFFFFF03u;

Bytes encode_double(double v) {
  Bytes out(sizeof v);
  std::memcpy(out.data(), &v, sizeof v);
  return out;
}

double decode_double(const Bytes& raw) {
  if (raw.size() != sizeof(double)) throw CommError("collective payload has wrong size");
  double v;
  std::memcpy(&v, raw.data(), sizeof v);
  return v;
}

}  // namespace

std::string to_string(Backend backend) {
  return backend == Backend::InProcess ? "inproc" : "tcp";
}

Backend parse_backend(const std::string& name) {
  if (name == "inproc") return Backend::InProcess;
  if (name == "tcp") return Backend::Tcp;
  throw std::invalid_argument("unknown backend '" + name + "' (expected inproc or tcp)");
}

Communicator::Communicator(Rank rank, int size, Backend backend, std::unique_ptr<Transport> transport)
    : rank_(rank), size_(size), backend_(backend), transport_(std::move(transport)) {
  if (size < 1) throw std::invalid_argument("communicator size must be positive");
  if (rank < 0 || rank >= size) throw std::invalid_argument("rank out of range");
}

Communicator::~Communicator() = default;
Communicator::Communicator(Communicator&&) noexcept = default;
Communicator& Communicator::operator=(Communicator&&) noexcept = default;

void Communicator::check_peer(Rank peer, const char* what) const {
  if (peer < 0 || peer >= size_)
    throw CommError(std::string(what) + ": rank " + std::to_string(peer) + " out of range [0, " +
                    std::to_string(size_) + ")");
}

void Communicator::send(Rank dest, Tag tag, std::span<const std::byte> payload) {
  check_peer(dest, "send");
  if (tag >= kFirstReservedTag) throw CommError("send: tag " + std::to_string(tag) + " is reserved");
  transport_->send(dest, tag, payload);
  ++counters_.sends;
  counters_.bytes_sent += payload.size();
}

Bytes Communicator::recv(Rank source, Tag tag) {
  check_peer(source, "recv");
  if (tag >= kFirstReservedTag) throw CommError("recv: tag " + std::to_string(tag) + " is reserved");
  Bytes payload = transport_->recv(source, tag);
  ++counters_.recvs;
  return payload;
}

double Communicator::reduce_broadcast(double local, Tag reduce_tag, Tag bcast_tag) {
  // Reduce: at stride s, rank r with r % 2s == 0 absorbs r + s; the fixed
  // pairing makes the summation order a function of size alone.
  double acc = local;
  for (int stride = 1; stride < size_; stride <<= 1) {
    if (rank_ % (2 * stride) == 0) {
      if (rank_ + stride < size_) acc = acc + decode_double(transport_->recv(rank_ + stride, reduce_tag));
    } else {
      const Bytes out = encode_double(acc);
      transport_->send(rank_ - stride, reduce_tag, out);
      break;
    }
  }
  // Broadcast along the same tree, widest stride first.
  const int top = size_ > 1 ? static_cast<int>(std::bit_floor(static_cast<unsigned>(size_ - 1))) : 0;
  for (int stride = top; stride >= 1; stride >>= 1) {
    if (rank_ % (2 * stride) == 0) {
      if (rank_ + stride < size_) {
        const Bytes out = encode_double(acc);
        transport_->send(rank_ + stride, bcast_tag, out);
      }
    } else if (rank_ % (2 * stride) == stride) {
      acc = decode_double(transport_->recv(rank_ - stride, bcast_tag));
    }
  }
  return acc;
}

double Communicator::allreduce_sum(double local) {
  ++counters_.allreduces;
  if (size_ == 1) return local;
  return reduce_broadcast(local, kReduceTag, kBcastTag);
}

void Communicator::barrier() {
  ++counters_.barriers;
  if (size_ == 1) return;
  reduce_broadcast(0.0, kBarrierReduceTag, kBarrierBcastTag);
}

}  // namespace mhb
