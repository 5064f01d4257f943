#include "comm/inprocess.hpp"

namespace mhb {

InProcessWorld::InProcessWorld(int size, std::size_t cap) {
  mailboxes.reserve(static_cast<std::size_t>(size));
  for (int r = 0; r < size; ++r) mailboxes.push_back(std::make_unique<Mailbox>(size, cap));
}

InProcessTransport::InProcessTransport(Rank rank, std::shared_ptr<InProcessWorld> world)
    : rank_(rank), world_(std::move(world)) {}

void InProcessTransport::send(Rank dest, Tag tag, std::span<const std::byte> payload) {
  world_->mailboxes[static_cast<std::size_t>(dest)]->push(rank_, tag, Bytes(payload.begin(), payload.end()));
}

Bytes InProcessTransport::recv(Rank source, Tag tag) {
  return world_->mailboxes[static_cast<std::size_t>(rank_)]->pop(source, tag);
}

void InProcessTransport::abort(const std::string& reason) {
  for (auto& box : world_->mailboxes) box->abort(reason);
}

}  // namespace mhb
