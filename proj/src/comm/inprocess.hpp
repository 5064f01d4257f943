#pragma once

#include <memory>
#include <vector>

#include "comm/mailbox.hpp"
#include "comm/transport.hpp"

namespace mhb {

struct InProcessWorld {
  InProcessWorld(int size, std::size_t cap);
  std::vector<std::unique_ptr<Mailbox>> mailboxes;
};

class InProcessTransport final : public Transport {
 public:
  InProcessTransport(Rank rank, std::shared_ptr<InProcessWorld> world);

  void send(Rank dest, Tag tag, std::span<const std::byte> payload) override;
  Bytes recv(Rank source, Tag tag) override;
  void abort(const std::string& reason) override;

 private:
  Rank rank_;
  std::shared_ptr<InProcessWorld> world_;
};

}  // namespace mhb
