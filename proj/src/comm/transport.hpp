#pragma once

#include <span>

#include "mhb/comm.hpp"

namespace mhb {

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(Rank dest, Tag tag, std::span<const std::byte> payload) = 0;
  virtual Bytes recv(Rank source, Tag tag) = 0;
  /// Tear down: every blocked or future operation fails with JobAborted.
  virtual void abort(const std::string& reason) = 0;
};

}  // namespace mhb
