#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mhb/comm.hpp"

namespace mhb {

// Incoming message store of one rank, matched by exact (source, tag).
// Bytes buffered per source are bounded by `cap`; push blocks above it.
class Mailbox {
 public:
  Mailbox(int size, std::size_t cap);

  void push(Rank source, Tag tag, Bytes payload);
  Bytes pop(Rank source, Tag tag);

  void abort(const std::string& reason);
  /// The source will send nothing more; a pop that would wait on it fails.
  void close_source(Rank source);

  bool aborted() const;
  std::size_t pending_bytes(Rank source) const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable arrived_;
  std::condition_variable drained_;
  std::map<std::pair<Rank, Tag>, std::deque<Bytes>> queues_;
  std::vector<std::size_t> pending_;
  std::vector<bool> closed_;
  std::size_t cap_;
  std::optional<std::string> abort_reason_;
};

}  // namespace mhb
