#include "comm/mailbox.hpp"

namespace mhb {

Mailbox::Mailbox(int size, std::size_t cap)
    : pending_(static_cast<std::size_t>(size), 0), closed_(static_cast<std::size_t>(size), false), cap_(cap) {}

void Mailbox::push(Rank source, Tag tag, Bytes payload) {
  std::unique_lock lock(mutex_);
  auto& pending = pending_[static_cast<std::size_t>(source)];
  // An oversized message is admitted once the pair is fully drained.
  drained_.wait(lock, [&] { return abort_reason_ || pending == 0 || pending < cap_; });
  if (abort_reason_) throw JobAborted(*abort_reason_);
  pending += payload.size();
  queues_[{source, tag}].push_back(std::move(payload));
  arrived_.notify_all();
}

Bytes Mailbox::pop(Rank source, Tag tag) {
  std::unique_lock lock(mutex_);
  const auto key = std::make_pair(source, tag);
  for (;;) {
    if (abort_reason_) throw JobAborted(*abort_reason_);
    auto it = queues_.find(key);
    if (it != queues_.end() && !it->second.empty()) {
      Bytes payload = std::move(it->second.front());
      it->second.pop_front();
      if (it->second.empty()) queues_.erase(it);
      pending_[static_cast<std::size_t>(source)] -= payload.size();
      drained_.notify_all();
      return payload;
    }
    if (closed_[static_cast<std::size_t>(source)])
      throw CommError("recv from rank " + std::to_string(source) + " which has already shut down");
    arrived_.wait(lock);
  }
}

void Mailbox::abort(const std::string& reason) {
  {
    std::lock_guard lock(mutex_);
    if (!abort_reason_) abort_reason_ = reason;
  }
  arrived_.notify_all();
  drained_.notify_all();
}

void Mailbox::close_source(Rank source) {
  {
    std::lock_guard lock(mutex_);
    closed_[static_cast<std::size_t>(source)] = true;
  }
  arrived_.notify_all();
}

bool Mailbox::aborted() const {
  std::lock_guard lock(mutex_);
  return abort_reason_.has_value();
}

std::size_t Mailbox::pending_bytes(Rank source) const {
  std::lock_guard lock(mutex_);
  return pending_[static_cast<std::size_t>(source)];
}

}  // namespace mhb
