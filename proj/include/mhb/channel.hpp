#pragma once

// In-process producer/consumer queues used by the intra-node benchmarks.

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace mhb {

/// Mutex-protected FIFO with a fixed capacity.
template <class T>
class BoundedChannel {
 public:
  explicit BoundedChannel(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("BoundedChannel capacity must be positive");
  }

  void put(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  T take() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty(); });
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  /// Copy of the front item, left in place.
  T fetch() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty(); });
    return items_.front();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t capacity_;
};

/// Capacity-0 channel: a put completes only when a taker has the item.
template <class T>
class RendezvousChannel {
 public:
  /// Hands `value` over and wakes a taker without waiting for it.
  void offer(T value) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !slot_ && !awaiting_; });
    slot_.emplace(std::move(value));
    awaiting_ = true;
    cv_.notify_all();
  }

  /// Blocks until the last offered item has been taken.
  void await_taken() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !slot_; });
    awaiting_ = false;
    cv_.notify_all();
  }

  void put(T value) {
    offer(std::move(value));
    await_taken();
  }

  T take() {
    std::unique_lock lock(mutex_);
    ++waiting_;
    cv_.notify_all();
    cv_.wait(lock, [&] { return slot_.has_value(); });
    --waiting_;
    T value = std::move(*slot_);
    slot_.reset();
    cv_.notify_all();
    return value;
  }

  /// Blocks until at least one taker is parked in take().
  void wait_for_taker() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return waiting_ > 0; });
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<T> slot_;
  bool awaiting_ = false;
  int waiting_ = 0;
};

}  // namespace mhb
