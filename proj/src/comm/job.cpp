#include <mutex>
#include <thread>

#include "comm/inprocess.hpp"
#include "comm/tcp.hpp"
#include "mhb/comm.hpp"

namespace mhb {

namespace {

// Live transports of a job, so a failing rank can release the others.
class AbortRegistry {
 public:
  explicit AbortRegistry(int size) : live_(static_cast<std::size_t>(size), nullptr) {}

  void attach(Rank rank, Transport* transport) {
    std::lock_guard lock(mutex_);
    live_[static_cast<std::size_t>(rank)] = transport;
    if (reason_) transport->abort(*reason_);
  }

  void detach(Rank rank) {
    std::lock_guard lock(mutex_);
    live_[static_cast<std::size_t>(rank)] = nullptr;
  }

  void abort_all(const std::string& reason) {
    std::lock_guard lock(mutex_);
    if (!reason_) reason_ = reason;
    for (Transport* t : live_)
      if (t) t->abort(*reason_);
  }

  bool aborted() const {
    std::lock_guard lock(mutex_);
    return reason_.has_value();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<Transport*> live_;
  std::optional<std::string> reason_;
};

struct Failure {
  Rank rank;
  std::string what;
  bool secondary;  // only a consequence of another rank's failure
};

}  // namespace

void run_job(int size, const JobOptions& options, const std::function<void(Communicator&)>& entry) {
  if (size < 1) throw std::invalid_argument("job size must be positive");

  AbortRegistry registry(size);
  std::mutex failure_mutex;
  std::optional<Failure> failure;
  auto record = [&](Rank rank, const std::string& what, bool secondary) {
    std::lock_guard lock(failure_mutex);
    if (!failure || (failure->secondary && !secondary)) failure = Failure{rank, what, secondary};
  };

  std::shared_ptr<InProcessWorld> world;
  UniqueFd coordinator;
  std::uint16_t port = options.port;
  if (options.backend == Backend::InProcess) {
    world = std::make_shared<InProcessWorld>(size, options.buffer_cap);
  } else {
    coordinator = listen_on(options.host, options.port, size + 8);
    port = local_port(coordinator);
  }

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(size));
  for (Rank rank = 0; rank < size; ++rank) {
    UniqueFd own = rank == 0 ? std::move(coordinator) : UniqueFd{};
    threads.emplace_back([&, rank, own = std::move(own)]() mutable {
      auto fail = [&](const std::string& what, bool secondary) {
        record(rank, what, secondary);
        registry.abort_all(secondary ? "job aborted" : "rank " + std::to_string(rank) + " failed: " + what);
      };
      std::unique_ptr<Transport> transport;
      try {
        if (world) {
          transport = std::make_unique<InProcessTransport>(rank, world);
        } else {
          TcpConfig config;
          config.rank = rank;
          config.size = size;
          config.host = options.host;
          config.port = port;
          config.buffer_cap = options.buffer_cap;
          config.connect_timeout = options.connect_timeout;
          transport = std::make_unique<TcpTransport>(config, std::move(own));
        }
      } catch (const std::exception& e) {
        fail(e.what(), false);
        return;
      }
      Transport* raw = transport.get();
      Communicator comm(rank, size, options.backend, std::move(transport));
      registry.attach(rank, raw);
      // Failures are broadcast while this rank's transport is still attached,
      // so its own shutdown skips the orderly goodbye.
      try {
        entry(comm);
      } catch (const JobAborted& e) {
        fail(e.what(), true);
      } catch (const std::exception& e) {
        // Harness wrappers can hide a JobAborted; once the job is down,
        // anything else thrown is a consequence too.
        fail(e.what(), registry.aborted());
      } catch (...) {
        fail("unknown exception", registry.aborted());
      }
      registry.detach(rank);
    });
  }
  for (auto& t : threads) t.join();

  if (failure) throw JobError(failure->rank, failure->what);
}

}  // namespace mhb
