#include "mhb/phase_clock.hpp"

#include <numeric>
#include <stdexcept>

namespace mhb {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Spmv: return "spmv";
    case Phase::Mg: return "mg";
    case Phase::Dot: return "dot";
    case Phase::Waxpby: return "waxpby";
    case Phase::Halo: return "halo";
    case Phase::Allreduce: return "allreduce";
    case Phase::Other: return "other";
  }
  return "unknown";
}

void PhaseClock::charge(Clock::time_point now) {
  if (!stack_.empty())
    totals_[static_cast<std::size_t>(stack_.back())] +=
        std::chrono::duration_cast<std::chrono::nanoseconds>(now - mark_).count();
  mark_ = now;
}

void PhaseClock::enter(Phase phase) {
  charge(Clock::now());
  stack_.push_back(phase);
}

void PhaseClock::leave() {
  if (stack_.empty()) throw std::logic_error("PhaseClock::leave without enter");
  charge(Clock::now());
  stack_.pop_back();
}

std::int64_t PhaseClock::sum() const noexcept { return std::accumulate(totals_.begin(), totals_.end(), std::int64_t{0}); }

void PhaseClock::reset() {
  stack_.clear();
  totals_.fill(0);
}

}  // namespace mhb
