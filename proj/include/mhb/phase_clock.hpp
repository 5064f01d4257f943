#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mhb {

enum class Phase { Spmv, Mg, Dot, Waxpby, Halo, Allreduce, Other };
inline constexpr std::size_t kPhaseCount = 7;

std::string_view phase_name(Phase phase);

/// Exclusive per-phase wall time. Entering a nested phase pauses the
/// enclosing one, so the totals never double count.
class PhaseClock {
 public:
  using Clock = std::chrono::steady_clock;
  using Totals = std::array<std::int64_t, kPhaseCount>;

  void enter(Phase phase);
  void leave();

  std::int64_t total(Phase phase) const noexcept { return totals_[static_cast<std::size_t>(phase)]; }
  const Totals& totals() const noexcept { return totals_; }
  std::int64_t sum() const noexcept;
  void reset();

 private:
  void charge(Clock::time_point now);

  std::vector<Phase> stack_;
  Clock::time_point mark_{};
  Totals totals_{};
};

class ScopedPhase {
 public:
  ScopedPhase(PhaseClock* clock, Phase phase) : clock_(clock) {
    if (clock_) clock_->enter(phase);
  }
  ~ScopedPhase() {
    if (clock_) clock_->leave();
  }
  ScopedPhase(const ScopedPhase&) = delete;
  ScopedPhase& operator=(const ScopedPhase&) = delete;

 private:
  PhaseClock* clock_;
};

}  // namespace mhb
