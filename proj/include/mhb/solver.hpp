#pragma once

// Preconditioned conjugate gradient and its distributed-vs-serial check.

#include <optional>
#include <string>
#include <vector>

#include "mhb/kernels.hpp"

namespace mhb {

struct CgOptions {
  int max_iters = 50;
  double tolerance = 0.0;
  bool preconditioned = true;
};

struct CgResult {
  int iterations = 0;
  /// ||r||_2 of the recurrence residual, starting with the initial one.
  std::vector<double> residual_history;
  double final_relative_residual = 0.0;
  /// ||b - A x||_2 recomputed once after the loop.
  double explicit_residual = 0.0;
  /// Exclusive wall time per phase over the iteration loop.
  PhaseClock::Totals phase_ns{};
  std::int64_t total_ns = 0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collective. Stops when ||r|| / ||r0|| <= tolerance or after max_iters.
/// Throws SolverError when <p, Ap> <= 0 or the residual is not finite.
CgResult cg_solve(Communicator& comm, MgLevel& top, const DistVector& b, DistVector& x, const CgOptions& options);

struct GlobalDims {
  std::int64_t x = 16;
  std::int64_t y = 16;
  std::int64_t z = 16;
};

/// Adds `delta` to the diagonal of `row` in the run on `ranks` ranks.
struct Perturbation {
  int ranks = 1;
  GlobalIndex row = 0;
  double delta = 0.0;
};

struct VerifyOptions {
  int iterations = 10;
  bool preconditioned = false;
  double relative_tolerance = 1e-8;
  MgConfig mg{};
  std::optional<Perturbation> perturbation;
};

struct VerifyEntry {
  int ranks = 1;
  std::vector<double> residuals;
  double max_relative_deviation = 0.0;
  /// First iteration whose residual leaves the tolerance band.
  std::optional<int> first_divergent_iteration;
  bool ok = true;
  std::string message;
};

struct VerifyReport {
  std::vector<double> serial_residuals;
  std::vector<VerifyEntry> entries;
  bool ok = true;

  std::string summary() const;
};

/// Solves the same global problem on one rank and on each count in
/// `rank_counts` (in-process backend) and compares residual histories.
/// Unpreconditioned runs must agree per iteration within the relative
/// tolerance; preconditioned runs must decrease monotonically and end
/// within 10x of the serial final residual.
VerifyReport verify_against_serial(const GlobalDims& dims, const std::vector<int>& rank_counts,
                                   const VerifyOptions& options);

}  // namespace mhb
