#pragma once

// HPCG computational kernels and the multigrid preconditioner. All kernels
// that touch remote data are collective; within a rank they are serial and
// sum in CSR storage order, so results are reproducible run to run.

#include <memory>

#include "mhb/halo.hpp"
#include "mhb/phase_clock.hpp"
#include "mhb/problem.hpp"

namespace mhb {

struct MgConfig {
  int levels = 4;
  int pre_smooth = 1;
  int post_smooth = 1;
};

struct MgLevel {
  CsrMatrix matrix;
  HaloPlan plan;
  int pre_smooth = 1;
  int post_smooth = 1;
  /// Fine local index per coarse point; empty on the coarsest level.
  std::vector<LocalIndex> f2c;
  std::unique_ptr<MgLevel> coarser;
  DistVector axf;
  DistVector coarse_rhs;
  DistVector coarse_x;

  int depth() const noexcept { return 1 + (coarser ? coarser->depth() : 0); }
};

/// Builds up to `config.levels` levels from `problem`, stopping early when
/// a local dimension turns odd. Takes the problem's matrix. Collective.
std::unique_ptr<MgLevel> build_hierarchy(Communicator& comm, Problem& problem, const MgConfig& config = {});

/// Single-level wrapper around an already halo-ready matrix and plan.
std::unique_ptr<MgLevel> make_single_level(CsrMatrix matrix, HaloPlan plan);

/// y = A x after a fresh halo exchange of x.
void spmv(Communicator& comm, const CsrMatrix& matrix, HaloPlan& plan, DistVector& x, DistVector& y,
          PhaseClock* clock = nullptr);

/// One halo exchange of x, then a forward and a backward Gauss-Seidel
/// sweep over the owned rows with the externals frozen.
void symgs(Communicator& comm, const CsrMatrix& matrix, HaloPlan& plan, const DistVector& rhs, DistVector& x,
           PhaseClock* clock = nullptr);

/// Global dot product of the owned entries; identical on every rank.
double dot(Communicator& comm, const DistVector& a, const DistVector& b, PhaseClock* clock = nullptr);

/// w = alpha x + beta y over the owned entries; w may alias x or y.
void waxpby(double alpha, const DistVector& x, double beta, const DistVector& y, DistVector& w,
            PhaseClock* clock = nullptr);

/// coarse_rhs[c] = (rhs - A x)[f2c[c]] by injection.
void restrict_residual(Communicator& comm, MgLevel& level, const DistVector& rhs, DistVector& x,
                       PhaseClock* clock = nullptr);

/// x[f2c[c]] += coarse_x[c].
void prolong_add(MgLevel& level, DistVector& x);

/// V-cycle from a zero initial guess.
void mg_precondition(Communicator& comm, MgLevel& level, const DistVector& rhs, DistVector& z,
                     PhaseClock* clock = nullptr);

}  // namespace mhb
