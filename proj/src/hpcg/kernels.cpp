#include "mhb/kernels.hpp"

#include <stdexcept>
#include <string>

namespace mhb {

namespace {

void exchange(Communicator& comm, HaloPlan& plan, DistVector& x, PhaseClock* clock) {
  ScopedPhase phase(clock, Phase::Halo);
  exchange_halo(comm, plan, x);
}

std::unique_ptr<MgLevel> make_level(Communicator& comm, const Geometry& geometry, CsrMatrix matrix,
                                    const MgConfig& config) {
  auto level = std::make_unique<MgLevel>();
  level->plan = setup_halo(comm, geometry, matrix);
  level->matrix = std::move(matrix);
  level->pre_smooth = config.pre_smooth;
  level->post_smooth = config.post_smooth;
  level->axf = make_vector(level->matrix);
  return level;
}

}  // namespace

std::unique_ptr<MgLevel> build_hierarchy(Communicator& comm, Problem& problem, const MgConfig& config) {
  if (config.levels < 1) throw std::invalid_argument("multigrid needs at least one level");
  if (config.pre_smooth < 0 || config.post_smooth < 0) throw std::invalid_argument("smoothing steps must be >= 0");

  // Coarse matrices are generated before the finer level's halo setup
  // releases its global column ids.
  std::vector<Geometry> geometries{problem.geometry};
  std::vector<CsrMatrix> matrices;
  std::vector<std::vector<LocalIndex>> f2c;
  matrices.push_back(std::move(problem.matrix));
  while (static_cast<int>(geometries.size()) < config.levels && geometries.back().can_coarsen()) {
    CoarseProblem coarse = generate_coarse_problem(geometries.back(), matrices.back());
    f2c.push_back(std::move(coarse.f2c));
    geometries.push_back(coarse.geometry);
    matrices.push_back(std::move(coarse.matrix));
  }

  std::unique_ptr<MgLevel> coarser;
  for (std::size_t n = geometries.size(); n-- > 0;) {
    // Halo setup is collective; every rank walks the levels in the same order.
    auto level = make_level(comm, geometries[n], std::move(matrices[n]), config);
    if (coarser) {
      level->f2c = std::move(f2c[n]);
      level->coarse_rhs = make_vector(coarser->matrix);
      level->coarse_x = make_vector(coarser->matrix);
      level->coarser = std::move(coarser);
    }
    coarser = std::move(level);
  }
  return coarser;
}

std::unique_ptr<MgLevel> make_single_level(CsrMatrix matrix, HaloPlan plan) {
  auto level = std::make_unique<MgLevel>();
  level->matrix = std::move(matrix);
  level->plan = std::move(plan);
  level->axf = make_vector(level->matrix);
  return level;
}

void spmv(Communicator& comm, const CsrMatrix& matrix, HaloPlan& plan, DistVector& x, DistVector& y,
          PhaseClock* clock) {
  ScopedPhase phase(clock, Phase::Spmv);
  if (y.size() != matrix.nrows) throw std::invalid_argument("spmv: output has wrong length");
  exchange(comm, plan, x, clock);
  const double* xv = x.all().data();
  const auto* offsets = matrix.row_offsets.data();
  const auto* cols = matrix.col_indices.data();
  const auto* vals = matrix.values.data();
  for (LocalIndex i = 0; i < matrix.nrows; ++i) {
    double sum = 0.0;
    for (auto k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * xv[cols[k]];
    y[i] = sum;
  }
}

void symgs(Communicator& comm, const CsrMatrix& matrix, HaloPlan& plan, const DistVector& rhs, DistVector& x,
           PhaseClock* clock) {
  exchange(comm, plan, x, clock);
  ScopedPhase phase(clock, Phase::Mg);
  double* xv = x.all().data();
  const auto* offsets = matrix.row_offsets.data();
  const auto* cols = matrix.col_indices.data();
  const auto* vals = matrix.values.data();
  const auto* diag = matrix.diag_pos.data();

  auto relax = [&](LocalIndex i) {
    const auto begin = offsets[i];
    const auto dk = begin + diag[i];
    const double d = vals[dk];
    if (d == 0.0) throw std::runtime_error("symgs: zero diagonal in row " + std::to_string(i));
    double sum = rhs[i];
    for (auto k = begin; k < offsets[i + 1]; ++k)
      if (k != dk) sum -= vals[k] * xv[cols[k]];
    xv[i] = sum / d;
  };
  for (LocalIndex i = 0; i < matrix.nrows; ++i) relax(i);
  for (LocalIndex i = matrix.nrows; i-- > 0;) relax(i);
}

double dot(Communicator& comm, const DistVector& a, const DistVector& b, PhaseClock* clock) {
  ScopedPhase phase(clock, Phase::Dot);
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  const auto av = a.owned();
  const auto bv = b.owned();
  double local = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) local += av[i] * bv[i];
  ScopedPhase reduce(clock, Phase::Allreduce);
  return comm.allreduce_sum(local);
}

void waxpby(double alpha, const DistVector& x, double beta, const DistVector& y, DistVector& w, PhaseClock* clock) {
  ScopedPhase phase(clock, Phase::Waxpby);
  if (x.size() != y.size() || x.size() != w.size()) throw std::invalid_argument("waxpby: length mismatch");
  const auto xv = x.owned();
  const auto yv = y.owned();
  auto wv = w.owned();
  if (alpha == 1.0) {
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = xv[i] + beta * yv[i];
  } else if (beta == 1.0) {
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = alpha * xv[i] + yv[i];
  } else {
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = alpha * xv[i] + beta * yv[i];
  }
}

void restrict_residual(Communicator& comm, MgLevel& level, const DistVector& rhs, DistVector& x, PhaseClock* clock) {
  if (!level.coarser) throw std::logic_error("restrict_residual on the coarsest level");
  spmv(comm, level.matrix, level.plan, x, level.axf, clock);
  for (std::size_t c = 0; c < level.f2c.size(); ++c) {
    const LocalIndex f = level.f2c[c];
    level.coarse_rhs[static_cast<LocalIndex>(c)] = rhs[f] - level.axf[f];
  }
}

void prolong_add(MgLevel& level, DistVector& x) {
  if (!level.coarser) throw std::logic_error("prolong_add on the coarsest level");
  for (std::size_t c = 0; c < level.f2c.size(); ++c) x[level.f2c[c]] += level.coarse_x[static_cast<LocalIndex>(c)];
}

void mg_precondition(Communicator& comm, MgLevel& level, const DistVector& rhs, DistVector& z, PhaseClock* clock) {
  ScopedPhase phase(clock, Phase::Mg);
  z.fill(0.0);
  for (int s = 0; s < level.pre_smooth; ++s) symgs(comm, level.matrix, level.plan, rhs, z, clock);
  if (!level.coarser) return;
  restrict_residual(comm, level, rhs, z, clock);
  mg_precondition(comm, *level.coarser, level.coarse_rhs, level.coarse_x, clock);
  prolong_add(level, z);
  for (int s = 0; s < level.post_smooth; ++s) symgs(comm, level.matrix, level.plan, rhs, z, clock);
}

}  // namespace mhb
