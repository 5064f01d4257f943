#include "mhb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mhb {

namespace {

double checked_norm(double squared) {
  const double norm = std::sqrt(squared);
  if (!std::isfinite(norm)) throw SolverError("residual is not finite");
  return norm;
}

}  // namespace

CgResult cg_solve(Communicator& comm, MgLevel& top, const DistVector& b, DistVector& x, const CgOptions& options) {
  if (options.tolerance < 0.0) throw std::invalid_argument("tolerance must be non-negative");
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  CsrMatrix& A = top.matrix;
  HaloPlan& plan = top.plan;
  if (b.size() != A.nrows || x.size() != A.nrows) throw std::invalid_argument("cg_solve: vector length mismatch");
  if (x.external_size() != plan.n_external) x.resize_external(plan.n_external);

  DistVector r = make_vector(A);
  DistVector z = make_vector(A);
  DistVector p = make_vector(A);
  DistVector Ap = make_vector(A);

  CgResult result;
  PhaseClock clock;
  const auto start = PhaseClock::Clock::now();
  clock.enter(Phase::Other);

  // r = b - A x
  spmv(comm, A, plan, x, Ap, &clock);
  waxpby(1.0, b, -1.0, Ap, r, &clock);
  double normr = checked_norm(dot(comm, r, r, &clock));
  const double normr0 = normr;
  result.residual_history.push_back(normr);

  double rtz = 0.0;
  int k = 0;
  while (k < options.max_iters && normr0 > 0.0 && normr > 0.0 && normr / normr0 > options.tolerance) {
    ++k;
    if (options.preconditioned)
      mg_precondition(comm, top, r, z, &clock);
    else
      waxpby(1.0, r, 0.0, r, z, &clock);

    if (k == 1) {
      waxpby(1.0, z, 0.0, z, p, &clock);
      rtz = dot(comm, r, z, &clock);
    } else {
      const double old_rtz = rtz;
      rtz = dot(comm, r, z, &clock);
      const double beta = rtz / old_rtz;
      waxpby(1.0, z, beta, p, p, &clock);
    }

    spmv(comm, A, plan, p, Ap, &clock);
    const double pAp = dot(comm, p, Ap, &clock);
    if (!(pAp > 0.0)) throw SolverError("matrix not SPD: <p, Ap> = " + std::to_string(pAp));
    const double alpha = rtz / pAp;
    waxpby(1.0, x, alpha, p, x, &clock);
    waxpby(1.0, r, -alpha, Ap, r, &clock);
    normr = checked_norm(dot(comm, r, r, &clock));
    result.residual_history.push_back(normr);
  }

  clock.leave();
  result.total_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(PhaseClock::Clock::now() - start).count();
  result.phase_ns = clock.totals();
  result.iterations = k;
  result.final_relative_residual = normr0 > 0.0 ? normr / normr0 : 0.0;

  spmv(comm, A, plan, x, Ap);
  waxpby(1.0, b, -1.0, Ap, r);
  result.explicit_residual = std::sqrt(dot(comm, r, r));
  return result;
}

std::string VerifyReport::summary() const {
  std::ostringstream out;
  out << (ok ? "PASS" : "FAIL") << ": " << entries.size() << " configuration(s) checked against 1 rank";
  for (const auto& e : entries) {
    out << "\n  P=" << e.ranks << " max rel deviation " << e.max_relative_deviation;
    if (e.first_divergent_iteration) out << ", first divergent iteration " << *e.first_divergent_iteration;
    if (!e.message.empty()) out << " (" << e.message << ")";
    out << (e.ok ? " ok" : " FAILED");
  }
  return out.str();
}

namespace {

std::vector<double> residual_run(const GlobalDims& dims, int ranks, const VerifyOptions& options) {
  auto histories = spawn_job(ranks, Backend::InProcess, [&](Communicator& comm) {
    Geometry geometry = Geometry::for_global(ranks, comm.rank(), dims.x, dims.y, dims.z);
    Problem problem = generate_problem(geometry);
    if (options.perturbation && options.perturbation->ranks == ranks) {
      const GlobalIndex row = options.perturbation->row;
      const Point3 g = geometry.global_coords(row);
      if (geometry.owns(g)) {
        const LocalIndex i = geometry.local_index_of(g);
        auto& m = problem.matrix;
        m.values[static_cast<std::size_t>(m.row_offsets[static_cast<std::size_t>(i)] + m.diag_pos[static_cast<std::size_t>(i)])] +=
            options.perturbation->delta;
      }
    }
    MgConfig mg = options.mg;
    if (!options.preconditioned) mg.levels = 1;
    auto top = build_hierarchy(comm, problem, mg);
    DistVector x = make_vector(top->matrix);
    CgOptions cg;
    cg.max_iters = options.iterations;
    cg.tolerance = 0.0;
    cg.preconditioned = options.preconditioned;
    return cg_solve(comm, *top, problem.rhs, x, cg).residual_history;
  });
  return histories.front();
}

}  // namespace

VerifyReport verify_against_serial(const GlobalDims& dims, const std::vector<int>& rank_counts,
                                   const VerifyOptions& options) {
  VerifyReport report;
  report.serial_residuals = residual_run(dims, 1, options);
  const auto& serial = report.serial_residuals;

  for (int ranks : rank_counts) {
    VerifyEntry entry;
    entry.ranks = ranks;
    entry.residuals = residual_run(dims, ranks, options);
    const auto& got = entry.residuals;
    if (got.size() != serial.size()) {
      entry.ok = false;
      entry.message = "iteration count differs from serial run";
    }
    const std::size_t n = std::min(got.size(), serial.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double scale = std::abs(serial[k]) > 0.0 ? std::abs(serial[k]) : 1.0;
      const double dev = std::abs(got[k] - serial[k]) / scale;
      entry.max_relative_deviation = std::max(entry.max_relative_deviation, dev);
      if (!options.preconditioned && dev > options.relative_tolerance && !entry.first_divergent_iteration)
        entry.first_divergent_iteration = static_cast<int>(k);
    }
    if (options.preconditioned) {
      for (std::size_t k = 1; k < got.size(); ++k) {
        if (!(got[k] < got[k - 1])) {
          entry.ok = false;
          entry.first_divergent_iteration = static_cast<int>(k);
          entry.message = "residual did not decrease";
          break;
        }
      }
      if (!got.empty() && !serial.empty() && !(got.back() <= 10.0 * serial.back())) {
        entry.ok = false;
        entry.message = "final residual more than 10x the serial one";
      }
    } else if (entry.first_divergent_iteration) {
      entry.ok = false;
    }
    report.ok = report.ok && entry.ok;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace mhb
