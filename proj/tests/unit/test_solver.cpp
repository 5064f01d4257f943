#include <cmath>

#include <gtest/gtest.h>

#include "mhb/solver.hpp"
#include "oracle.hpp"

using namespace mhb;

namespace {

std::unique_ptr<MgLevel> diagonal_system(std::vector<double> diag) {
  CsrMatrix m;
  m.nrows = m.ncols = static_cast<LocalIndex>(diag.size());
  m.row_offsets.push_back(0);
  for (std::size_t i = 0; i < diag.size(); ++i) {
    m.col_indices.push_back(static_cast<LocalIndex>(i));
    m.values.push_back(diag[i]);
    m.diag_pos.push_back(0);
    m.row_offsets.push_back(static_cast<std::int64_t>(i + 1));
  }
  HaloPlan plan;
  plan.nrows = m.nrows;
  return make_single_level(std::move(m), std::move(plan));
}

}  // namespace

TEST(Solver, ScaledIdentityConvergesInOneIteration) {
  spawn_job(1, Backend::InProcess, [](Communicator& comm) {
    auto top = diagonal_system({26.0, 26.0});
    DistVector b(2), x(2);
    b[0] = 26.0;
    b[1] = 52.0;
    const CgResult r = cg_solve(comm, *top, b, x, CgOptions{10, 1e-14, false});
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(x[0], 1.0);
    EXPECT_EQ(x[1], 2.0);
    EXPECT_EQ(r.explicit_residual, 0.0);
  });
}

TEST(Solver, ZeroRhsReturnsZeroImmediately) {
  spawn_job(2, Backend::InProcess, [](Communicator& comm) {
    Problem p = generate_problem(Geometry::for_global(2, comm.rank(), 8, 8, 8));
    auto top = build_hierarchy(comm, p);
    DistVector b = make_vector(top->matrix), x = make_vector(top->matrix);
    const CgResult r = cg_solve(comm, *top, b, x, CgOptions{});
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.residual_history, std::vector<double>{0.0});
    for (double v : x.owned()) EXPECT_EQ(v, 0.0);
  });
}

TEST(Solver, IndefiniteMatrixIsReported) {
  spawn_job(1, Backend::InProcess, [](Communicator& comm) {
    auto top = diagonal_system({1.0, -1.0});
    DistVector b(2, 0, 1.0), x(2);
    b[0] = 0.0;
    EXPECT_THROW(cg_solve(comm, *top, b, x, CgOptions{5, 0.0, false}), SolverError);
  });
}

TEST(Solver, NonFiniteRhsIsReported) {
  spawn_job(1, Backend::InProcess, [](Communicator& comm) {
    auto top = diagonal_system({2.0});
    DistVector b(1, 0, std::nan("")), x(1);
    EXPECT_THROW(cg_solve(comm, *top, b, x, CgOptions{5, 0.0, false}), SolverError);
  });
}

TEST(Solver, RejectsBadOptionsAndShapes) {
  spawn_job(1, Backend::InProcess, [](Communicator& comm) {
    auto top = diagonal_system({2.0, 2.0});
    DistVector b(2, 0, 1.0), x(2), wrong(3);
    EXPECT_THROW(cg_solve(comm, *top, b, x, CgOptions{5, -1.0, false}), std::invalid_argument);
    EXPECT_THROW(cg_solve(comm, *top, b, x, CgOptions{-1, 0.0, false}), std::invalid_argument);
    EXPECT_THROW(cg_solve(comm, *top, b, wrong, CgOptions{}), std::invalid_argument);
  });
}

TEST(Solver, MatchesDenseCholeskySolve) {
  const auto a = oracle::assemble(4, 4, 4);
  std::vector<double> b(64);
  for (std::size_t g = 0; g < 64; ++g) b[g] = deterministic_value(static_cast<GlobalIndex>(g));
  auto l = oracle::dense(a);
  ASSERT_TRUE(oracle::cholesky(l, 64));
  const auto expected = oracle::cholesky_solve(l, 64, b);

  for (bool preconditioned : {false, true}) {
    spawn_job(1, Backend::InProcess, [&](Communicator& comm) {
      Problem p = generate_problem(Geometry(ProcessGrid{1, 1, 1}, 0, 4, 4, 4));
      const Geometry geom = p.geometry;
      auto top = build_hierarchy(comm, p);
      DistVector rhs(64), x = make_vector(top->matrix);
      fill_deterministic(rhs, geom);
      const CgResult r = cg_solve(comm, *top, rhs, x, CgOptions{100, 1e-13, preconditioned});
      EXPECT_LT(r.iterations, 100);
      for (LocalIndex i = 0; i < 64; ++i) EXPECT_NEAR(x[i], expected[static_cast<std::size_t>(i)], 1e-10);
    });
  }
}

TEST(Solver, ToleranceStopsEarly) {
  spawn_job(2, Backend::InProcess, [](Communicator& comm) {
    Problem p = generate_problem(Geometry::for_global(2, comm.rank(), 16, 16, 16));
    const DistVector b = p.rhs;
    auto top = build_hierarchy(comm, p);
    DistVector x = make_vector(top->matrix);
    const CgResult r = cg_solve(comm, *top, b, x, CgOptions{50, 1e-6, true});
    EXPECT_LT(r.iterations, 50);
    EXPECT_LE(r.final_relative_residual, 1e-6);
    EXPECT_EQ(r.residual_history.size(), static_cast<std::size_t>(r.iterations) + 1);
    EXPECT_LE(r.explicit_residual, 1e-5 * r.residual_history.front());
  });
}

TEST(Solver, PreconditioningCutsIterations) {
  auto iterations = [](bool preconditioned) {
    return spawn_job(1, Backend::InProcess, [&](Communicator& comm) {
      Problem p = generate_problem(Geometry(ProcessGrid{1, 1, 1}, 0, 16, 16, 16));
      const DistVector b = p.rhs;
      auto top = build_hierarchy(comm, p);
      DistVector x = make_vector(top->matrix);
      return cg_solve(comm, *top, b, x, CgOptions{200, 1e-8, preconditioned}).iterations;
    })[0];
  };
  EXPECT_LT(iterations(true), iterations(false));
}

TEST(Solver, PhaseBreakdownFitsInsideTotal) {
  spawn_job(4, Backend::InProcess, [](Communicator& comm) {
    Problem p = generate_problem(Geometry::for_global(4, comm.rank(), 16, 16, 16));
    const DistVector b = p.rhs;
    auto top = build_hierarchy(comm, p);
    DistVector x = make_vector(top->matrix);
    const CgResult r = cg_solve(comm, *top, b, x, CgOptions{5, 0.0, true});
    std::int64_t sum = 0;
    for (auto t : r.phase_ns) {
      EXPECT_GE(t, 0);
      sum += t;
    }
    EXPECT_LE(sum, r.total_ns);
    EXPECT_GT(r.phase_ns[static_cast<std::size_t>(Phase::Mg)], 0);
    EXPECT_GT(r.phase_ns[static_cast<std::size_t>(Phase::Halo)], 0);
  });
}

TEST(Verify, DistributedRunsAgreeWithSerial) {
  const VerifyReport report = verify_against_serial({16, 16, 16}, {2, 4, 8}, VerifyOptions{});
  EXPECT_TRUE(report.ok) << report.summary();
  ASSERT_EQ(report.entries.size(), 3u);
  EXPECT_EQ(report.serial_residuals.size(), 11u);
  for (const auto& e : report.entries) {
    EXPECT_LE(e.max_relative_deviation, 1e-8);
    EXPECT_FALSE(e.first_divergent_iteration);
  }
}

TEST(Verify, PreconditionedRunsDecreaseAndLandNearSerial) {
  VerifyOptions options;
  options.preconditioned = true;
  options.iterations = 5;
  const VerifyReport report = verify_against_serial({16, 16, 16}, {2, 4, 8}, options);
  EXPECT_TRUE(report.ok) << report.summary();
}

TEST(Verify, PerturbedRankCountIsCaught) {
  VerifyOptions options;
  options.perturbation = Perturbation{4, 1234, 1e-3};
  const VerifyReport report = verify_against_serial({16, 16, 16}, {2, 4}, options);
  EXPECT_FALSE(report.ok);
  EXPECT_TRUE(report.entries[0].ok);
  EXPECT_FALSE(report.entries[1].ok);
  ASSERT_TRUE(report.entries[1].first_divergent_iteration);
  EXPECT_GE(*report.entries[1].first_divergent_iteration, 1);
  EXPECT_NE(report.summary().find("FAIL"), std::string::npos);
}
