#include <cmath>

#include "mhb/bench.hpp"
#include "mhb/solver.hpp"

namespace mhb {

void check_benchmark_grid(int nx, int ny, int nz) {
  for (int n : {nx, ny, nz})
    if (n < 16 || n % 8 != 0)
      throw std::invalid_argument("local grid " + std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                                  std::to_string(nz) + ": every dimension must be >= 16 and a multiple of 8");
}

std::optional<TrialSeries> hpcg_timing(Communicator& comm, const HpcgConfig& config, const TrialOptions& trials) {
  check_benchmark_grid(config.nx, config.ny, config.nz);
  if (config.iterations < 1) throw std::invalid_argument("HPCG timing needs at least one iteration");

  Geometry geometry = Geometry::for_local(comm.size(), comm.rank(), config.nx, config.ny, config.nz);
  Problem problem = generate_problem(geometry);
  const DistVector b = problem.rhs;
  auto top = build_hierarchy(comm, problem, config.mg);
  DistVector x = make_vector(top->matrix);

  CgOptions cg;
  cg.max_iters = config.iterations;
  cg.tolerance = 0.0;
  cg.preconditioned = true;

  PhaseClock::Totals phases{};
  int trial = 0;
  auto samples = run_measured_trials(
      [&] {
        const bool recorded = trial++ >= trials.warmup;
        x.fill(0.0);
        comm.barrier();
        const std::int64_t start = monotonic_ns();
        const CgResult result = cg_solve(comm, *top, b, x, cg);
        comm.barrier();
        const auto elapsed = static_cast<double>(monotonic_ns() - start);

        const auto& h = result.residual_history;
        if (!std::isfinite(h.back()) || !(h.back() < h.front()))
          throw IntegrityError("HPCG residual did not decrease: " + std::to_string(h.front()) + " -> " +
                               std::to_string(h.back()));
        if (recorded)
          for (std::size_t p = 0; p < kPhaseCount; ++p) phases[p] += result.phase_ns[p];
        return elapsed;
      },
      trials);

  if (comm.rank() != 0) return std::nullopt;
  TrialSeries series;
  series.label = "hpcg";
  series.params = {{"np", std::to_string(comm.size())},
                   {"backend", to_string(comm.backend())},
                   {"nx", std::to_string(config.nx)},
                   {"ny", std::to_string(config.ny)},
                   {"nz", std::to_string(config.nz)},
                   {"iterations", std::to_string(config.iterations)},
                   {"mg_levels", std::to_string(top->depth())}};
  series.samples = std::move(samples);
  for (std::size_t p = 0; p < kPhaseCount; ++p)
    series.breakdown[std::string(phase_name(static_cast<Phase>(p)))] = static_cast<double>(phases[p]);
  return series;
}

std::vector<SeriesRecord> run_hpcg_sweep(const HpcgSweep& sweep, const TrialOptions& trials) {
  std::vector<SeriesRecord> records;
  for (int n : sweep.local_sizes) {
    check_benchmark_grid(n, n, n);
    for (int ranks : sweep.rank_counts) {
      HpcgConfig config;
      config.nx = config.ny = config.nz = n;
      config.iterations = sweep.iterations;
      config.mg = sweep.mg;
      auto results = spawn_job(ranks, sweep.backend,
                               [&](Communicator& comm) { return hpcg_timing(comm, config, trials); });
      records.push_back(make_record(std::move(*results.front()), trials.tukey_k));
    }
  }
  return records;
}

}  // namespace mhb
