// mhbench: command-line driver for every benchmark.
//
//   mhbench hpcg --nx 32 --ny 32 --nz 32 --np 1,2,4,8 --csv out
//   mhbench bsp --np 4 --steps 100 --backend tcp --csv out
//   mhbench pingpong --backend tcp --max-bytes 1048576 --csv out
//   mhbench micro --kind notify --csv out
//
// Ranks run as threads of this process unless --rank is given, in which
// case this process is one rank of a multi-process TCP job (see README).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mhb/bench.hpp"
#include "mhb/solver.hpp"

namespace {

using namespace mhb;

struct Global {
  TrialOptions trials;
  std::string csv_dir;
  std::string backend = "inproc";
  std::optional<int> rank;
  std::optional<int> world;
  std::string coord = "127.0.0.1:0";
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value ? value : fallback;
}

void read_env(Global& g) {
  if (!g.rank && std::getenv("MHB_RANK")) g.rank = std::stoi(env_or("MHB_RANK", "0"));
  if (!g.world && std::getenv("MHB_WORLD")) g.world = std::stoi(env_or("MHB_WORLD", "1"));
  if (g.coord == "127.0.0.1:0") g.coord = env_or("MHB_COORD", g.coord);
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected host:port, got '" + text + "'");
  const int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in '" + text + "'");
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

using Records = std::vector<SeriesRecord>;
using RankEntry = std::function<Records(Communicator&)>;

// Runs `entry` on `np` ranks; returns rank 0's records, or nothing when
// this process is a non-zero rank of a multi-process job.
std::optional<Records> run_ranks(const Global& g, int np, const RankEntry& entry) {
  const Backend backend = parse_backend(g.backend);
  if (g.rank) {
    if (backend != Backend::Tcp) throw std::invalid_argument("--rank requires --backend tcp");
    if (!g.world || *g.world != np)
      throw std::invalid_argument("--world must equal the rank count (" + std::to_string(np) + ")");
    TcpConfig config;
    config.rank = *g.rank;
    config.size = np;
    std::tie(config.host, config.port) = split_host_port(g.coord);
    if (config.port == 0) throw std::invalid_argument("multi-process jobs need an explicit coordinator port");
    Communicator comm = connect_tcp(config);
    Records records = entry(comm);
    if (comm.rank() != 0) return std::nullopt;
    return records;
  }
  JobOptions options;
  options.backend = backend;
  auto [host, port] = split_host_port(g.coord);
  options.host = host;
  options.port = port;
  return spawn_job(np, options, entry).front();
}

void emit(const Global& g, const std::string& name, const Records& records) {
  for (const auto& r : records) {
    std::cout << r.series.label << " [" << format_params(r.series.params) << "] n=" << r.stats.n_kept << "/"
              << r.stats.n_raw << " mean=" << r.stats.mean << "ns median=" << r.stats.median << "ns";
    if (r.stats.hmean_Bps) std::cout << " hmean=" << *r.stats.hmean_Bps << "B/s";
    std::cout << "\n";
  }
  if (g.csv_dir.empty()) return;
  std::filesystem::create_directories(g.csv_dir);
  const CsvFiles files = write_csv(g.csv_dir, name, records);
  std::cout << "wrote " << files.raw << " and " << files.summary;
  if (files.breakdown) std::cout << " and " << *files.breakdown;
  std::cout << "\n";
}

struct HpcgArgs {
  int nx = 16, ny = 16, nz = 16;
  std::vector<int> np{1};
  std::optional<int> iters;
  std::string mode = "timing";
  bool sweep = false;
  std::string dump_matrix;
};

void dump_matrix(const Global& g, const HpcgArgs& a, int np) {
  if (g.rank) throw std::invalid_argument("--dump-matrix runs ranks in-process; drop --rank");
  auto parts = spawn_job(np, parse_backend(g.backend), [&](Communicator& comm) {
    const Geometry geometry = Geometry::for_local(np, comm.rank(), a.nx, a.ny, a.nz);
    Problem problem = generate_problem(geometry);
    return global_triplets(geometry, problem.matrix);
  });
  std::vector<Triplet> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::ofstream out(a.dump_matrix);
  if (!out) throw std::runtime_error("cannot open " + a.dump_matrix);
  write_coordinate(out, std::move(all));
  std::cout << "wrote " << a.dump_matrix << "\n";
}

int run_hpcg(const Global& g, const HpcgArgs& a) {
  check_benchmark_grid(a.nx, a.ny, a.nz);
  if (!a.dump_matrix.empty()) dump_matrix(g, a, a.np.front());

  if (a.mode == "verify") {
    std::vector<int> counts;
    for (int p : a.np)
      if (p > 1) counts.push_back(p);
    const int p_max = *std::max_element(a.np.begin(), a.np.end());
    // Global grid: local size on the largest rank count.
    const ProcessGrid grid = factor_process_grid(p_max);
    const GlobalDims dims{std::int64_t{a.nx} * grid.px, std::int64_t{a.ny} * grid.py, std::int64_t{a.nz} * grid.pz};
    VerifyOptions options;
    options.iterations = a.iters.value_or(50);
    const VerifyReport report = verify_against_serial(dims, counts, options);
    std::cout << "global grid " << dims.x << "x" << dims.y << "x" << dims.z << "\n" << report.summary() << "\n";
    return report.ok ? 0 : 1;
  }

  if (a.sweep) {
    if (g.rank) throw std::invalid_argument("--sweep launches its own jobs; drop --rank");
    HpcgSweep sweep;
    sweep.rank_counts = a.np;
    sweep.backend = parse_backend(g.backend);
    sweep.iterations = a.iters.value_or(1);
    emit(g, "hpcg", run_hpcg_sweep(sweep, g.trials));
    return 0;
  }

  HpcgConfig config;
  config.nx = a.nx;
  config.ny = a.ny;
  config.nz = a.nz;
  config.iterations = a.iters.value_or(1);
  Records all;
  for (int np : a.np) {
    auto records = run_ranks(g, np, [&](Communicator& comm) {
      Records out;
      if (auto series = hpcg_timing(comm, config, g.trials)) out.push_back(make_record(*series, g.trials.tukey_k));
      return out;
    });
    if (!records) return 0;
    all.insert(all.end(), records->begin(), records->end());
  }
  emit(g, "hpcg", all);
  return 0;
}

int run_bsp(const Global& g, int np, const BspConfig& config) {
  auto records = run_ranks(g, np, [&](Communicator& comm) {
    BspResult result = bsp_run(comm, config, g.trials);
    Records out;
    if (comm.rank() == 0) out.push_back(make_record(std::move(result.series), g.trials.tukey_k));
    return out;
  });
  if (records) emit(g, config.token_trace ? "bsp_token" : "bsp", *records);
  return 0;
}

int run_pingpong(const Global& g, std::size_t max_bytes) {
  const auto sizes = pingpong_sizes(max_bytes);
  double hmean = 0.0;
  auto records = run_ranks(g, 2, [&](Communicator& comm) {
    PingPongResult result = pingpong_run(comm, sizes, g.trials);
    Records out;
    for (auto& s : result.series) out.push_back(make_record(std::move(s), g.trials.tukey_k));
    if (comm.rank() == 0) hmean = result.hmean_throughput_Bps;
    return out;
  });
  if (!records) return 0;
  emit(g, "pingpong", *records);
  std::cout << "harmonic mean throughput across sizes: " << hmean << " B/s\n";
  return 0;
}

int run_micro(const Global& g, MicroKind kind, const MicroParams& params) {
  Records records;
  for (auto& s : micro_run(kind, params, g.trials)) records.push_back(make_record(std::move(s), g.trials.tukey_k));
  emit(g, "micro_" + to_string(kind), records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Message-passing and HPCG benchmark suite"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--trials", g.trials.trials, "Recorded trials per configuration")->check(CLI::PositiveNumber);
  app.add_option("--warmup", g.trials.warmup, "Discarded warm-up trials")->check(CLI::NonNegativeNumber);
  app.add_option("--tukey-k", g.trials.tukey_k, "Tukey fence multiplier")->check(CLI::NonNegativeNumber);
  app.add_option("--csv", g.csv_dir, "Directory for CSV output");
  app.add_option("--rank", g.rank, "This process's rank in a multi-process TCP job (env MHB_RANK)");
  app.add_option("--world", g.world, "Rank count of a multi-process TCP job (env MHB_WORLD)");
  app.add_option("--coord", g.coord, "Coordinator host:port (env MHB_COORD)");

  auto backend_option = [&](CLI::App* sub) {
    sub->add_option("--backend", g.backend, "Transport")->check(CLI::IsMember({"inproc", "tcp"}));
    sub->add_option("--csv", g.csv_dir, "Directory for CSV output");
  };

  HpcgArgs hpcg;
  auto* hpcg_cmd = app.add_subcommand("hpcg", "Distributed HPCG timing or verification");
  hpcg_cmd->add_option("--nx", hpcg.nx, "Local grid x");
  hpcg_cmd->add_option("--ny", hpcg.ny, "Local grid y");
  hpcg_cmd->add_option("--nz", hpcg.nz, "Local grid z");
  hpcg_cmd->add_option("--np", hpcg.np, "Rank counts")->delimiter(',')->check(CLI::PositiveNumber);
  hpcg_cmd->add_option("--iters", hpcg.iters, "CG iterations (timing default 1, verify default 50)")
      ->check(CLI::PositiveNumber);
  hpcg_cmd->add_option("--mode", hpcg.mode, "timing or verify")->check(CLI::IsMember({"timing", "verify"}));
  hpcg_cmd->add_flag("--sweep", hpcg.sweep, "Local sizes 16,32,64 for every --np");
  hpcg_cmd->add_option("--dump-matrix", hpcg.dump_matrix, "Write the assembled matrix in coordinate form");
  backend_option(hpcg_cmd);

  int bsp_np = 2;
  BspConfig bsp;
  auto* bsp_cmd = app.add_subcommand("bsp", "BSP ring benchmark");
  bsp_cmd->add_option("--np", bsp_np, "Rank count")->check(CLI::PositiveNumber);
  bsp_cmd->add_option("--steps", bsp.steps, "Supersteps per trial")->check(CLI::NonNegativeNumber);
  bsp_cmd->add_option("--reads", bsp.reads, "Loads per step")->check(CLI::NonNegativeNumber);
  bsp_cmd->add_option("--writes", bsp.writes, "Stores per step")->check(CLI::NonNegativeNumber);
  bsp_cmd->add_option("--flops", bsp.flops, "Fused multiply-adds per step")->check(CLI::NonNegativeNumber);
  bsp_cmd->add_option("--msg-bytes", bsp.msg_bytes, "Message size")->check(CLI::PositiveNumber);
  bsp_cmd->add_option("--array-bytes", bsp.array_bytes, "Working array size")->check(CLI::PositiveNumber);
  bsp_cmd->add_flag("--token", bsp.token_trace, "Forward received payloads around the ring");
  backend_option(bsp_cmd);

  std::size_t max_bytes = std::size_t{1} << 20;
  auto* pp_cmd = app.add_subcommand("pingpong", "Two-rank ping-pong over sizes 1..max-bytes");
  pp_cmd->add_option("--max-bytes", max_bytes, "Largest message")->check(CLI::PositiveNumber);
  backend_option(pp_cmd);

  std::string kind = "channel_ops";
  MicroParams micro;
  auto* micro_cmd = app.add_subcommand("micro", "Intra-node microbenchmarks");
  micro_cmd->add_option("--kind", kind, "Benchmark kind")
      ->check(CLI::IsMember({"channel_ops", "notify", "spawn", "parinit"}));
  micro_cmd->add_option("--workers", micro.workers, "Worker threads")->check(CLI::PositiveNumber);
  micro_cmd->add_option("--fib-n", micro.fib_n, "Fibonacci numbers computed by the spawn task")
      ->check(CLI::Range(1, 90));
  micro_cmd->add_option("--csv", g.csv_dir, "Directory for CSV output");

  CLI11_PARSE(app, argc, argv);
  read_env(g);

  try {
    if (*hpcg_cmd) return run_hpcg(g, hpcg);
    if (*bsp_cmd) return run_bsp(g, bsp_np, bsp);
    if (*pp_cmd) return run_pingpong(g, max_bytes);
    if (*micro_cmd) return run_micro(g, parse_micro_kind(kind), micro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
