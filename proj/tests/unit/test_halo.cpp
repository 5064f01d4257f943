#include <gtest/gtest.h>

#include "mhb/halo.hpp"

using namespace mhb;

namespace {

struct RankHalo {
  HaloPlan plan;
  std::vector<double> external;
};

// Fills owned entries with their global ids and exchanges twice.
std::vector<RankHalo> exchange_ids(int ranks, const ProcessGrid& grid, int nx, int ny, int nz) {
  return spawn_job(ranks, Backend::InProcess, [&](Communicator& comm) {
    const Geometry geom(grid, comm.rank(), nx, ny, nz);
    Problem p = generate_problem(geom);
    HaloPlan plan = setup_halo(comm, geom, p.matrix);
    DistVector v = make_vector(p.matrix, -1.0);
    for (LocalIndex i = 0; i < v.size(); ++i) v[i] = static_cast<double>(geom.global_row_id(i));
    exchange_halo(comm, plan, v);
    const std::vector<double> first(v.external().begin(), v.external().end());
    exchange_halo(comm, plan, v);
    EXPECT_EQ(std::vector<double>(v.external().begin(), v.external().end()), first);
    return RankHalo{plan, first};
  });
}

}  // namespace

TEST(Halo, SingleRankHasNoHalo) {
  auto halos = exchange_ids(1, ProcessGrid{1, 1, 1}, 4, 4, 4);
  EXPECT_TRUE(halos[0].plan.neighbors.empty());
  EXPECT_EQ(halos[0].plan.n_external, 0);
}

TEST(Halo, TwoRankSplitNeedsOneFace) {
  auto halos = exchange_ids(2, ProcessGrid{2, 1, 1}, 8, 16, 16);
  for (int r = 0; r < 2; ++r) {
    const HaloPlan& plan = halos[static_cast<std::size_t>(r)].plan;
    EXPECT_EQ(plan.neighbors, std::vector<Rank>{1 - r});
    EXPECT_EQ(plan.n_external, 256);
    EXPECT_EQ(plan.send_lists[0].size(), 256u);
  }
  // Rank 0's externals are the x = 8 plane, in ascending global id.
  const auto& ext = halos[0].external;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    const auto gid = static_cast<std::int64_t>(ext[k]);
    EXPECT_EQ(gid % 16, 8);
    if (k > 0) {
      EXPECT_GT(ext[k], ext[k - 1]);
    }
  }
}

TEST(Halo, CubeCornerRanksSeeSevenNeighbors) {
  auto halos = exchange_ids(8, ProcessGrid{2, 2, 2}, 4, 4, 4);
  for (int r = 0; r < 8; ++r) {
    const HaloPlan& plan = halos[static_cast<std::size_t>(r)].plan;
    EXPECT_EQ(plan.neighbors.size(), 7u) << "rank " << r;
    // 3 faces of 16, 3 edges of 4, one corner point.
    EXPECT_EQ(plan.n_external, 3 * 16 + 3 * 4 + 1);
  }
}

// Each external slot holds the value its owner stored under that global id.
TEST(Halo, ExchangeDeliversOwnersValues) {
  for (int ranks : {2, 3, 4, 6, 8}) {
    const ProcessGrid grid = factor_process_grid(ranks);
    auto halos = exchange_ids(ranks, grid, 3, 4, 2);
    for (int r = 0; r < ranks; ++r) {
      const auto& h = halos[static_cast<std::size_t>(r)];
      ASSERT_EQ(h.external.size(), static_cast<std::size_t>(h.plan.n_external));
      for (const auto& [gid, slot] : h.plan.external_map)
        EXPECT_EQ(h.external[static_cast<std::size_t>(slot - h.plan.nrows)], static_cast<double>(gid))
            << "P=" << ranks << " rank " << r;
    }
  }
}

TEST(Halo, SendAndReceiveCountsPair) {
  auto halos = exchange_ids(6, factor_process_grid(6), 3, 3, 3);
  for (int r = 0; r < 6; ++r) {
    const HaloPlan& mine = halos[static_cast<std::size_t>(r)].plan;
    for (std::size_t n = 0; n < mine.neighbors.size(); ++n) {
      const HaloPlan& theirs = halos[static_cast<std::size_t>(mine.neighbors[n])].plan;
      const auto back = std::find(theirs.neighbors.begin(), theirs.neighbors.end(), r) - theirs.neighbors.begin();
      ASSERT_LT(static_cast<std::size_t>(back), theirs.neighbors.size());
      EXPECT_EQ(static_cast<LocalIndex>(mine.send_lists[n].size()), theirs.recv_counts[static_cast<std::size_t>(back)]);
    }
  }
}

TEST(Halo, SlotsGroupByNeighborThenGlobalId) {
  auto halos = exchange_ids(4, ProcessGrid{2, 2, 1}, 3, 3, 3);
  const HaloPlan& plan = halos[0].plan;
  LocalIndex expected_offset = 0;
  for (std::size_t n = 0; n < plan.neighbors.size(); ++n) {
    EXPECT_EQ(plan.recv_offsets[n], expected_offset);
    expected_offset += plan.recv_counts[n];
  }
  EXPECT_EQ(expected_offset, plan.n_external);
}

TEST(Halo, MatrixColumnsAreLocalAfterSetup) {
  spawn_job(2, Backend::InProcess, [](Communicator& comm) {
    const Geometry geom(ProcessGrid{2, 1, 1}, comm.rank(), 2, 2, 2);
    Problem p = generate_problem(geom);
    HaloPlan plan = setup_halo(comm, geom, p.matrix);
    EXPECT_TRUE(p.matrix.global_cols.empty());
    EXPECT_EQ(p.matrix.ncols, 8 + 4);
    for (LocalIndex c : p.matrix.col_indices) {
      EXPECT_GE(c, 0);
      EXPECT_LT(c, p.matrix.ncols);
    }
    EXPECT_THROW(setup_halo(comm, geom, p.matrix), std::logic_error);
  });
}

TEST(Halo, ExchangeRejectsMisSizedVector) {
  spawn_job(2, Backend::InProcess, [](Communicator& comm) {
    const Geometry geom(ProcessGrid{2, 1, 1}, comm.rank(), 2, 2, 2);
    Problem p = generate_problem(geom);
    HaloPlan plan = setup_halo(comm, geom, p.matrix);
    DistVector owned_only(p.matrix.nrows);
    EXPECT_THROW(exchange_halo(comm, plan, owned_only), std::invalid_argument);
  });
}

TEST(Halo, GeometryMustMatchCommunicator) {
  spawn_job(2, Backend::InProcess, [](Communicator& comm) {
    const Geometry geom(ProcessGrid{1, 1, 1}, 0, 2, 2, 2);
    Problem p = generate_problem(geom);
    EXPECT_THROW(setup_halo(comm, geom, p.matrix), std::invalid_argument);
  });
}
