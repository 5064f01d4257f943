#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "mhb/problem.hpp"
#include "oracle.hpp"

using namespace mhb;

namespace {

std::vector<Triplet> assemble_distributed(int ranks, std::int64_t gx, std::int64_t gy, std::int64_t gz) {
  std::vector<Triplet> all;
  for (int r = 0; r < ranks; ++r) {
    const Geometry geom = Geometry::for_global(ranks, r, gx, gy, gz);
    const Problem p = generate_problem(geom);
    auto part = global_triplets(geom, p.matrix);
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return all;
}

std::vector<Triplet> oracle_triplets(std::int64_t gx, std::int64_t gy, std::int64_t gz) {
  const oracle::Stencil s = oracle::assemble(gx, gy, gz);
  std::vector<Triplet> out;
  for (std::size_t r = 0; r < s.rows.size(); ++r)
    for (const auto& e : s.rows[r]) out.push_back({static_cast<GlobalIndex>(r), e.col, e.value});
  return out;
}

}  // namespace

TEST(Problem, CornerAndInteriorRows) {
  const Problem p = generate_problem(Geometry(ProcessGrid{1, 1, 1}, 0, 4, 4, 4));
  const Geometry& g = p.geometry;
  EXPECT_EQ(p.matrix.row_nnz(g.local_index(0, 0, 0)), 8);
  EXPECT_EQ(p.matrix.row_nnz(g.local_index(1, 1, 1)), 27);
  EXPECT_EQ(p.matrix.row_nnz(g.local_index(1, 0, 0)), 12);  // edge
  EXPECT_EQ(p.matrix.row_nnz(g.local_index(1, 1, 0)), 18);  // face
  EXPECT_EQ(p.rhs[g.local_index(1, 1, 1)], 0.0);
  EXPECT_EQ(p.rhs[g.local_index(0, 0, 0)], 19.0);
}

TEST(Problem, DiagonalPositionPointsAtTheDiagonal) {
  const Problem p = generate_problem(Geometry(ProcessGrid{2, 1, 1}, 1, 3, 3, 3));
  for (LocalIndex i = 0; i < p.matrix.nrows; ++i) {
    const auto k = static_cast<std::size_t>(p.matrix.row_offsets[static_cast<std::size_t>(i)] + p.matrix.diag_pos[static_cast<std::size_t>(i)]);
    EXPECT_EQ(p.matrix.global_cols[k], p.geometry.global_row_id(i));
    EXPECT_EQ(p.matrix.diagonal(i), 26.0);
  }
}

TEST(Problem, ColumnsOutsideTheRankAreUnresolvedBeforeHalo) {
  const Problem p = generate_problem(Geometry(ProcessGrid{2, 1, 1}, 0, 2, 2, 2));
  // Local x = 1 touches rank 1's x = 2 plane.
  const LocalIndex row = p.geometry.local_index(1, 0, 0);
  int unresolved = 0;
  for (auto k = p.matrix.row_offsets[static_cast<std::size_t>(row)]; k < p.matrix.row_offsets[static_cast<std::size_t>(row) + 1]; ++k)
    unresolved += p.matrix.col_indices[static_cast<std::size_t>(k)] == -1;
  EXPECT_EQ(unresolved, 4);
}

TEST(Problem, AssemblyMatchesOracleForEveryDecomposition) {
  const auto expected = oracle_triplets(8, 8, 8);
  for (int ranks : {1, 2, 4, 8}) EXPECT_EQ(assemble_distributed(ranks, 8, 8, 8), expected) << "P=" << ranks;
  EXPECT_EQ(assemble_distributed(4, 12, 8, 4), oracle_triplets(12, 8, 4));
}

TEST(Problem, MatrixIsSymmetric) {
  auto t = assemble_distributed(8, 8, 8, 8);
  auto transposed = t;
  for (auto& e : transposed) std::swap(e.row, e.col);
  std::sort(transposed.begin(), transposed.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  EXPECT_EQ(t, transposed);
}

TEST(Problem, RhsIsRowSumOfOnes) {
  const Problem p = generate_problem(Geometry(ProcessGrid{2, 2, 1}, 3, 5, 4, 3));
  for (LocalIndex i = 0; i < p.matrix.nrows; ++i) {
    double sum = 0.0;
    for (auto k = p.matrix.row_offsets[static_cast<std::size_t>(i)]; k < p.matrix.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
      sum += p.matrix.values[static_cast<std::size_t>(k)] * p.exact[0];
    EXPECT_EQ(p.rhs[i], sum);
  }
}

TEST(Problem, SmallGridIsPositiveDefinite) {
  for (int n : {4, 8}) {
    auto dense = oracle::dense(oracle::assemble(n, n, n));
    // Cross-check the library's matrix entry by entry before factoring.
    const Problem p = generate_problem(Geometry(ProcessGrid{1, 1, 1}, 0, n, n, n));
    const auto size = static_cast<std::size_t>(n * n * n);
    for (const auto& t : global_triplets(p.geometry, p.matrix))
      ASSERT_EQ(dense[static_cast<std::size_t>(t.row) * size + static_cast<std::size_t>(t.col)], t.value);
    EXPECT_TRUE(oracle::cholesky(dense, size)) << n << "^3";
  }
}

TEST(Problem, CoarseLevelInjectsEvenPoints) {
  const Geometry fine(ProcessGrid{2, 1, 1}, 1, 8, 4, 6);
  const Problem p = generate_problem(fine);
  const CoarseProblem c = generate_coarse_problem(fine, p.matrix);
  EXPECT_EQ(c.geometry.nx(), 4);
  EXPECT_EQ(c.geometry.ny(), 2);
  EXPECT_EQ(c.geometry.nz(), 3);
  ASSERT_EQ(c.f2c.size(), 24u);
  for (LocalIndex i = 0; i < c.geometry.local_rows(); ++i) {
    const Point3 cg = c.geometry.global_coords(c.geometry.global_row_id(i));
    const Point3 fg = fine.global_coords(fine.global_row_id(c.f2c[static_cast<std::size_t>(i)]));
    EXPECT_EQ(fg, (Point3{2 * cg.x, 2 * cg.y, 2 * cg.z}));
  }
  EXPECT_EQ(c.matrix.nrows, 24);
}

TEST(Problem, CoarseningOddGridThrows) {
  const Geometry fine(ProcessGrid{1, 1, 1}, 0, 4, 4, 3);
  const Problem p = generate_problem(fine);
  EXPECT_THROW(generate_coarse_problem(fine, p.matrix), std::invalid_argument);
}

TEST(Problem, DeterministicFill) {
  EXPECT_EQ(deterministic_value(0), 0.5);
  // (1 * 2654435761) mod 2^32 = 2654435761
  EXPECT_EQ(deterministic_value(1), 0.5 + 2654435761.0 / 8589934592.0);
  // 2 * 2654435761 = 5308871522, minus 2^32 = 1013904226
  EXPECT_EQ(deterministic_value(2), 0.5 + 1013904226.0 / 8589934592.0);
  for (GlobalIndex g = 0; g < 5000; g += 37) {
    EXPECT_GE(deterministic_value(g), 0.5);
    EXPECT_LT(deterministic_value(g), 1.0);
  }
}

TEST(Problem, FillDependsOnlyOnGlobalId) {
  const Geometry g(ProcessGrid{2, 2, 2}, 5, 3, 3, 3);
  DistVector v(g.local_rows(), 4, -1.0);
  fill_deterministic(v, g);
  for (LocalIndex i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], deterministic_value(g.global_row_id(i)));
  for (double e : v.external()) EXPECT_EQ(e, -1.0);
  DistVector wrong(3);
  EXPECT_THROW(fill_deterministic(wrong, g), std::invalid_argument);
}

TEST(Problem, CoordinateDumpIsSortedAndExact) {
  std::ostringstream out;
  write_coordinate(out, {{1, 0, -1.0}, {0, 1, -1.0}, {0, 0, 26.0}, {1, 1, 0.1}});
  EXPECT_EQ(out.str(), "0 0 26\n0 1 -1\n1 0 -1\n1 1 0.10000000000000001\n");
}

TEST(Problem, DistVectorLayout) {
  DistVector v(3, 2, 1.5);
  EXPECT_EQ(v.size(), 3);
  EXPECT_EQ(v.external_size(), 2);
  EXPECT_EQ(v.all().size(), 5u);
  v.resize_external(4);
  EXPECT_EQ(v.external_size(), 4);
  EXPECT_EQ(v[4], 1.5);
  EXPECT_EQ(v[6], 0.0);
  EXPECT_THROW(DistVector(-1), std::invalid_argument);
}
