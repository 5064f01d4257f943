#include "mhb/problem.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mhb {

namespace {

std::size_t checked_length(LocalIndex owned, LocalIndex external) {
  if (owned < 0 || external < 0) throw std::invalid_argument("vector sizes must be non-negative");
  return static_cast<std::size_t>(owned) + static_cast<std::size_t>(external);
}

}  // namespace

DistVector::DistVector(LocalIndex owned, LocalIndex external, double value)
    : owned_(owned), data_(checked_length(owned, external), value) {}

void DistVector::resize_external(LocalIndex count) {
  if (count < 0) throw std::invalid_argument("external count must be non-negative");
  data_.resize(static_cast<std::size_t>(owned_) + static_cast<std::size_t>(count), 0.0);
}

void DistVector::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

namespace {

CsrMatrix build_stencil(const Geometry& geom) {
  CsrMatrix m;
  m.nrows = geom.local_rows();
  m.ncols = m.nrows;
  const auto rows = static_cast<std::size_t>(m.nrows);
  m.row_offsets.reserve(rows + 1);
  m.diag_pos.reserve(rows);
  m.col_indices.reserve(rows * 27);
  m.values.reserve(rows * 27);
  m.global_cols.reserve(rows * 27);
  m.row_offsets.push_back(0);

  for (int iz = 0; iz < geom.nz(); ++iz) {
    for (int iy = 0; iy < geom.ny(); ++iy) {
      for (int ix = 0; ix < geom.nx(); ++ix) {
        const Point3 centre = geom.global_point(ix, iy, iz);
        const auto row_start = static_cast<std::int64_t>(m.values.size());
        for (int sz = -1; sz <= 1; ++sz) {
          for (int sy = -1; sy <= 1; ++sy) {
            for (int sx = -1; sx <= 1; ++sx) {
              const Point3 g{centre.x + sx, centre.y + sy, centre.z + sz};
              if (!geom.in_bounds(g)) continue;
              const bool diag = sx == 0 && sy == 0 && sz == 0;
              if (diag) m.diag_pos.push_back(static_cast<std::int32_t>(static_cast<std::int64_t>(m.values.size()) - row_start));
              m.values.push_back(diag ? kDiagonalValue : kOffDiagonalValue);
              m.global_cols.push_back(geom.global_row_id(g));
              m.col_indices.push_back(geom.owns(g) ? geom.local_index_of(g) : LocalIndex{-1});
            }
          }
        }
        m.row_offsets.push_back(static_cast<std::int64_t>(m.values.size()));
      }
    }
  }
  return m;
}

}  // namespace

Problem generate_problem(const Geometry& geometry) {
  CsrMatrix matrix = build_stencil(geometry);
  DistVector rhs(matrix.nrows);
  DistVector exact(matrix.nrows, 0, 1.0);
  for (LocalIndex i = 0; i < matrix.nrows; ++i) rhs[i] = 27.0 - matrix.row_nnz(i);
  return Problem{geometry, std::move(matrix), std::move(rhs), std::move(exact)};
}

CoarseProblem generate_coarse_problem(const Geometry& fine_geometry, const CsrMatrix& fine_matrix) {
  if (fine_matrix.nrows != fine_geometry.local_rows())
    throw std::invalid_argument("fine matrix does not match its geometry");
  Geometry coarse = fine_geometry.coarsened();
  std::vector<LocalIndex> f2c(static_cast<std::size_t>(coarse.local_rows()));
  for (int k = 0; k < coarse.nz(); ++k)
    for (int j = 0; j < coarse.ny(); ++j)
      for (int i = 0; i < coarse.nx(); ++i)
        f2c[static_cast<std::size_t>(coarse.local_index(i, j, k))] = fine_geometry.local_index(2 * i, 2 * j, 2 * k);
  CsrMatrix matrix = build_stencil(coarse);
  return CoarseProblem{std::move(coarse), std::move(matrix), std::move(f2c)};
}

double deterministic_value(GlobalIndex row) noexcept {
  const std::uint32_t hashed = static_cast<std::uint32_t>(static_cast<std::uint64_t>(row)) * 2654435761u;
  return 0.5 + static_cast<double>(hashed) / 8589934592.0;
}

void fill_deterministic(DistVector& vec, const Geometry& geometry) {
  if (vec.size() != geometry.local_rows()) throw std::invalid_argument("vector does not match geometry");
  for (LocalIndex i = 0; i < vec.size(); ++i) vec[i] = deterministic_value(geometry.global_row_id(i));
}

std::vector<Triplet> global_triplets(const Geometry& geometry, const CsrMatrix& matrix) {
  if (matrix.global_cols.size() != matrix.values.size())
    throw std::logic_error("matrix no longer carries global column ids");
  std::vector<Triplet> out;
  out.reserve(matrix.values.size());
  for (LocalIndex i = 0; i < matrix.nrows; ++i) {
    const GlobalIndex row = geometry.global_row_id(i);
    for (auto k = matrix.row_offsets[static_cast<std::size_t>(i)]; k < matrix.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
      out.push_back({row, matrix.global_cols[static_cast<std::size_t>(k)], matrix.values[static_cast<std::size_t>(k)]});
  }
  return out;
}

void write_coordinate(std::ostream& out, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  char buf[96];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(e.row), static_cast<long long>(e.col),
                  e.value);
    out << buf;
  }
}

}  // namespace mhb
