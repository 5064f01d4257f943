#include "mhb/geometry.hpp"

#include <string>
#include <tuple>

namespace mhb {

ProcessGrid factor_process_grid(int ranks) {
  if (ranks < 1) throw std::invalid_argument("process count must be positive");
  ProcessGrid best{1, 1, ranks};
  for (int px = 1; px * px * px <= ranks; ++px) {
    if (ranks % px != 0) continue;
    const int rest = ranks / px;
    for (int py = px; py * py <= rest; ++py) {
      if (rest % py != 0) continue;
      const ProcessGrid cand{px, py, rest / py};
      const int sum = cand.px + cand.py + cand.pz;
      const int best_sum = best.px + best.py + best.pz;
      if (sum < best_sum ||
          (sum == best_sum && std::tie(cand.px, cand.py, cand.pz) < std::tie(best.px, best.py, best.pz)))
        best = cand;
    }
  }
  return best;
}

std::array<int, 3> rank_coords(int rank, const ProcessGrid& grid) {
  if (rank < 0 || rank >= grid.size()) throw std::out_of_range("rank outside process grid");
  return {rank % grid.px, (rank / grid.px) % grid.py, rank / (grid.px * grid.py)};
}

Geometry::Geometry(const ProcessGrid& grid, int rank, int nx, int ny, int nz)
    : grid_(grid), rank_(rank), nx_(nx), ny_(ny), nz_(nz) {
  if (grid.px < 1 || grid.py < 1 || grid.pz < 1) throw std::invalid_argument("process grid extents must be positive");
  if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("local grid dimensions must be positive");
  const auto c = rank_coords(rank, grid);
  ipx_ = c[0];
  ipy_ = c[1];
  ipz_ = c[2];
}

Geometry Geometry::for_local(int ranks, int rank, int nx, int ny, int nz) {
  return Geometry(factor_process_grid(ranks), rank, nx, ny, nz);
}

Geometry Geometry::for_global(int ranks, int rank, std::int64_t gnx, std::int64_t gny, std::int64_t gnz) {
  const ProcessGrid grid = factor_process_grid(ranks);
  if (gnx % grid.px != 0 || gny % grid.py != 0 || gnz % grid.pz != 0)
    throw std::invalid_argument("global grid " + std::to_string(gnx) + "x" + std::to_string(gny) + "x" +
                                std::to_string(gnz) + " does not divide over process grid " +
                                std::to_string(grid.px) + "x" + std::to_string(grid.py) + "x" +
                                std::to_string(grid.pz));
  return Geometry(grid, rank, static_cast<int>(gnx / grid.px), static_cast<int>(gny / grid.py),
                  static_cast<int>(gnz / grid.pz));
}

std::array<int, 3> Geometry::local_coords(LocalIndex index) const noexcept {
  return {index % nx_, (index / nx_) % ny_, index / (nx_ * ny_)};
}

Point3 Geometry::global_point(int ix, int iy, int iz) const noexcept {
  return {std::int64_t{ipx_} * nx_ + ix, std::int64_t{ipy_} * ny_ + iy, std::int64_t{ipz_} * nz_ + iz};
}

GlobalIndex Geometry::global_row_id(int ix, int iy, int iz) const noexcept {
  return global_row_id(global_point(ix, iy, iz));
}

GlobalIndex Geometry::global_row_id(LocalIndex index) const noexcept {
  const auto c = local_coords(index);
  return global_row_id(c[0], c[1], c[2]);
}

Point3 Geometry::global_coords(GlobalIndex row) const noexcept {
  return {row % gnx(), (row / gnx()) % gny(), row / (gnx() * gny())};
}

bool Geometry::in_bounds(const Point3& g) const noexcept {
  return g.x >= 0 && g.x < gnx() && g.y >= 0 && g.y < gny() && g.z >= 0 && g.z < gnz();
}

int Geometry::owner_rank(const Point3& g) const {
  if (!in_bounds(g)) throw std::out_of_range("global point outside the domain");
  const auto ox = static_cast<int>(g.x / nx_);
  const auto oy = static_cast<int>(g.y / ny_);
  const auto oz = static_cast<int>(g.z / nz_);
  return (oz * grid_.py + oy) * grid_.px + ox;
}

bool Geometry::owns(const Point3& g) const noexcept {
  return in_bounds(g) && g.x / nx_ == ipx_ && g.y / ny_ == ipy_ && g.z / nz_ == ipz_;
}

LocalIndex Geometry::local_index_of(const Point3& g) const noexcept {
  return local_index(static_cast<int>(g.x - std::int64_t{ipx_} * nx_), static_cast<int>(g.y - std::int64_t{ipy_} * ny_),
                     static_cast<int>(g.z - std::int64_t{ipz_} * nz_));
}

Geometry Geometry::coarsened() const {
  if (!can_coarsen())
    throw std::invalid_argument("cannot coarsen local grid " + std::to_string(nx_) + "x" + std::to_string(ny_) + "x" +
                                std::to_string(nz_) + ": dimensions must be even");
  return Geometry(grid_, rank_, nx_ / 2, ny_ / 2, nz_ / 2);
}

}  // namespace mhb
