#pragma once

// 3D process grid and the index maps between local points, global points,
// global row ids and owning ranks. Ranks are laid out x fastest.

#include <array>
#include <cstdint>
#include <stdexcept>

namespace mhb {

using GlobalIndex = std::int64_t;
using LocalIndex = std::int32_t;

struct ProcessGrid {
  int px = 1;
  int py = 1;
  int pz = 1;

  int size() const noexcept { return px * py * pz; }
  friend bool operator==(const ProcessGrid&, const ProcessGrid&) = default;
};

struct Point3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Factor P into (px, py, pz) with px <= py <= pz, minimizing px + py + pz;
/// ties go to the lexicographically smallest triple.
ProcessGrid factor_process_grid(int ranks);

/// Grid coordinates of `rank`: x = rank mod px, y = (rank / px) mod py,
/// z = rank / (px * py).
std::array<int, 3> rank_coords(int rank, const ProcessGrid& grid);

class Geometry {
 public:
  /// Local box of `rank` on an explicit process grid. Dimensions must be
  /// positive; the CLI imposes the stricter benchmark rules.
  Geometry(const ProcessGrid& grid, int rank, int nx, int ny, int nz);

  /// Local box of `rank` for a job of `ranks` ranks on the factored grid.
  static Geometry for_local(int ranks, int rank, int nx, int ny, int nz);

  /// Splits the global box gnx*gny*gnz over the factored grid of `ranks`.
  /// Throws when a global dimension is not divisible by its grid extent.
  static Geometry for_global(int ranks, int rank, std::int64_t gnx, std::int64_t gny, std::int64_t gnz);

  int rank() const noexcept { return rank_; }
  int size() const noexcept { return grid_.size(); }
  const ProcessGrid& grid() const noexcept { return grid_; }
  int ipx() const noexcept { return ipx_; }
  int ipy() const noexcept { return ipy_; }
  int ipz() const noexcept { return ipz_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int nz() const noexcept { return nz_; }
  std::int64_t gnx() const noexcept { return std::int64_t{grid_.px} * nx_; }
  std::int64_t gny() const noexcept { return std::int64_t{grid_.py} * ny_; }
  std::int64_t gnz() const noexcept { return std::int64_t{grid_.pz} * nz_; }

  LocalIndex local_rows() const noexcept { return nx_ * ny_ * nz_; }
  GlobalIndex global_rows() const noexcept { return gnx() * gny() * gnz(); }

  LocalIndex local_index(int ix, int iy, int iz) const noexcept { return (iz * ny_ + iy) * nx_ + ix; }
  std::array<int, 3> local_coords(LocalIndex index) const noexcept;

  Point3 global_point(int ix, int iy, int iz) const noexcept;
  GlobalIndex global_row_id(int ix, int iy, int iz) const noexcept;
  GlobalIndex global_row_id(LocalIndex index) const noexcept;
  GlobalIndex global_row_id(const Point3& g) const noexcept { return (g.z * gny() + g.y) * gnx() + g.x; }
  Point3 global_coords(GlobalIndex row) const noexcept;
  bool in_bounds(const Point3& g) const noexcept;

  /// Rank whose local box holds `g`; throws std::out_of_range outside the box.
  int owner_rank(const Point3& g) const;
  int owner_rank(GlobalIndex row) const { return owner_rank(global_coords(row)); }

  bool owns(const Point3& g) const noexcept;
  /// Local index of an owned global point.
  LocalIndex local_index_of(const Point3& g) const noexcept;

  /// Geometry of the next coarser level: every local dimension halved.
  Geometry coarsened() const;
  bool can_coarsen() const noexcept { return nx_ % 2 == 0 && ny_ % 2 == 0 && nz_ % 2 == 0; }

 private:
  ProcessGrid grid_;
  int rank_;
  int ipx_, ipy_, ipz_;
  int nx_, ny_, nz_;
};

}  // namespace mhb
