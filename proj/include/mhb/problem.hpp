#pragma once

// Rank-local 27-point stencil problem in CSR form.

#include <iosfwd>
#include <span>
#include <vector>

#include "mhb/geometry.hpp"

namespace mhb {

inline constexpr double kDiagonalValue = 26.0;
inline constexpr double kOffDiagonalValue = -1.0;

struct CsrMatrix {
  LocalIndex nrows = 0;
  /// Owned columns plus external (halo) columns; equals nrows until halo setup.
  LocalIndex ncols = 0;
  std::vector<std::int64_t> row_offsets;
  /// Local column ids; externals are numbered from nrows up. Before halo
  /// setup, non-owned columns hold -1.
  std::vector<LocalIndex> col_indices;
  std::vector<double> values;
  /// Offset of the diagonal inside each row's nonzeros.
  std::vector<std::int32_t> diag_pos;
  /// Global column of every nonzero; released by halo setup.
  std::vector<GlobalIndex> global_cols;

  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(values.size()); }
  int row_nnz(LocalIndex row) const noexcept {
    return static_cast<int>(row_offsets[static_cast<std::size_t>(row) + 1] - row_offsets[static_cast<std::size_t>(row)]);
  }
  double diagonal(LocalIndex row) const noexcept {
    return values[static_cast<std::size_t>(row_offsets[static_cast<std::size_t>(row)] + diag_pos[static_cast<std::size_t>(row)])];
  }
};

/// Owned entries followed by external (halo) slots in one buffer, so kernels
/// can index any local column id directly.
class DistVector {
 public:
  DistVector() = default;
  explicit DistVector(LocalIndex owned, LocalIndex external = 0, double value = 0.0);

  LocalIndex size() const noexcept { return owned_; }
  LocalIndex external_size() const noexcept { return static_cast<LocalIndex>(data_.size()) - owned_; }

  std::span<double> owned() noexcept { return {data_.data(), static_cast<std::size_t>(owned_)}; }
  std::span<const double> owned() const noexcept { return {data_.data(), static_cast<std::size_t>(owned_)}; }
  std::span<double> external() noexcept { return std::span<double>(data_).subspan(static_cast<std::size_t>(owned_)); }
  std::span<const double> external() const noexcept {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(owned_));
  }
  /// Owned then external, indexable by local column id.
  std::span<double> all() noexcept { return data_; }
  std::span<const double> all() const noexcept { return data_; }

  double& operator[](LocalIndex i) noexcept { return data_[static_cast<std::size_t>(i)]; }
  double operator[](LocalIndex i) const noexcept { return data_[static_cast<std::size_t>(i)]; }

  void resize_external(LocalIndex count);
  void fill(double value) noexcept;

 private:
  LocalIndex owned_ = 0;
  std::vector<double> data_;
};

struct Problem {
  Geometry geometry;
  CsrMatrix matrix;
  DistVector rhs;
  DistVector exact;
};

/// One row per local point, one nonzero per in-bounds neighbor offset in
/// {-1,0,1}^3 (z outermost, x innermost). Diagonal 26, off-diagonals -1,
/// exact solution all ones and rhs[i] = 27 - nnz(i).
Problem generate_problem(const Geometry& geometry);

struct CoarseProblem {
  Geometry geometry;
  CsrMatrix matrix;
  /// Fine local index of coarse point (i, j, k), i.e. of fine (2i, 2j, 2k).
  std::vector<LocalIndex> f2c;
};

/// Same stencil on the halved local grid. Throws on odd local dimensions.
CoarseProblem generate_coarse_problem(const Geometry& fine_geometry, const CsrMatrix& fine_matrix);

/// owned[i] = 0.5 + ((g * 2654435761) mod 2^32) / 2^33, g the global row id.
double deterministic_value(GlobalIndex row) noexcept;
void fill_deterministic(DistVector& vec, const Geometry& geometry);

struct Triplet {
  GlobalIndex row;
  GlobalIndex col;
  double value;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Global (row, col, value) entries of a matrix that still carries global_cols.
std::vector<Triplet> global_triplets(const Geometry& geometry, const CsrMatrix& matrix);

/// One `row col value` line per entry, 0-based, sorted row-major.
void write_coordinate(std::ostream& out, std::vector<Triplet> entries);

}  // namespace mhb
