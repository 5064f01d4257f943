#pragma once

// Halo discovery and exchange for the distributed stencil matrix.

#include <optional>
#include <vector>

#include "mhb/comm.hpp"
#include "mhb/problem.hpp"

namespace mhb {

struct HaloPlan {
  /// Every rank this rank sends to or receives from, ascending.
  std::vector<Rank> neighbors;
  /// Per neighbor: owned local indices to transmit, in the order the
  /// neighbor numbers them (ascending global id).
  std::vector<std::vector<LocalIndex>> send_lists;
  /// Per neighbor: number of external slots it fills.
  std::vector<LocalIndex> recv_counts;
  /// Per neighbor: first external slot, counted from the start of the
  /// external region.
  std::vector<LocalIndex> recv_offsets;
  /// (global id, local column id >= nrows), ascending by global id.
  std::vector<std::pair<GlobalIndex, LocalIndex>> external_map;
  LocalIndex nrows = 0;
  LocalIndex n_external = 0;
  /// Exchanges performed so far; drives the tag sequence.
  std::uint64_t phase = 0;

  std::optional<LocalIndex> external_index(GlobalIndex global) const;
};

/// Assigns external slots (neighbor rank ascending, then global id
/// ascending), rewrites the matrix to purely local column ids, releases
/// global_cols and cross-checks send/receive counts with every neighbor.
/// Collective.
HaloPlan setup_halo(Communicator& comm, const Geometry& geometry, CsrMatrix& matrix);

/// Sends to every neighbor (ascending), then receives from every neighbor
/// (ascending). Relies on buffered sends. Collective over neighbors.
void exchange_halo(Communicator& comm, HaloPlan& plan, DistVector& vec);

/// Vector sized for the matrix's owned and external columns.
DistVector make_vector(const CsrMatrix& matrix, double value = 0.0);

}  // namespace mhb
