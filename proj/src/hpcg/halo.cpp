#include "mhb/halo.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace mhb {

namespace {

constexpr Tag kCountTag = 900;
constexpr Tag kRequestTag = 901;
constexpr Tag kHandshakeTag = 902;
constexpr Tag kExchangeTagBase = 1000;

}  // namespace

std::optional<LocalIndex> HaloPlan::external_index(GlobalIndex global) const {
  auto it = std::lower_bound(external_map.begin(), external_map.end(), global,
                             [](const auto& entry, GlobalIndex g) { return entry.first < g; });
  if (it == external_map.end() || it->first != global) return std::nullopt;
  return it->second;
}

DistVector make_vector(const CsrMatrix& matrix, double value) {
  return DistVector(matrix.nrows, matrix.ncols - matrix.nrows, value);
}

HaloPlan setup_halo(Communicator& comm, const Geometry& geometry, CsrMatrix& matrix) {
  if (matrix.global_cols.size() != matrix.values.size())
    throw std::logic_error("setup_halo needs a matrix that still carries global column ids");
  const Rank me = comm.rank();
  const int size = comm.size();
  if (geometry.size() != size || geometry.rank() != me)
    throw std::invalid_argument("geometry does not match communicator");

  std::map<Rank, std::vector<GlobalIndex>> needed;
  for (std::size_t k = 0; k < matrix.values.size(); ++k) {
    if (matrix.col_indices[k] >= 0) continue;
    const GlobalIndex gid = matrix.global_cols[k];
    int owner;
    try {
      owner = geometry.owner_rank(gid);
    } catch (const std::out_of_range&) {
      throw std::runtime_error("column " + std::to_string(gid) + " has no owner rank");
    }
    if (owner == me) throw std::runtime_error("column " + std::to_string(gid) + " is owned but was not localized");
    needed[owner].push_back(gid);
  }

  HaloPlan plan;
  plan.nrows = matrix.nrows;
  std::map<Rank, LocalIndex> recv_offset;
  LocalIndex next = 0;
  for (auto& [owner, gids] : needed) {
    std::sort(gids.begin(), gids.end());
    gids.erase(std::unique(gids.begin(), gids.end()), gids.end());
    recv_offset[owner] = next;
    for (GlobalIndex gid : gids) plan.external_map.emplace_back(gid, matrix.nrows + next++);
  }
  plan.n_external = next;
  std::sort(plan.external_map.begin(), plan.external_map.end());

  for (std::size_t k = 0; k < matrix.values.size(); ++k)
    if (matrix.col_indices[k] < 0) matrix.col_indices[k] = *plan.external_index(matrix.global_cols[k]);
  matrix.ncols = matrix.nrows + plan.n_external;
  matrix.global_cols.clear();
  matrix.global_cols.shrink_to_fit();

  // Every rank tells every other rank how many of its values it needs, so
  // senders are discovered without assuming a symmetric pattern.
  for (Rank peer = 0; peer < size; ++peer) {
    if (peer == me) continue;
    auto it = needed.find(peer);
    const std::uint64_t count = it == needed.end() ? 0 : it->second.size();
    comm.send_values<std::uint64_t>(peer, kCountTag, std::span(&count, 1));
  }
  std::map<Rank, std::uint64_t> requested;
  for (Rank peer = 0; peer < size; ++peer) {
    if (peer == me) continue;
    const auto count = comm.recv_values<std::uint64_t>(peer, kCountTag);
    if (count.size() != 1) throw CommError("malformed halo count message");
    if (count[0] > 0) requested[peer] = count[0];
  }

  for (const auto& [owner, gids] : needed) comm.send_values<GlobalIndex>(owner, kRequestTag, gids);
  std::map<Rank, std::vector<LocalIndex>> send_lists;
  for (const auto& [peer, count] : requested) {
    const auto gids = comm.recv_values<GlobalIndex>(peer, kRequestTag);
    if (gids.size() != count) throw CommError("halo request from rank " + std::to_string(peer) + " has wrong length");
    auto& list = send_lists[peer];
    list.reserve(gids.size());
    for (GlobalIndex gid : gids) {
      const Point3 g = geometry.global_coords(gid);
      if (!geometry.owns(g))
        throw std::runtime_error("rank " + std::to_string(peer) + " requested column " + std::to_string(gid) +
                                 " which rank " + std::to_string(me) + " does not own");
      list.push_back(geometry.local_index_of(g));
    }
  }

  for (const auto& [peer, list] : send_lists) {
    const std::uint64_t n = list.size();
    comm.send_values<std::uint64_t>(peer, kHandshakeTag, std::span(&n, 1));
  }
  for (const auto& [owner, gids] : needed) {
    const auto echoed = comm.recv_values<std::uint64_t>(owner, kHandshakeTag);
    if (echoed.size() != 1 || echoed[0] != gids.size())
      throw CommError("halo handshake mismatch with rank " + std::to_string(owner));
  }

  for (Rank peer = 0; peer < size; ++peer) {
    const bool receives = needed.count(peer) > 0;
    const bool sends = send_lists.count(peer) > 0;
    if (!receives && !sends) continue;
    plan.neighbors.push_back(peer);
    plan.send_lists.push_back(sends ? std::move(send_lists[peer]) : std::vector<LocalIndex>{});
    plan.recv_counts.push_back(receives ? static_cast<LocalIndex>(needed[peer].size()) : 0);
    plan.recv_offsets.push_back(receives ? recv_offset[peer] : 0);
  }
  return plan;
}

void exchange_halo(Communicator& comm, HaloPlan& plan, DistVector& vec) {
  if (vec.size() != plan.nrows || vec.external_size() != plan.n_external)
    throw std::invalid_argument("vector is not sized for this halo plan");
  const Tag tag = kExchangeTagBase + static_cast<Tag>(plan.phase % 1000);
  ++plan.phase;

  std::vector<double> buffer;
  for (std::size_t n = 0; n < plan.neighbors.size(); ++n) {
    const auto& list = plan.send_lists[n];
    if (list.empty()) continue;
    buffer.resize(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) buffer[k] = vec[list[k]];
    comm.send_values<double>(plan.neighbors[n], tag, buffer);
  }
  auto external = vec.external();
  for (std::size_t n = 0; n < plan.neighbors.size(); ++n) {
    const LocalIndex count = plan.recv_counts[n];
    if (count == 0) continue;
    const auto values = comm.recv_values<double>(plan.neighbors[n], tag);
    if (values.size() != static_cast<std::size_t>(count))
      throw CommError("halo message from rank " + std::to_string(plan.neighbors[n]) + " has wrong length");
    std::copy(values.begin(), values.end(), external.begin() + plan.recv_offsets[n]);
  }
}

}  // namespace mhb
