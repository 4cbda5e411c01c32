#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "gridcast/correctness.hpp"
#include "gridcast/grid.hpp"
#include "gridcast/messages.hpp"

namespace gridcast {

// ---------------------------------------------------------------------------
// Runtime: disjoint-path relay broadcast on one n x n grid window.
//
// The source sends (source, m, empty path) to all neighbors. A node receiving
// a copy from neighbor w appends w to the path (unless w is the source),
// drops it if the path now holds a duplicate, the holder, the source or an
// out-of-grid node, records it, and forwards it subject to a per-(source,
// payload) cap. A node accepts (source, m) on a copy received straight from
// the source, or once two recorded copies have node-disjoint paths.
// ---------------------------------------------------------------------------

inline constexpr int kDefaultForwardCap = 8;
// admissible extra length over the geodesic for non-canonical relays
inline constexpr int kRelaySlack = 4;

// Node-set occupancy for paths, enough for clusters up to 16 x 16.
struct PathMask {
  std::array<uint64_t, 4> bits{};

  void set(int idx) { bits[idx >> 6] |= uint64_t{1} << (idx & 63); }
  bool test(int idx) const {
    return (bits[idx >> 6] >> (idx & 63)) & 1;
  }
  bool intersects(const PathMask& o) const {
    for (int w = 0; w < 4; ++w) {
      if (bits[w] & o.bits[w]) return true;
    }
    return false;
  }
};

struct ReplicaOutbox {
  // destinations are in the replica's coordinate space
  std::vector<std::pair<NodeId, uint32_t>> sends;    // (dest, copy payload id)
  std::vector<std::pair<NodeId, uint32_t>> accepts;  // (source, broadcast payload id)
};

class BaseReplica {
 public:
  BaseReplica(ClusterRect rect, NodeId self, int forward_cap);

  // Starts a broadcast with this node as source. Idempotent per payload.
  void initiate_broadcast(uint32_t payload_id, PayloadPool& pool,
                          ReplicaOutbox& out);

  // Processes one incoming copy from an adjacent grid peer.
  void deliver(NodeId peer, uint32_t copy_id, PayloadPool& pool,
               ReplicaOutbox& out);

  bool has_accepted(NodeId source, uint32_t payload_id) const;

 private:
  struct PairState {
    bool accepted = false;
    int forwarded = 0;  // non-canonical relays
    std::set<uint32_t> canonical_relayed;
    std::map<std::pair<int, int>, int> class_forwarded;  // (first relay, entry)
    std::vector<std::vector<NodeId>> paths;  // recorded pre-acceptance
    std::vector<PathMask> masks;
  };

  uint64_t key(NodeId source, uint32_t payload_id) const {
    return (static_cast<uint64_t>(rect_.local_index(source)) << 32) | payload_id;
  }

  ClusterRect rect_;
  NodeId self_;
  int cap_;
  int quota_;
  std::unordered_map<uint64_t, PairState> pairs_;
};

// ---------------------------------------------------------------------------
// Analyzer: reliable node set of the relay protocol for a known
// correct/Byzantine assignment on an n x n grid.
// ---------------------------------------------------------------------------

struct ReliableSet {
  std::vector<NodeId> members;  // sorted
  double fraction = 0.0;        // members / total grid nodes

  bool contains(NodeId v) const;
};

// Correct nodes reachable by node-disjoint all-correct paths from two
// distinct Byzantine nodes; such nodes can be fed two forged copies with
// disjoint paths and are excluded from the reliable set.
std::vector<NodeId> forgeable_nodes(const CorrectnessMap& corr);

// True iff the ordered pair can communicate with certainty: adjacency, or two
// internally node-disjoint paths through correct nodes.
bool pair_live(const CorrectnessMap& corr, NodeId a, NodeId b);

// Reliable node set: correct nodes minus forgeable ones, then a greedy
// fixpoint dropping whichever node conflicts with the most remaining members
// (lexicographically first among ties) until every pair is live.
ReliableSet rel_base(const CorrectnessMap& corr);

// Def: every geographic side of the grid keeps strictly more than 3n/4 of its
// n nodes inside rel_base. Corners count toward both incident sides.
bool is_correct_macro(const CorrectnessMap& corr);

}  // namespace gridcast
