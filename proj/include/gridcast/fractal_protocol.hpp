#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gridcast/base_protocol.hpp"
#include "gridcast/grid.hpp"
#include "gridcast/messages.hpp"

namespace gridcast {

// One physical send produced by a node's transition, and what the node
// accepted at the top of its stack.
struct NodeOutbox {
  std::vector<std::pair<NodeId, uint32_t>> sends;    // (receiver, payload id)
  std::vector<std::pair<NodeId, uint32_t>> accepts;  // (user source, user bytes id)
};

// Sen/Rec sets and vote tallies of one ancestor toward its four macro-grid
// neighbors. All sets only ever grow.
struct MacroChannelState {
  NodeId anc;                                    // ancestor coords at this level
  std::array<std::optional<NodeId>, 4> nbr;      // existing neighbors by direction
  std::array<std::set<uint32_t>, 4> sen;         // payloads queued per neighbor
  std::array<std::set<uint32_t>, 4> rec;         // payloads accepted per neighbor
  std::map<std::pair<int, uint32_t>, std::set<uint64_t>> tally;  // (dir, payload) -> voters
  std::set<std::pair<int, uint32_t>> voted;      // own-vote emission guard
};

// The full per-node protocol state for a depth-k grid: one relay replica per
// hierarchy level plus the macro-channel sets between adjacent levels. All
// transitions are set insertions, so delivery order never changes the final
// accepted sets.
class NodeRuntime {
 public:
  NodeRuntime(const GridSpec& spec, NodeId self,
              int forward_cap = kDefaultForwardCap);

  // Processes a message from a physical neighbor, cascading the transition
  // through every level of the stack.
  void deliver_physical(NodeId from, uint32_t payload_id, PayloadPool& pool,
                        NodeOutbox& out);

  // Starts a user broadcast with this node as origin.
  void user_broadcast(std::string_view message, PayloadPool& pool,
                      NodeOutbox& out);

  NodeId self() const { return self_; }

  // Accepted user pairs, sorted by (source, payload id).
  const std::set<std::pair<uint64_t, uint32_t>>& accepted_pairs() const {
    return accepted_;
  }

 private:
  NodeId ancestor(int level) const;  // coords in the level-`level` macro-grid
  NodeId parent_of(NodeId v) const { return NodeId{v.i / spec_.n, v.j / spec_.n}; }

  void on_virtual_receive(int level, NodeId from, uint32_t payload_id,
                          PayloadPool& pool, NodeOutbox& out);
  void process_accept(int level, NodeId src, uint32_t payload_id,
                      PayloadPool& pool, NodeOutbox& out);
  void run_replica_outbox(int level, const ReplicaOutbox& rep,
                          PayloadPool& pool, NodeOutbox& out);
  void macro_send(int level, NodeId dest, uint32_t payload_id,
                  PayloadPool& pool, NodeOutbox& out);
  void deliver_top(NodeId top_src, std::string_view payload,
                   PayloadPool& pool, NodeOutbox& out);

  GridSpec spec_;
  NodeId self_;
  std::vector<BaseReplica> replicas_;       // index t: level-(t+1) replica
  std::vector<MacroChannelState> macro_;    // index t valid for 1 <= t <= k-1
  std::set<std::pair<uint64_t, uint32_t>> accepted_;
};

// direction index between adjacent cells: 0 up, 1 down, 2 left, 3 right
int dir_index(NodeId from, NodeId to);
NodeId dir_step(NodeId v, int dir);

}  // namespace gridcast
