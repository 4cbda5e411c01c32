#include "gridcast/fractal_protocol.hpp"

#include <stdexcept>

namespace gridcast {

int dir_index(NodeId from, NodeId to) {
  if (to.i == from.i - 1 && to.j == from.j) return 0;
  if (to.i == from.i + 1 && to.j == from.j) return 1;
  if (to.i == from.i && to.j == from.j - 1) return 2;
  if (to.i == from.i && to.j == from.j + 1) return 3;
  throw std::invalid_argument("cells are not adjacent");
}

NodeId dir_step(NodeId v, int dir) {
  switch (dir) {
    case 0: return {v.i - 1, v.j};
    case 1: return {v.i + 1, v.j};
    case 2: return {v.i, v.j - 1};
    default: return {v.i, v.j + 1};
  }
}

NodeRuntime::NodeRuntime(const GridSpec& spec, NodeId self, int forward_cap)
    : spec_(spec), self_(self) {
  if (spec.n > 16) {
    throw std::invalid_argument("runtime supports cluster side up to 16");
  }
  replicas_.reserve(spec.k);
  for (int t = 0; t < spec.k; ++t) {
    const NodeId anc = ancestor(t);
    ClusterRect rect;
    if (t == spec.k - 1) {
      rect = ClusterRect{NodeId{0, 0}, spec.n};
    } else {
      const NodeId up = ancestor(t + 1);
      rect = ClusterRect{NodeId{up.i * spec.n, up.j * spec.n}, spec.n};
    }
    replicas_.emplace_back(rect, anc, forward_cap);
  }
  macro_.resize(spec.k);
  for (int t = 1; t <= spec.k - 1; ++t) {
    MacroChannelState& m = macro_[t];
    m.anc = ancestor(t);
    const int mside = spec.macro_side(t);
    for (int d = 0; d < 4; ++d) {
      const NodeId w = dir_step(m.anc, d);
      if (in_grid(w, mside)) m.nbr[d] = w;
    }
  }
}

NodeId NodeRuntime::ancestor(int level) const {
  int block = 1;
  for (int l = 0; l < level; ++l) block *= spec_.n;
  return NodeId{self_.i / block, self_.j / block};
}

void NodeRuntime::user_broadcast(std::string_view message, PayloadPool& pool,
                                 NodeOutbox& out) {
  const uint32_t id = pool.intern(encode_user(message));
  ReplicaOutbox rep;
  replicas_[0].initiate_broadcast(id, pool, rep);
  run_replica_outbox(0, rep, pool, out);
}

void NodeRuntime::deliver_physical(NodeId from, uint32_t payload_id,
                                   PayloadPool& pool, NodeOutbox& out) {
  on_virtual_receive(0, from, payload_id, pool, out);
}

void NodeRuntime::on_virtual_receive(int level, NodeId from,
                                     uint32_t payload_id, PayloadPool& pool,
                                     NodeOutbox& out) {
  const bool intra =
      level == spec_.k - 1 || parent_of(from) == ancestor(level + 1);
  if (intra) {
    ReplicaOutbox rep;
    replicas_[level].deliver(from, payload_id, pool, rep);
    run_replica_outbox(level, rep, pool, out);
    return;
  }

  // payload crossed a cluster boundary one level up: vote for it
  MacroChannelState& m = macro_[level + 1];
  const NodeId sender_cluster = parent_of(from);
  const int dir = dir_index(m.anc, sender_cluster);
  if (!m.voted.insert({dir, payload_id}).second) return;  // one vote per payload

  const uint32_t vote_id = pool.intern(encode_vote(
      ancestor(level), sender_cluster, pool.bytes(payload_id)));
  ReplicaOutbox rep;
  replicas_[level].initiate_broadcast(vote_id, pool, rep);
  run_replica_outbox(level, rep, pool, out);
}

void NodeRuntime::run_replica_outbox(int level, const ReplicaOutbox& rep,
                                     PayloadPool& pool, NodeOutbox& out) {
  for (const auto& [dest, id] : rep.sends) {
    if (level == 0) {
      out.sends.emplace_back(dest, id);
    } else {
      macro_send(level, dest, id, pool, out);
    }
  }
  for (const auto& [src, id] : rep.accepts) {
    process_accept(level, src, id, pool, out);
  }
}

void NodeRuntime::macro_send(int level, NodeId dest, uint32_t payload_id,
                             PayloadPool& pool, NodeOutbox& out) {
  MacroChannelState& m = macro_[level];
  const int dir = dir_index(m.anc, dest);
  if (!m.sen[dir].insert(payload_id).second) return;

  // only border descendants put the payload on a channel
  const NodeId below = ancestor(level - 1);
  const NodeId across = dir_step(below, dir);
  if (parent_of(across) != dest) return;

  if (level == 1) {
    out.sends.emplace_back(across, payload_id);
  } else {
    macro_send(level - 1, across, payload_id, pool, out);
  }
}

void NodeRuntime::process_accept(int level, NodeId src, uint32_t payload_id,
                                 PayloadPool& pool, NodeOutbox& out) {
  const std::string& bytes = pool.bytes(payload_id);
  const auto kind = frame_kind(bytes);
  if (!kind) return;

  if (*kind == FrameKind::Vote) {
    if (level + 1 > spec_.k - 1) return;  // no macro level above
    auto vote = decode_vote(bytes);
    if (!vote || vote->voter != src) return;  // voter identity rides the pair
    MacroChannelState& m = macro_[level + 1];
    int dir;
    try {
      dir = dir_index(m.anc, vote->from_cluster);
    } catch (const std::invalid_argument&) {
      return;  // claimed sender is not a macro-neighbor
    }
    if (!m.nbr[dir]) return;
    // voter must sit on our side of that macro-channel
    if (parent_of(dir_step(src, dir)) != vote->from_cluster) return;

    const uint32_t inner_id = pool.intern(vote->inner);
    auto& voters = m.tally[{dir, inner_id}];
    voters.insert(static_cast<uint64_t>(node_index(src, 1 << 20)));
    if (2 * static_cast<int>(voters.size()) > spec_.n &&
        m.rec[dir].insert(inner_id).second) {
      on_virtual_receive(level + 1, vote->from_cluster, inner_id, pool, out);
    }
    return;
  }

  if (*kind != FrameKind::Bcast && *kind != FrameKind::User) return;

  if (level == spec_.k - 1) {
    deliver_top(src, bytes, pool, out);
    return;
  }
  const uint32_t wrapped = pool.intern(encode_bcast(src, bytes));
  ReplicaOutbox rep;
  replicas_[level + 1].initiate_broadcast(wrapped, pool, rep);
  run_replica_outbox(level + 1, rep, pool, out);
}

void NodeRuntime::deliver_top(NodeId top_src, std::string_view payload,
                              PayloadPool& pool, NodeOutbox& out) {
  auto chain = decode_bcast_chain(payload);
  if (!chain) return;
  if (static_cast<int>(chain->wrap_sources.size()) != spec_.k - 1) return;

  // every wrap source must be the claimed origin's ancestor at its level,
  // and the top pair's source the origin's top-level ancestor
  const NodeId origin =
      chain->wrap_sources.empty() ? top_src : chain->wrap_sources.back();
  if (!in_grid(origin, spec_.side())) return;
  auto origin_ancestor = [&](int level) {
    int block = 1;
    for (int l = 0; l < level; ++l) block *= spec_.n;
    return NodeId{origin.i / block, origin.j / block};
  };
  for (int idx = 0; idx < static_cast<int>(chain->wrap_sources.size()); ++idx) {
    if (chain->wrap_sources[idx] != origin_ancestor(spec_.k - 2 - idx)) return;
  }
  if (top_src != origin_ancestor(spec_.k - 1)) return;

  const uint32_t user_id = pool.intern(chain->user_bytes);
  const uint64_t skey = static_cast<uint64_t>(node_index(origin, spec_.side()));
  if (accepted_.insert({skey, user_id}).second) {
    out.accepts.emplace_back(origin, user_id);
  }
}

}  // namespace gridcast
