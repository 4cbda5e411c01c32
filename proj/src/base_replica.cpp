#include <algorithm>

#include "gridcast/base_protocol.hpp"

namespace gridcast {

namespace {

// Walk source -> path[0] -> ... -> path.back() -> holder with at most one
// direction change. Exactly two such paths exist through any holder, so these
// copies can always be relayed: survival never depends on delivery order.
bool is_axis_canonical(NodeId source, const std::vector<NodeId>& path,
                       NodeId holder) {
  NodeId prev = source;
  int last_dir = -1;
  int turns = 0;
  auto step = [&](NodeId next) {
    const int dir = next.i == prev.i ? (next.j > prev.j ? 3 : 2)
                                     : (next.i > prev.i ? 1 : 0);
    if (last_dir != -1 && dir != last_dir) ++turns;
    last_dir = dir;
    prev = next;
  };
  for (NodeId v : path) step(v);
  step(holder);
  return turns <= 1;
}

}  // namespace

BaseReplica::BaseReplica(ClusterRect rect, NodeId self, int forward_cap)
    : rect_(rect),
      self_(self),
      cap_(forward_cap),
      quota_(forward_cap >= 4 ? forward_cap / 4 : 1) {}

void BaseReplica::initiate_broadcast(uint32_t payload_id, PayloadPool& pool,
                                     ReplicaOutbox& out) {
  auto [it, fresh] = pairs_.try_emplace(key(self_, payload_id));
  if (!fresh) return;  // re-broadcasts collapse
  it->second.accepted = true;
  out.accepts.emplace_back(self_, payload_id);

  const uint32_t copy_id =
      pool.intern(encode_copy(self_, {}, pool.bytes(payload_id)));
  for (NodeId w : neighbors(NodeId{self_.i - rect_.origin.i,
                                   self_.j - rect_.origin.j},
                            rect_.side)) {
    out.sends.emplace_back(
        NodeId{w.i + rect_.origin.i, w.j + rect_.origin.j}, copy_id);
  }
}

void BaseReplica::deliver(NodeId peer, uint32_t copy_id, PayloadPool& pool,
                          ReplicaOutbox& out) {
  if (!rect_.contains(peer) || !adjacent(peer, self_)) return;

  auto frame = decode_copy(pool.bytes(copy_id));
  if (!frame) return;
  if (!rect_.contains(frame->source)) return;

  // receiver-side append: the sender joins the relay path
  std::vector<NodeId> path = std::move(frame->path);
  if (peer != frame->source) path.push_back(peer);

  PathMask mask;
  for (NodeId v : path) {
    if (!rect_.contains(v)) return;
    if (v == self_ || v == frame->source) return;
    const int idx = rect_.local_index(v);
    if (mask.test(idx)) return;  // duplicate entry
    mask.set(idx);
  }

  const uint32_t inner_id = pool.intern(frame->inner);
  PairState& st = pairs_[key(frame->source, inner_id)];

  const bool direct = (peer == frame->source);
  if (!st.accepted) {
    bool accept = direct;
    if (!accept) {
      for (const PathMask& m : st.masks) {
        if (!m.intersects(mask)) {
          accept = true;
          break;
        }
      }
    }
    if (accept) {
      st.accepted = true;
      st.paths.clear();
      st.masks.clear();
      out.accepts.emplace_back(frame->source, inner_id);
    } else {
      st.paths.push_back(path);
      st.masks.push_back(mask);
    }
  }

  // Relay policy. First-come dropping alone starves far receivers of
  // disjoint routes under unlucky delivery orders, so the budget has two
  // parts:
  //  - single-turn copies relay unconditionally (there are at most two per
  //    holder, and they give every receiver its two disjoint routes when no
  //    failure blocks them);
  //  - everything else is near-geodesic with a quota per (first relay,
  //    arrival channel) class, which keeps detours around failed nodes alive
  //    without letting wandering copies crowd out a whole direction.
  bool relay = false;
  if (is_axis_canonical(frame->source, path, self_)) {
    relay = st.canonical_relayed.size() < 4 &&
            st.canonical_relayed.insert(copy_id).second;
  } else if (st.forwarded < cap_ * 4) {
    const int dist = std::abs(frame->source.i - self_.i) +
                     std::abs(frame->source.j - self_.j);
    if (static_cast<int>(path.size()) <= dist - 1 + kRelaySlack) {
      const int family = path.empty() ? -1 : rect_.local_index(path.front());
      const int entry = rect_.local_index(peer);
      int& used = st.class_forwarded[{family, entry}];
      if (used < quota_) {
        ++used;
        ++st.forwarded;
        relay = true;
      }
    }
  }
  if (!relay) return;

  const uint32_t fwd_id =
      pool.intern(encode_copy(frame->source, path, frame->inner));
  for (NodeId w : neighbors(NodeId{self_.i - rect_.origin.i,
                                   self_.j - rect_.origin.j},
                            rect_.side)) {
    const NodeId dest{w.i + rect_.origin.i, w.j + rect_.origin.j};
    if (dest == frame->source) continue;
    if (mask.test(rect_.local_index(dest))) continue;  // already relayed it
    out.sends.emplace_back(dest, fwd_id);
  }
}

bool BaseReplica::has_accepted(NodeId source, uint32_t payload_id) const {
  auto it = pairs_.find(key(source, payload_id));
  return it != pairs_.end() && it->second.accepted;
}

}  // namespace gridcast
