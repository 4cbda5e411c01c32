#include <algorithm>
#include <deque>
#include <numeric>

#include "gridcast/base_protocol.hpp"

namespace gridcast {

namespace {

// Unit-capacity max-flow on the node-split graph, capped at 2 augmentations.
// Vertices: 2*N for the split grid nodes, plus a super source feeding every
// Byzantine node. Answers: are there two node-disjoint paths, each rooted at
// a distinct Byzantine node and otherwise all-correct, ending at `target`?
class ForgeryFlow {
 public:
  explicit ForgeryFlow(const CorrectnessMap& corr) : corr_(corr) {
    side_ = corr.side();
    n_ = static_cast<int>(corr.node_count());
  }

  bool two_disjoint_to(NodeId target) {
    // vertex v: in = 2v, out = 2v+1; source = 2n
    const int source = 2 * n_;
    const int sink = 2 * static_cast<int>(node_index(target, side_));
    head_.assign(static_cast<size_t>(2 * n_ + 1), {});
    to_.clear();
    flow_caps_.clear();

    for (int idx = 0; idx < n_; ++idx) {
      const NodeId v = node_at(idx, side_);
      const bool corr_v = corr_.is_correct(v);
      if (!corr_v) {
        add_edge(source, 2 * idx, 1);
      }
      if (v == target) continue;  // no split on the sink
      add_edge(2 * idx, 2 * idx + 1, 1);
      for (NodeId w : neighbors(v, side_)) {
        // relay hops run through correct nodes only
        if (w != target && !corr_.is_correct(w)) continue;
        add_edge(2 * idx + 1, 2 * static_cast<int>(node_index(w, side_)), 1);
      }
    }

    int flow = 0;
    while (flow < 2 && augment(source, sink)) ++flow;
    return flow >= 2;
  }

 private:
  void add_edge(int a, int b, int c) {
    head_[a].push_back(static_cast<int>(to_.size()));
    to_.push_back(b);
    head_[b].push_back(static_cast<int>(to_.size()));
    to_.push_back(a);
    flow_caps_.push_back(c);
    flow_caps_.push_back(0);
  }

  bool augment(int source, int sink) {
    std::vector<int> prev_edge(static_cast<size_t>(2 * n_ + 1), -1);
    std::deque<int> queue{source};
    prev_edge[source] = -2;
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      if (x == sink) break;
      for (int e : head_[x]) {
        if (flow_caps_[e] > 0 && prev_edge[to_[e]] == -1) {
          prev_edge[to_[e]] = e;
          queue.push_back(to_[e]);
        }
      }
    }
    if (prev_edge[sink] == -1) return false;
    for (int x = sink; x != source;) {
      int e = prev_edge[x];
      flow_caps_[e] -= 1;
      flow_caps_[e ^ 1] += 1;
      x = to_[e ^ 1];
    }
    return true;
  }

  const CorrectnessMap& corr_;
  int side_ = 0;
  int n_ = 0;
  std::vector<std::vector<int>> head_;
  std::vector<int> to_;
  std::vector<int> flow_caps_;
};

// Biconnected components of the correct-node subgraph (Hopcroft-Tarjan,
// iterative). Two non-adjacent correct nodes have two internally
// node-disjoint correct paths iff they share a component.
class Bicomps {
 public:
  explicit Bicomps(const CorrectnessMap& corr) {
    side_ = corr.side();
    const int n = static_cast<int>(corr.node_count());
    comps_.assign(static_cast<size_t>(n), {});
    std::vector<int> disc(static_cast<size_t>(n), -1);
    std::vector<int> low(static_cast<size_t>(n), 0);
    std::vector<std::pair<int, int>> edge_stack;

    struct Frame {
      int v;
      int parent;
      int next_nbr;
    };

    int timer = 0;
    int comp_id = 0;
    for (int root = 0; root < n; ++root) {
      if (disc[root] != -1 || !corr.is_correct(node_at(root, side_))) continue;
      std::vector<Frame> stack{{root, -1, 0}};
      disc[root] = low[root] = timer++;
      while (!stack.empty()) {
        Frame& f = stack.back();
        const NodeId v = node_at(f.v, side_);
        const auto nbrs = neighbors(v, side_);
        bool descended = false;
        while (f.next_nbr < static_cast<int>(nbrs.size())) {
          const NodeId wn = nbrs[f.next_nbr++];
          if (!corr.is_correct(wn)) continue;
          const int w = static_cast<int>(node_index(wn, side_));
          if (w == f.parent) continue;
          if (disc[w] == -1) {
            edge_stack.emplace_back(f.v, w);
            disc[w] = low[w] = timer++;
            stack.push_back({w, f.v, 0});
            descended = true;
            break;
          }
          if (disc[w] < disc[f.v]) {
            edge_stack.emplace_back(f.v, w);
            low[f.v] = std::min(low[f.v], disc[w]);
          }
        }
        if (descended) continue;
        const Frame done = stack.back();
        stack.pop_back();
        if (stack.empty()) continue;
        Frame& p = stack.back();
        low[p.v] = std::min(low[p.v], low[done.v]);
        if (low[done.v] >= disc[p.v]) {
          const int c = comp_id++;
          while (!edge_stack.empty()) {
            auto [a, b] = edge_stack.back();
            edge_stack.pop_back();
            mark(a, c);
            mark(b, c);
            if (a == p.v && b == done.v) break;
          }
        }
      }
    }
  }

  bool share_component(int a, int b) const {
    for (int c : comps_[a]) {
      for (int d : comps_[b]) {
        if (c == d) return true;
      }
    }
    return false;
  }

 private:
  void mark(int v, int c) {
    auto& cs = comps_[v];
    if (std::find(cs.begin(), cs.end(), c) == cs.end()) cs.push_back(c);
  }

  int side_ = 0;
  std::vector<std::vector<int>> comps_;
};

}  // namespace

bool ReliableSet::contains(NodeId v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

std::vector<NodeId> forgeable_nodes(const CorrectnessMap& corr) {
  std::vector<NodeId> out;
  if (corr.byzantine_count() < 2) return out;
  ForgeryFlow flow(corr);
  for (NodeId u : corr.correct_nodes()) {
    if (flow.two_disjoint_to(u)) out.push_back(u);
  }
  return out;
}

bool pair_live(const CorrectnessMap& corr, NodeId a, NodeId b) {
  if (!corr.is_correct(a) || !corr.is_correct(b)) return false;
  if (a == b) return true;
  if (adjacent(a, b)) return true;
  Bicomps comps(corr);
  return comps.share_component(
      static_cast<int>(node_index(a, corr.side())),
      static_cast<int>(node_index(b, corr.side())));
}

ReliableSet rel_base(const CorrectnessMap& corr) {
  const int side = corr.side();
  const auto correct = corr.correct_nodes();
  const auto forgeable = forgeable_nodes(corr);

  std::vector<NodeId> candidates;
  std::set_difference(correct.begin(), correct.end(), forgeable.begin(),
                      forgeable.end(), std::back_inserter(candidates));

  Bicomps comps(corr);
  auto live = [&](NodeId a, NodeId b) {
    return adjacent(a, b) ||
           comps.share_component(static_cast<int>(node_index(a, side)),
                                 static_cast<int>(node_index(b, side)));
  };

  // conflict counts within the candidate set
  const int m = static_cast<int>(candidates.size());
  std::vector<int> conflicts(static_cast<size_t>(m), 0);
  std::vector<uint8_t> alive(static_cast<size_t>(m), 1);
  std::vector<std::vector<int>> conflict_with(static_cast<size_t>(m));
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (!live(candidates[a], candidates[b])) {
        ++conflicts[a];
        ++conflicts[b];
        conflict_with[a].push_back(b);
        conflict_with[b].push_back(a);
      }
    }
  }

  // drop the worst offender each round, lexicographically first among ties
  while (true) {
    int worst = -1;
    for (int a = 0; a < m; ++a) {
      if (alive[a] && conflicts[a] > 0 &&
          (worst == -1 || conflicts[a] > conflicts[worst])) {
        worst = a;
      }
    }
    if (worst == -1) break;
    alive[worst] = 0;
    for (int b : conflict_with[worst]) {
      if (alive[b]) --conflicts[b];
    }
    conflicts[worst] = 0;
  }

  ReliableSet out;
  for (int a = 0; a < m; ++a) {
    if (alive[a]) out.members.push_back(candidates[a]);
  }
  out.fraction =
      static_cast<double>(out.members.size()) / corr.node_count();
  return out;
}

bool is_correct_macro(const CorrectnessMap& corr) {
  const ReliableSet rel = rel_base(corr);
  const int n = corr.side();
  const ClusterRect rect{NodeId{0, 0}, n};
  for (const auto& side_nodes : cluster_sides(rect)) {
    int inside = 0;
    for (NodeId v : side_nodes) {
      if (rel.contains(v)) ++inside;
    }
    if (4 * inside <= 3 * n) return false;  // needs strictly more than 3n/4
  }
  return true;
}

}  // namespace gridcast
