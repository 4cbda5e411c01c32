#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace gridcast {

// Position on a square grid, (row, column), origin top-left.
struct NodeId {
  int i = 0;
  int j = 0;
  auto operator<=>(const NodeId&) const = default;
};

std::string to_string(NodeId v);

// Parameters of the fractal grid hierarchy: clusters of side n, nested k deep.
// The full grid has side n^k.
struct GridSpec {
  int n = 10;
  int k = 1;

  GridSpec(int n_, int k_);

  int side() const { return side_; }
  long long node_count() const { return static_cast<long long>(side_) * side_; }
  // side of the level-`level` macro-grid (level 0 = physical grid)
  int macro_side(int level) const;

 private:
  int side_ = 10;
};

// A cluster at hierarchy level `level` (level 1 groups n x n physical nodes),
// addressed by its coordinates in the level-`level` macro-grid.
struct MacroNodeId {
  int level = 1;
  int i = 0;
  int j = 0;
  auto operator<=>(const MacroNodeId&) const = default;
};

inline long long node_index(NodeId v, int side) {
  return static_cast<long long>(v.i) * side + v.j;
}

inline NodeId node_at(long long index, int side) {
  return NodeId{static_cast<int>(index / side), static_cast<int>(index % side)};
}

inline bool in_grid(NodeId v, int side) {
  return v.i >= 0 && v.i < side && v.j >= 0 && v.j < side;
}

inline bool adjacent(NodeId a, NodeId b) {
  const int di = a.i > b.i ? a.i - b.i : b.i - a.i;
  const int dj = a.j > b.j ? a.j - b.j : b.j - a.j;
  return di + dj == 1;
}

// The 2..4 nodes at Manhattan distance 1 inside the side x side grid.
// Throws std::invalid_argument if `v` is out of bounds.
std::vector<NodeId> neighbors(NodeId v, int side);

// Macro-node of hierarchy level `level` (1 <= level < spec.k) containing `v`.
MacroNodeId cluster_of(NodeId v, const GridSpec& spec, int level);

// Physical origin (top-left node) of a macro-node's cluster.
NodeId cluster_origin(MacroNodeId p, const GridSpec& spec);

// The n^level nodes of G(p) adjacent to G(q), in ascending order along the
// shared edge. border(p, q)[t] and border(q, p)[t] are physical neighbors.
// Throws std::invalid_argument if p and q are not adjacent same-level clusters.
std::vector<NodeId> border(MacroNodeId p, MacroNodeId q, const GridSpec& spec);

// Same border computation on an abstract grid of cluster_side x cluster_side
// clusters: border nodes of cluster `p` facing adjacent cluster `q`, in the
// coordinate space the clusters live in.
std::vector<NodeId> border_rect(NodeId p, NodeId q, int cluster_side);

// Axis-aligned n x n window of a grid; the coordinate frame base replicas
// operate in.
struct ClusterRect {
  NodeId origin;
  int side = 0;  // nodes per edge

  bool contains(NodeId v) const {
    return v.i >= origin.i && v.i < origin.i + side && v.j >= origin.j &&
           v.j < origin.j + side;
  }
  int local_index(NodeId v) const {
    return (v.i - origin.i) * side + (v.j - origin.j);
  }
  NodeId at_local(int idx) const {
    return NodeId{origin.i + idx / side, origin.j + idx % side};
  }
};

// The four geographic sides of a cluster, corners included in both incident
// sides. Order: up, down, left, right.
std::vector<std::vector<NodeId>> cluster_sides(const ClusterRect& rect);

}  // namespace gridcast
