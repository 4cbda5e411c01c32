#include "gridcast/grid.hpp"

#include <stdexcept>

namespace gridcast {

std::string to_string(NodeId v) {
  return "(" + std::to_string(v.i) + "," + std::to_string(v.j) + ")";
}

GridSpec::GridSpec(int n_, int k_) : n(n_), k(k_) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("grid cluster side must be even and >= 4, got " +
                                std::to_string(n));
  }
  if (k < 1) {
    throw std::invalid_argument("hierarchy depth must be >= 1, got " +
                                std::to_string(k));
  }
  long long s = 1;
  for (int l = 0; l < k; ++l) {
    s *= n;
    if (s > 1'000'000) {
      throw std::invalid_argument("grid side n^k exceeds supported size");
    }
  }
  side_ = static_cast<int>(s);
}

int GridSpec::macro_side(int level) const {
  if (level < 0 || level > k) {
    throw std::invalid_argument("macro level out of range");
  }
  int s = side_;
  for (int l = 0; l < level; ++l) s /= n;
  return s;
}

std::vector<NodeId> neighbors(NodeId v, int side) {
  if (!in_grid(v, side)) {
    throw std::invalid_argument("node " + to_string(v) + " outside " +
                                std::to_string(side) + "x" +
                                std::to_string(side) + " grid");
  }
  std::vector<NodeId> out;
  out.reserve(4);
  if (v.i > 0) out.push_back({v.i - 1, v.j});
  if (v.i + 1 < side) out.push_back({v.i + 1, v.j});
  if (v.j > 0) out.push_back({v.i, v.j - 1});
  if (v.j + 1 < side) out.push_back({v.i, v.j + 1});
  return out;
}

MacroNodeId cluster_of(NodeId v, const GridSpec& spec, int level) {
  if (level < 1 || level >= spec.k) {
    throw std::invalid_argument("cluster level " + std::to_string(level) +
                                " out of range for depth " +
                                std::to_string(spec.k));
  }
  if (!in_grid(v, spec.side())) {
    throw std::invalid_argument("node " + to_string(v) + " outside grid");
  }
  int block = 1;
  for (int l = 0; l < level; ++l) block *= spec.n;
  return MacroNodeId{level, v.i / block, v.j / block};
}

NodeId cluster_origin(MacroNodeId p, const GridSpec& spec) {
  int block = 1;
  for (int l = 0; l < p.level; ++l) block *= spec.n;
  return NodeId{p.i * block, p.j * block};
}

std::vector<NodeId> border_rect(NodeId p, NodeId q, int cluster_side) {
  if (!adjacent(p, q)) {
    throw std::invalid_argument("clusters " + to_string(p) + " and " +
                                to_string(q) + " are not adjacent");
  }
  const int s = cluster_side;
  const NodeId o{p.i * s, p.j * s};
  std::vector<NodeId> out;
  out.reserve(s);
  if (q.i == p.i - 1) {  // q above: top row of p
    for (int t = 0; t < s; ++t) out.push_back({o.i, o.j + t});
  } else if (q.i == p.i + 1) {  // q below: bottom row
    for (int t = 0; t < s; ++t) out.push_back({o.i + s - 1, o.j + t});
  } else if (q.j == p.j - 1) {  // q left: left column
    for (int t = 0; t < s; ++t) out.push_back({o.i + t, o.j});
  } else {  // q right: right column
    for (int t = 0; t < s; ++t) out.push_back({o.i + t, o.j + s - 1});
  }
  return out;
}

std::vector<NodeId> border(MacroNodeId p, MacroNodeId q, const GridSpec& spec) {
  if (p.level != q.level) {
    throw std::invalid_argument("border of clusters at different levels");
  }
  int block = 1;
  for (int l = 0; l < p.level; ++l) block *= spec.n;
  return border_rect(NodeId{p.i, p.j}, NodeId{q.i, q.j}, block);
}

std::vector<std::vector<NodeId>> cluster_sides(const ClusterRect& rect) {
  std::vector<std::vector<NodeId>> sides(4);
  const int s = rect.side;
  for (int t = 0; t < s; ++t) {
    sides[0].push_back({rect.origin.i, rect.origin.j + t});          // up
    sides[1].push_back({rect.origin.i + s - 1, rect.origin.j + t});  // down
    sides[2].push_back({rect.origin.i + t, rect.origin.j});          // left
    sides[3].push_back({rect.origin.i + t, rect.origin.j + s - 1});  // right
  }
  return sides;
}

}  // namespace gridcast
