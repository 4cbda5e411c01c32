#include "gridcast/correctness.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridcast {

long long CorrectnessMap::correct_count() const {
  long long c = 0;
  for (uint8_t b : correct_) c += b;
  return c;
}

std::vector<NodeId> CorrectnessMap::correct_nodes() const {
  std::vector<NodeId> out;
  for (long long idx = 0; idx < node_count(); ++idx) {
    if (correct_[idx]) out.push_back(node_at(idx, side_));
  }
  return out;
}

std::vector<NodeId> CorrectnessMap::byzantine_nodes() const {
  std::vector<NodeId> out;
  for (long long idx = 0; idx < node_count(); ++idx) {
    if (!correct_[idx]) out.push_back(node_at(idx, side_));
  }
  return out;
}

CorrectnessMap CorrectnessMap::restrict(const ClusterRect& rect) const {
  CorrectnessMap out(rect.side);
  for (int i = 0; i < rect.side; ++i) {
    for (int j = 0; j < rect.side; ++j) {
      NodeId global{rect.origin.i + i, rect.origin.j + j};
      if (!is_correct(global)) out.set_byzantine(NodeId{i, j});
    }
  }
  return out;
}

std::vector<uint64_t> CorrectnessMap::byzantine_bits() const {
  std::vector<uint64_t> bits((node_count() + 63) / 64, 0);
  for (long long idx = 0; idx < node_count(); ++idx) {
    if (!correct_[idx]) bits[idx / 64] |= uint64_t{1} << (idx % 64);
  }
  return bits;
}

CorrectnessMap sample_correctness(int side, double mu, std::mt19937_64& rng) {
  CorrectnessMap out(side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      if (unit(rng) >= mu) out.set_byzantine(NodeId{i, j});
    }
  }
  return out;
}

CorrectnessMap read_placement(std::istream& in, int side) {
  CorrectnessMap out(side);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i)) continue;  // blank or comment-only
    if (!(ls >> j)) {
      throw std::invalid_argument("placement line " + std::to_string(lineno) +
                                  ": expected two integers");
    }
    NodeId v{i, j};
    if (!in_grid(v, side)) {
      throw std::invalid_argument("placement line " + std::to_string(lineno) +
                                  ": node " + to_string(v) + " outside grid");
    }
    out.set_byzantine(v);
  }
  return out;
}

CorrectnessMap read_placement_file(const std::string& path, int side) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open placement file " + path);
  return read_placement(in, side);
}

void write_placement(std::ostream& out, const CorrectnessMap& corr) {
  out << "# byzantine nodes, one \"i j\" per line (" << corr.side() << "x"
      << corr.side() << " grid)\n";
  for (NodeId v : corr.byzantine_nodes()) out << v.i << " " << v.j << "\n";
}

}  // namespace gridcast
