#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "gridcast/grid.hpp"

namespace gridcast {

// Correct/Byzantine status for every node of a side x side grid.
class CorrectnessMap {
 public:
  CorrectnessMap() = default;
  explicit CorrectnessMap(int side, bool all_correct = true)
      : side_(side), correct_(static_cast<size_t>(side) * side, all_correct) {}

  int side() const { return side_; }
  long long node_count() const { return static_cast<long long>(side_) * side_; }

  bool is_correct(NodeId v) const { return correct_[node_index(v, side_)]; }
  void set_byzantine(NodeId v) { correct_[node_index(v, side_)] = false; }
  void set_correct(NodeId v) { correct_[node_index(v, side_)] = true; }

  long long correct_count() const;
  long long byzantine_count() const { return node_count() - correct_count(); }

  std::vector<NodeId> correct_nodes() const;
  std::vector<NodeId> byzantine_nodes() const;

  // Restriction to a cluster window, re-based to local coordinates.
  CorrectnessMap restrict(const ClusterRect& rect) const;

  // Compact key for memoization: one bit per node, correct = 0.
  std::vector<uint64_t> byzantine_bits() const;

  bool operator==(const CorrectnessMap&) const = default;

 private:
  int side_ = 0;
  std::vector<uint8_t> correct_;
};

// i.i.d. sample: each node correct with probability mu.
CorrectnessMap sample_correctness(int side, double mu, std::mt19937_64& rng);

// Placement files list Byzantine nodes, one "i j" pair per line.
// '#' starts a comment; blank lines are skipped.
CorrectnessMap read_placement(std::istream& in, int side);
CorrectnessMap read_placement_file(const std::string& path, int side);
void write_placement(std::ostream& out, const CorrectnessMap& corr);

}  // namespace gridcast
