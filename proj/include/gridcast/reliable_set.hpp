#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridcast/base_protocol.hpp"
#include "gridcast/correctness.hpp"
#include "gridcast/grid.hpp"
#include "gridcast/sim_engine.hpp"

namespace gridcast {

// Memoized per-cluster analysis; the Monte Carlo drivers hit the same n x n
// assignments constantly (all-correct, the 100 single-Byzantine cases).
class RelBaseCache {
 public:
  struct Entry {
    ReliableSet rel;
    bool def3_correct = false;
  };

  const Entry& get(const CorrectnessMap& local);
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, Entry> map_;
};

// Def-3 evaluated against an already-computed reliable set.
bool is_correct_macro_with(const ReliableSet& rel, int side);

// One recursion layer: the virtual grid whose nodes are this level's
// macro-nodes, marked correct iff the cluster passed Def 3.
struct RelLayers {
  ReliableSet rel;
  // layers[0] is the level-1 virtual map (side n^(k-1)), layers.back() the
  // top n x n virtual map; empty for k = 1.
  std::vector<CorrectnessMap> corr_prime;
};

// Reliable node set of the composed protocol on G_k:
//   k = 1: the base analyzer;
//   k > 1: per-cluster base sets, Def-3 screening into Corr', recursion on
//          the virtual grid, union of base sets over reliable macro-nodes.
ReliableSet rel_k(const GridSpec& spec, const CorrectnessMap& corr,
                  RelBaseCache* cache = nullptr);
RelLayers rel_k_layers(const GridSpec& spec, const CorrectnessMap& corr,
                       RelBaseCache* cache = nullptr);

struct FractionMetrics {
  long long members = 0;
  double fraction = 0.0;
  std::vector<long long> corr_prime_sizes;  // per recursion layer
  std::vector<long long> layer_nodes;       // virtual grid sizes per layer
};
FractionMetrics fraction_report(const GridSpec& spec,
                                const CorrectnessMap& corr,
                                RelBaseCache* cache = nullptr);

// Empirical check of the reliable-set contract against live runs.
struct VerifyOptions {
  int max_sources = 4;  // broadcast origins sampled from the set
  std::vector<AdversaryStrategy::Kind> adversaries = {
      AdversaryStrategy::Kind::SpoofSource,
      AdversaryStrategy::Kind::VoteForgery,
      AdversaryStrategy::Kind::Silent,
  };
  RunOptions run_options{.event_budget = 100'000'000,
                         .record_deliveries = false};
};

struct VerifyReport {
  long long runs = 0;
  long long pairs_checked = 0;
  long long liveness_failures = 0;
  long long safety_violations = 0;
  std::vector<std::string> counterexamples;  // capped at 10
};

// For sampled sources s in the set: every member r ends each run holding
// (s, m_s) (liveness), and no member ever holds (s', m') with s' in the set
// unless s' broadcast m' (safety). Runs once per adversary kind with a fair
// random schedule derived from `seed`.
VerifyReport verify_reliable(const GridSpec& spec, const CorrectnessMap& corr,
                             const ReliableSet& set, int trials, uint64_t seed,
                             const VerifyOptions& options = {});

}  // namespace gridcast
