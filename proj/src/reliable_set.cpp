#include "gridcast/reliable_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridcast {

namespace {

std::string cache_key(const CorrectnessMap& corr) {
  std::string key = std::to_string(corr.side());
  key.push_back(':');
  for (uint64_t word : corr.byzantine_bits()) {
    key.append(reinterpret_cast<const char*>(&word), sizeof(word));
  }
  return key;
}

}  // namespace

const RelBaseCache::Entry& RelBaseCache::get(const CorrectnessMap& local) {
  const std::string key = cache_key(local);
  auto it = map_.find(key);
  if (it == map_.end()) {
    Entry e;
    e.rel = rel_base(local);
    e.def3_correct = is_correct_macro_with(e.rel, local.side());
    it = map_.emplace(key, std::move(e)).first;
  }
  return it->second;
}

bool is_correct_macro_with(const ReliableSet& rel, int side) {
  const ClusterRect rect{NodeId{0, 0}, side};
  for (const auto& side_nodes : cluster_sides(rect)) {
    int inside = 0;
    for (NodeId v : side_nodes) {
      if (rel.contains(v)) ++inside;
    }
    if (4 * inside <= 3 * side) return false;
  }
  return true;
}

RelLayers rel_k_layers(const GridSpec& spec, const CorrectnessMap& corr,
                       RelBaseCache* cache) {
  if (corr.side() != spec.side()) {
    throw std::invalid_argument("correctness map does not match grid");
  }
  RelLayers out;
  if (spec.k == 1) {
    out.rel = cache ? cache->get(corr).rel : rel_base(corr);
    return out;
  }

  const int macro_side = spec.side() / spec.n;
  CorrectnessMap corr_prime(macro_side);
  std::vector<ReliableSet> cluster_rel(
      static_cast<size_t>(macro_side) * macro_side);
  for (int pi = 0; pi < macro_side; ++pi) {
    for (int pj = 0; pj < macro_side; ++pj) {
      const ClusterRect rect{NodeId{pi * spec.n, pj * spec.n}, spec.n};
      const CorrectnessMap local = corr.restrict(rect);
      bool def3;
      ReliableSet rel;
      if (cache) {
        const auto& entry = cache->get(local);
        rel = entry.rel;
        def3 = entry.def3_correct;
      } else {
        rel = rel_base(local);
        def3 = is_correct_macro_with(rel, spec.n);
      }
      cluster_rel[node_index(NodeId{pi, pj}, macro_side)] = std::move(rel);
      if (!def3) corr_prime.set_byzantine(NodeId{pi, pj});
    }
  }

  const GridSpec sub(spec.n, spec.k - 1);
  RelLayers below = rel_k_layers(sub, corr_prime, cache);

  out.corr_prime.push_back(std::move(corr_prime));
  for (auto& layer : below.corr_prime) {
    out.corr_prime.push_back(std::move(layer));
  }

  for (NodeId p : below.rel.members) {
    const ClusterRect rect{NodeId{p.i * spec.n, p.j * spec.n}, spec.n};
    for (NodeId v : cluster_rel[node_index(p, macro_side)].members) {
      out.rel.members.push_back(
          NodeId{rect.origin.i + v.i, rect.origin.j + v.j});
    }
  }
  std::sort(out.rel.members.begin(), out.rel.members.end());
  out.rel.fraction =
      static_cast<double>(out.rel.members.size()) / corr.node_count();
  return out;
}

ReliableSet rel_k(const GridSpec& spec, const CorrectnessMap& corr,
                  RelBaseCache* cache) {
  return rel_k_layers(spec, corr, cache).rel;
}

FractionMetrics fraction_report(const GridSpec& spec,
                                const CorrectnessMap& corr,
                                RelBaseCache* cache) {
  const RelLayers layers = rel_k_layers(spec, corr, cache);
  FractionMetrics out;
  out.members = static_cast<long long>(layers.rel.members.size());
  out.fraction = layers.rel.fraction;
  for (const auto& layer : layers.corr_prime) {
    out.corr_prime_sizes.push_back(layer.correct_count());
    out.layer_nodes.push_back(layer.node_count());
  }
  return out;
}

VerifyReport verify_reliable(const GridSpec& spec, const CorrectnessMap& corr,
                             const ReliableSet& set, int trials, uint64_t seed,
                             const VerifyOptions& options) {
  VerifyReport report;
  if (set.members.empty()) return report;

  // seeded spread of broadcast origins across the set
  std::mt19937_64 rng(seed);
  std::vector<NodeId> sources = set.members;
  std::shuffle(sources.begin(), sources.end(), rng);
  const int want = std::min<long long>(
      std::max(trials, 1), static_cast<long long>(sources.size()));
  sources.resize(static_cast<size_t>(want));
  std::sort(sources.begin(), sources.end());

  std::vector<std::pair<NodeId, std::string>> broadcasts;
  for (NodeId s : sources) {
    broadcasts.emplace_back(s, "m@" + to_string(s));
  }

  const NodeId forge_target = set.members.front();

  for (auto kind : options.adversaries) {
    AdversaryStrategy adversary;
    adversary.kind = kind;
    adversary.fake_source = forge_target;
    adversary.forged_payload = "FORGED";
    adversary.seed = seed;

    Schedule schedule{SchedulePolicy::UniformRandom,
                      seed ^ (0x1234567ull + report.runs)};
    const Trace trace =
        run(spec, corr, adversary, schedule, broadcasts, options.run_options);
    ++report.runs;

    // liveness: every member holds every sampled broadcast
    for (NodeId s : sources) {
      const std::string want_payload = "m@" + to_string(s);
      for (NodeId r : set.members) {
        ++report.pairs_checked;
        const FinalAccept probe{r, s, want_payload};
        if (!std::binary_search(trace.final_accepted.begin(),
                                trace.final_accepted.end(), probe)) {
          ++report.liveness_failures;
          if (report.counterexamples.size() < 10) {
            report.counterexamples.push_back(
                "liveness: " + to_string(r) + " missed (" + to_string(s) +
                ", " + want_payload + ") under adversary kind " +
                std::to_string(static_cast<int>(kind)));
          }
        }
      }
    }

    // safety: no member holds a pair attributed to a member that was not
    // actually broadcast
    for (const FinalAccept& acc : trace.final_accepted) {
      if (!set.contains(acc.node) || !set.contains(acc.source)) continue;
      const bool genuine =
          std::binary_search(sources.begin(), sources.end(), acc.source) &&
          acc.payload == "m@" + to_string(acc.source);
      if (!genuine) {
        ++report.safety_violations;
        if (report.counterexamples.size() < 10) {
          report.counterexamples.push_back(
              "safety: " + to_string(acc.node) + " accepted forged (" +
              to_string(acc.source) + ", " + acc.payload +
              ") under adversary kind " +
              std::to_string(static_cast<int>(kind)));
        }
      }
    }
  }
  return report;
}

}  // namespace gridcast
