#include "gridcast/sim_engine.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace gridcast {

namespace {

using ordered_json = nlohmann::ordered_json;

class Scheduler {
 public:
  explicit Scheduler(const Schedule& schedule, const CorrectnessMap& corr)
      : policy_(schedule.policy), corr_(corr), rng_(schedule.seed) {}

  void push(Envelope e) {
    if (policy_ == SchedulePolicy::AdversarialDelay &&
        !corr_.is_correct(e.sender)) {
      byz_.push_back(e);
    } else {
      main_.push_back(e);
    }
  }

  bool empty() const { return main_.empty() && byz_.empty(); }
  size_t size() const { return main_.size() + byz_.size(); }

  Envelope pop() {
    switch (policy_) {
      case SchedulePolicy::Fifo: {
        Envelope e = main_.front();
        main_.pop_front();
        return e;
      }
      case SchedulePolicy::UniformRandom: {
        std::uniform_int_distribution<size_t> pick(0, main_.size() - 1);
        const size_t idx = pick(rng_);
        std::swap(main_[idx], main_.back());
        Envelope e = main_.back();
        main_.pop_back();
        return e;
      }
      case SchedulePolicy::AdversarialDelay: {
        // Byzantine traffic jumps the queue, newest first; honest traffic is
        // served newest-first as well, a legal (fair-by-drain) order.
        auto& q = byz_.empty() ? main_ : byz_;
        Envelope e = q.back();
        q.pop_back();
        return e;
      }
    }
    throw std::logic_error("unknown schedule policy");
  }

 private:
  SchedulePolicy policy_;
  const CorrectnessMap& corr_;
  std::mt19937_64 rng_;
  std::deque<Envelope> main_;
  std::deque<Envelope> byz_;
};

struct RawSend {
  NodeId sender;
  NodeId receiver;
  uint32_t payload = 0;
};

// Byzantine behavior generator. Every strategy's actions are emitted in one
// opening batch; the engine validates that each send uses a real channel of a
// Byzantine node.
class AdversaryEngine {
 public:
  AdversaryEngine(const AdversaryStrategy& strategy, const GridSpec& spec,
                  const CorrectnessMap& corr, PayloadPool& pool)
      : strategy_(strategy), spec_(spec), corr_(corr), pool_(pool) {}

  std::vector<RawSend> opening_batch() {
    opened_ = true;
    std::vector<RawSend> out;
    switch (strategy_.kind) {
      case AdversaryStrategy::Kind::Silent:
        break;
      case AdversaryStrategy::Kind::SpoofSource:
        spoof(out);
        break;
      case AdversaryStrategy::Kind::VoteForgery:
        forge_votes(out);
        break;
      case AdversaryStrategy::Kind::RandomNoise:
        noise(out);
        break;
      case AdversaryStrategy::Kind::Scripted:
        for (const ScriptedEvent& ev : strategy_.script) {
          out.push_back({ev.sender, ev.receiver, pool_.intern(ev.payload)});
        }
        break;
    }
    return out;
  }

  size_t remaining() const { return opened_ ? 0 : pending_count(); }

 private:
  size_t pending_count() const {
    if (strategy_.kind == AdversaryStrategy::Kind::Scripted) {
      return strategy_.script.size();
    }
    return strategy_.kind == AdversaryStrategy::Kind::Silent ? 0 : 1;
  }

  // forged path copies claiming the configured source broadcast m'
  void spoof(std::vector<RawSend>& out) {
    const uint32_t forged = pool_.intern(encode_copy(
        strategy_.fake_source, {}, encode_user(strategy_.forged_payload)));
    for (NodeId b : corr_.byzantine_nodes()) {
      for (NodeId w : neighbors(b, spec_.side())) {
        out.push_back({b, w, forged});
      }
    }
  }

  // forged border votes for a fabricated macro-channel payload that would,
  // if accepted, deliver (fake_source, m') cluster-wide
  void forge_votes(std::vector<RawSend>& out) {
    if (spec_.k < 2) {
      // no macro channels; emit vote-framed copies as protocol noise
      const uint32_t noise = pool_.intern(encode_copy(
          strategy_.fake_source, {},
          encode_vote(strategy_.fake_source, NodeId{0, 0},
                      encode_user(strategy_.forged_payload))));
      for (NodeId b : corr_.byzantine_nodes()) {
        for (NodeId w : neighbors(b, spec_.side())) {
          out.push_back({b, w, noise});
        }
      }
      return;
    }
    const int macro_side = spec_.macro_side(1);
    for (NodeId b : corr_.byzantine_nodes()) {
      const NodeId q{b.i / spec_.n, b.j / spec_.n};
      for (int d = 0; d < 4; ++d) {
        const NodeId target = dir_step(q, d);
        if (!in_grid(target, macro_side)) continue;
        if (strategy_.target_cluster != NodeId{-1, -1} &&
            strategy_.target_cluster != target) {
          continue;
        }
        // fabricated top-level copy: cluster `target` claims its origin node
        // broadcast the forged payload
        const NodeId origin{target.i * spec_.n, target.j * spec_.n};
        std::string inner = encode_user(strategy_.forged_payload);
        NodeId wrap = origin;
        for (int level = 1; level < spec_.k; ++level) {
          inner = encode_bcast(wrap, inner);
          wrap = NodeId{origin.i, origin.j};
          int block = 1;
          for (int l = 0; l < level; ++l) block *= spec_.n;
          wrap = NodeId{origin.i / block, origin.j / block};
        }
        const std::string forged_channel_payload =
            encode_copy(target, {}, inner);
        for (NodeId v : border_rect(q, target, spec_.n)) {
          const uint32_t vote_copy = pool_.intern(encode_copy(
              v, {}, encode_vote(v, target, forged_channel_payload)));
          for (NodeId w : neighbors(b, spec_.side())) {
            out.push_back({b, w, vote_copy});
          }
        }
      }
    }
  }

  void noise(std::vector<RawSend>& out) {
    for (NodeId b : corr_.byzantine_nodes()) {
      std::mt19937_64 rng(strategy_.seed ^
                          (0x9e3779b97f4a7c15ull *
                           (node_index(b, spec_.side()) + 1)));
      const auto nbrs = neighbors(b, spec_.side());
      std::uniform_int_distribution<size_t> pick(0, nbrs.size() - 1);
      std::uniform_int_distribution<int> len(1, 48);
      std::uniform_int_distribution<int> byte(0, 255);
      for (int t = 0; t < strategy_.noise_budget; ++t) {
        std::string bytes(static_cast<size_t>(len(rng)), '\0');
        for (char& c : bytes) c = static_cast<char>(byte(rng));
        out.push_back({b, nbrs[pick(rng)], pool_.intern(bytes)});
      }
    }
  }

  const AdversaryStrategy& strategy_;
  const GridSpec& spec_;
  const CorrectnessMap& corr_;
  PayloadPool& pool_;
  bool opened_ = false;
};

}  // namespace

bool quiescent(size_t pending_envelopes, size_t adversary_remaining) {
  return pending_envelopes == 0 && adversary_remaining == 0;
}

Trace run(const GridSpec& spec, const CorrectnessMap& corr,
          const AdversaryStrategy& adversary, const Schedule& schedule,
          const std::vector<std::pair<NodeId, std::string>>& broadcasts,
          const RunOptions& options) {
  if (corr.side() != spec.side()) {
    throw std::invalid_argument("correctness map does not match grid");
  }

  Trace trace;
  trace.n = spec.n;
  trace.k = spec.k;
  trace.seed = schedule.seed;
  trace.policy = schedule.policy;
  trace.forward_cap = options.forward_cap;
  trace.corr = corr;
  trace.pool = std::make_shared<PayloadPool>();
  PayloadPool& pool = *trace.pool;

  const int side = spec.side();
  std::vector<std::unique_ptr<NodeRuntime>> runtimes(
      static_cast<size_t>(corr.node_count()));
  for (NodeId v : corr.correct_nodes()) {
    runtimes[node_index(v, side)] =
        std::make_unique<NodeRuntime>(spec, v, options.forward_cap);
  }

  Scheduler sched(schedule, corr);
  uint64_t seq = 0;
  uint64_t tick = 0;

  auto enqueue = [&](NodeId sender, NodeId receiver, uint32_t payload,
                     uint64_t parent) {
    if (!in_grid(receiver, side) || !adjacent(sender, receiver)) {
      throw std::invalid_argument("send outside the sender's channels: " +
                                  to_string(sender) + " -> " +
                                  to_string(receiver));
    }
    sched.push(Envelope{sender, receiver, payload, tick, seq++, parent});
  };

  auto flush_outbox = [&](NodeId at, const NodeOutbox& out, uint64_t parent) {
    for (const auto& [dest, payload] : out.sends) {
      enqueue(at, dest, payload, parent);
    }
    for (const auto& [src, payload] : out.accepts) {
      trace.accepts.push_back({tick, at, src, payload});
    }
  };

  for (const auto& [source, message] : broadcasts) {
    if (!corr.is_correct(source)) {
      throw std::invalid_argument("broadcast origin " + to_string(source) +
                                  " is Byzantine");
    }
    NodeOutbox out;
    runtimes[node_index(source, side)]->user_broadcast(message, pool, out);
    flush_outbox(source, out, Envelope::kNoParent);
  }

  AdversaryEngine adv(adversary, spec, corr, pool);
  for (const RawSend& s : adv.opening_batch()) {
    if (corr.is_correct(s.sender)) {
      throw std::invalid_argument("adversary send from correct node " +
                                  to_string(s.sender));
    }
    enqueue(s.sender, s.receiver, s.payload, Envelope::kNoParent);
  }

  while (!quiescent(sched.size(), adv.remaining())) {
    if (trace.delivered >= options.event_budget) {
      trace.truncated = true;
      break;
    }
    const Envelope e = sched.pop();
    ++tick;
    ++trace.delivered;
    if (options.record_deliveries) {
      trace.deliveries.push_back(
          {e.seq, tick, e.sender, e.receiver, e.payload, e.parent});
    }
    auto& runtime = runtimes[node_index(e.receiver, side)];
    if (!runtime) continue;  // Byzantine receiver swallows the message
    NodeOutbox out;
    runtime->deliver_physical(e.sender, e.payload, pool, out);
    flush_outbox(e.receiver, out, e.seq);
  }

  for (NodeId v : corr.correct_nodes()) {
    const auto& runtime = runtimes[node_index(v, side)];
    for (const auto& [skey, payload] : runtime->accepted_pairs()) {
      trace.final_accepted.push_back(FinalAccept{
          v, node_at(static_cast<long long>(skey), side), pool.bytes(payload)});
    }
  }
  std::sort(trace.final_accepted.begin(), trace.final_accepted.end());
  return trace;
}

std::vector<FinalAccept> replay(const Trace& trace,
                                const std::vector<size_t>& permutation) {
  const size_t m = trace.deliveries.size();
  if (permutation.size() != m) {
    throw std::invalid_argument("permutation size mismatch");
  }
  std::vector<uint8_t> seen(m, 0);
  std::unordered_map<uint64_t, size_t> pos_of_seq;
  pos_of_seq.reserve(m);
  for (size_t p = 0; p < m; ++p) {
    const size_t idx = permutation[p];
    if (idx >= m || seen[idx]) {
      throw std::invalid_argument("permutation is not a bijection");
    }
    seen[idx] = 1;
    pos_of_seq[trace.deliveries[idx].seq] = p;
  }
  for (size_t p = 0; p < m; ++p) {
    const auto& d = trace.deliveries[permutation[p]];
    if (d.parent == Envelope::kNoParent) continue;
    auto it = pos_of_seq.find(d.parent);
    if (it == pos_of_seq.end() || it->second >= p) {
      throw std::invalid_argument(
          "permutation delivers a message before its cause");
    }
  }

  const GridSpec spec(trace.n, trace.k);
  const int side = spec.side();
  PayloadPool& pool = *trace.pool;
  std::vector<std::unique_ptr<NodeRuntime>> runtimes(
      static_cast<size_t>(trace.corr.node_count()));
  for (NodeId v : trace.corr.correct_nodes()) {
    runtimes[node_index(v, side)] =
        std::make_unique<NodeRuntime>(spec, v, trace.forward_cap);
  }

  for (size_t p = 0; p < m; ++p) {
    const auto& d = trace.deliveries[permutation[p]];
    auto& runtime = runtimes[node_index(d.receiver, side)];
    if (!runtime) continue;
    NodeOutbox out;  // regenerated sends are already part of the trace
    runtime->deliver_physical(d.sender, d.payload, pool, out);
  }

  std::vector<FinalAccept> final_accepted;
  for (NodeId v : trace.corr.correct_nodes()) {
    const auto& runtime = runtimes[node_index(v, side)];
    for (const auto& [skey, payload] : runtime->accepted_pairs()) {
      final_accepted.push_back(FinalAccept{
          v, node_at(static_cast<long long>(skey), side), pool.bytes(payload)});
    }
  }
  std::sort(final_accepted.begin(), final_accepted.end());
  return final_accepted;
}

std::vector<size_t> random_causal_permutation(const Trace& trace,
                                              std::mt19937_64& rng) {
  const size_t m = trace.deliveries.size();
  std::unordered_map<uint64_t, std::vector<size_t>> children;
  std::vector<size_t> ready;
  for (size_t idx = 0; idx < m; ++idx) {
    const auto& d = trace.deliveries[idx];
    if (d.parent == Envelope::kNoParent) {
      ready.push_back(idx);
    } else {
      children[d.parent].push_back(idx);
    }
  }
  std::vector<size_t> out;
  out.reserve(m);
  while (!ready.empty()) {
    std::uniform_int_distribution<size_t> pick(0, ready.size() - 1);
    const size_t at = pick(rng);
    const size_t idx = ready[at];
    ready[at] = ready.back();
    ready.pop_back();
    out.push_back(idx);
    auto it = children.find(trace.deliveries[idx].seq);
    if (it != children.end()) {
      for (size_t c : it->second) ready.push_back(c);
    }
  }
  if (out.size() != m) {
    throw std::logic_error("trace causality graph is not a forest");
  }
  return out;
}

namespace {

const char* policy_name(SchedulePolicy p) {
  switch (p) {
    case SchedulePolicy::Fifo: return "fifo";
    case SchedulePolicy::UniformRandom: return "uniform-random";
    case SchedulePolicy::AdversarialDelay: return "adversarial-delay";
  }
  return "?";
}

std::string printable(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (char c : bytes) out += (c >= 0x20 && c < 0x7f) ? c : '?';
  return out;
}

}  // namespace

void export_trace_jsonl(const Trace& trace, std::ostream& out) {
  ordered_json header;
  header["type"] = "run";
  header["n"] = trace.n;
  header["k"] = trace.k;
  header["seed"] = trace.seed;
  header["schedule"] = policy_name(trace.policy);
  header["forward_cap"] = trace.forward_cap;
  header["delivered"] = trace.delivered;
  header["truncated"] = trace.truncated;
  header["byzantine"] = trace.corr.byzantine_count();
  out << header.dump() << "\n";

  for (const auto& d : trace.deliveries) {
    ordered_json rec;
    rec["type"] = "delivery";
    rec["tick"] = d.tick;
    rec["seq"] = d.seq;
    rec["from"] = {d.sender.i, d.sender.j};
    rec["to"] = {d.receiver.i, d.receiver.j};
    if (d.parent != Envelope::kNoParent) rec["parent"] = d.parent;
    rec["payload"] = describe_payload(trace.pool->bytes(d.payload));
    out << rec.dump() << "\n";
  }
  for (const auto& a : trace.accepts) {
    ordered_json rec;
    rec["type"] = "accept";
    rec["tick"] = a.tick;
    rec["node"] = {a.node.i, a.node.j};
    rec["source"] = {a.source.i, a.source.j};
    rec["payload"] = printable(trace.pool->bytes(a.payload));
    out << rec.dump() << "\n";
  }
  ordered_json fin;
  fin["type"] = "final";
  fin["accept_count"] = trace.final_accepted.size();
  out << fin.dump() << "\n";
}

}  // namespace gridcast
