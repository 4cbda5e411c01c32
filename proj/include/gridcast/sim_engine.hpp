#pragma once

#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gridcast/correctness.hpp"
#include "gridcast/fractal_protocol.hpp"
#include "gridcast/grid.hpp"
#include "gridcast/messages.hpp"

namespace gridcast {

// One in-flight message on a physical channel. Sender and receiver are always
// physical neighbors; the receiver learns the sender from the channel.
struct Envelope {
  NodeId sender;
  NodeId receiver;
  uint32_t payload = 0;
  uint64_t enqueue_tick = 0;
  uint64_t seq = 0;
  uint64_t parent = kNoParent;  // seq of the delivery that triggered this send

  static constexpr uint64_t kNoParent = ~uint64_t{0};
};

enum class SchedulePolicy { Fifo, UniformRandom, AdversarialDelay };

struct Schedule {
  SchedulePolicy policy = SchedulePolicy::Fifo;
  uint64_t seed = 0;
};

struct ScriptedEvent {
  NodeId sender;
  NodeId receiver;
  std::string payload;
};

struct AdversaryStrategy {
  enum class Kind { Silent, SpoofSource, VoteForgery, RandomNoise, Scripted };

  Kind kind = Kind::Silent;
  // SpoofSource / VoteForgery
  NodeId fake_source{};
  std::string forged_payload;
  // VoteForgery: impersonated macro-neighbor; (-1,-1) forges toward all
  NodeId target_cluster{-1, -1};
  // RandomNoise
  uint64_t seed = 0;
  int noise_budget = 32;
  // Scripted
  std::vector<ScriptedEvent> script;
};

struct DeliveryRecord {
  uint64_t seq = 0;
  uint64_t tick = 0;
  NodeId sender;
  NodeId receiver;
  uint32_t payload = 0;
  uint64_t parent = Envelope::kNoParent;
};

struct AcceptRecord {
  uint64_t tick = 0;
  NodeId node;
  NodeId source;
  uint32_t payload = 0;  // user bytes id
};

struct FinalAccept {
  NodeId node;
  NodeId source;
  std::string payload;  // user bytes

  auto operator<=>(const FinalAccept&) const = default;
};

struct Trace {
  int n = 0;
  int k = 0;
  uint64_t seed = 0;
  SchedulePolicy policy = SchedulePolicy::Fifo;
  int forward_cap = kDefaultForwardCap;
  bool truncated = false;
  uint64_t delivered = 0;
  CorrectnessMap corr;
  std::vector<DeliveryRecord> deliveries;  // captured iff record_deliveries
  std::vector<AcceptRecord> accepts;
  std::vector<FinalAccept> final_accepted;  // sorted, correct nodes only
  std::shared_ptr<PayloadPool> pool;
};

struct RunOptions {
  uint64_t event_budget = 100'000'000;
  bool record_deliveries = true;
  int forward_cap = kDefaultForwardCap;
};

// Runs the protocol to quiescence under the given schedule and adversary.
// Deterministic: identical arguments produce a bitwise-identical trace.
// Broadcasts must originate at correct nodes.
Trace run(const GridSpec& spec, const CorrectnessMap& corr,
          const AdversaryStrategy& adversary, const Schedule& schedule,
          const std::vector<std::pair<NodeId, std::string>>& broadcasts,
          const RunOptions& options = {});

// No pending deliveries and no adversary events left.
bool quiescent(size_t pending_envelopes, size_t adversary_remaining);

// Re-delivers a captured trace in a different order and returns the final
// accepted sets. The permutation must order every delivery after the delivery
// that caused it; anything else throws std::invalid_argument.
std::vector<FinalAccept> replay(const Trace& trace,
                                const std::vector<size_t>& permutation);

// Uniformly random linear extension of the trace's causal order.
std::vector<size_t> random_causal_permutation(const Trace& trace,
                                              std::mt19937_64& rng);

// Line-delimited records, one JSON object per line, stable field order.
void export_trace_jsonl(const Trace& trace, std::ostream& out);

}  // namespace gridcast
