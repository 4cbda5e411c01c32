#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridcast/grid.hpp"

namespace gridcast {

// Wire alphabet. Every message is a byte string; the four frames below nest:
//   user    'U' <bytes>                      original broadcast payload
//   bcast   'B' <src> <inner>                one level of macroscopic wrapping
//   vote    'V' <voter> <from> <inner>       border vote for a macro-channel
//   copy    'C' <src> <path> <inner>         relayed path copy
// Frames carry explicit lengths; anything that fails to parse is dropped as
// Byzantine-supplied garbage.
enum class FrameKind : uint8_t { User, Bcast, Vote, Copy };

struct CopyFrame {
  NodeId source;
  std::vector<NodeId> path;  // relayers, excluding source and holder
  std::string_view inner;
};

struct VoteFrame {
  NodeId voter;
  NodeId from_cluster;  // claimed macro-neighbor the payload arrived from
  std::string_view inner;
};

struct BcastFrame {
  NodeId source;
  std::string_view inner;
};

std::string encode_user(std::string_view bytes);
std::string encode_bcast(NodeId source, std::string_view inner);
std::string encode_vote(NodeId voter, NodeId from_cluster, std::string_view inner);
std::string encode_copy(NodeId source, const std::vector<NodeId>& path,
                        std::string_view inner);

std::optional<FrameKind> frame_kind(std::string_view bytes);
std::optional<CopyFrame> decode_copy(std::string_view bytes);
std::optional<VoteFrame> decode_vote(std::string_view bytes);
std::optional<BcastFrame> decode_bcast(std::string_view bytes);
std::optional<std::string_view> decode_user(std::string_view bytes);

// Unwraps nested bcast frames down to the user payload. Returns the wrap
// sources outermost-first and the innermost user bytes, or nullopt if the
// chain is malformed.
struct BcastChain {
  std::vector<NodeId> wrap_sources;
  std::string_view user_bytes;
};
std::optional<BcastChain> decode_bcast_chain(std::string_view bytes);

// Human-readable rendering for traces and debugging.
std::string describe_payload(std::string_view bytes);

// Deduplicating payload store. Ids are dense and assigned in first-seen
// order, so identical runs produce identical ids.
class PayloadPool {
 public:
  uint32_t intern(std::string_view bytes);
  const std::string& bytes(uint32_t id) const { return store_[id]; }
  size_t size() const { return store_.size(); }

 private:
  std::deque<std::string> store_;  // stable addresses for the index views
  std::unordered_map<std::string_view, uint32_t> index_;
};

}  // namespace gridcast
