#include "gridcast/messages.hpp"

#include <cstring>

namespace gridcast {

namespace {

void put_u32(std::string& out, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_i32(std::string& out, int32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

struct Reader {
  std::string_view data;
  size_t pos = 0;

  bool take_u32(uint32_t& v) {
    if (pos + 4 > data.size()) return false;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return true;
  }
  bool take_i32(int32_t& v) {
    if (pos + 4 > data.size()) return false;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return true;
  }
  bool take_node(NodeId& v) {
    int32_t i, j;
    if (!take_i32(i) || !take_i32(j)) return false;
    v = NodeId{i, j};
    return true;
  }
  bool take_bytes(std::string_view& out) {
    uint32_t len;
    if (!take_u32(len)) return false;
    if (pos + len > data.size()) return false;
    out = data.substr(pos, len);
    pos += len;
    return true;
  }
  bool at_end() const { return pos == data.size(); }
};

}  // namespace

std::string encode_user(std::string_view bytes) {
  std::string out;
  out.reserve(5 + bytes.size());
  out.push_back('U');
  put_u32(out, static_cast<uint32_t>(bytes.size()));
  out.append(bytes);
  return out;
}

std::string encode_bcast(NodeId source, std::string_view inner) {
  std::string out;
  out.reserve(13 + inner.size());
  out.push_back('B');
  put_i32(out, source.i);
  put_i32(out, source.j);
  put_u32(out, static_cast<uint32_t>(inner.size()));
  out.append(inner);
  return out;
}

std::string encode_vote(NodeId voter, NodeId from_cluster,
                        std::string_view inner) {
  std::string out;
  out.reserve(21 + inner.size());
  out.push_back('V');
  put_i32(out, voter.i);
  put_i32(out, voter.j);
  put_i32(out, from_cluster.i);
  put_i32(out, from_cluster.j);
  put_u32(out, static_cast<uint32_t>(inner.size()));
  out.append(inner);
  return out;
}

std::string encode_copy(NodeId source, const std::vector<NodeId>& path,
                        std::string_view inner) {
  std::string out;
  out.reserve(17 + 8 * path.size() + inner.size());
  out.push_back('C');
  put_i32(out, source.i);
  put_i32(out, source.j);
  put_u32(out, static_cast<uint32_t>(path.size()));
  for (NodeId v : path) {
    put_i32(out, v.i);
    put_i32(out, v.j);
  }
  put_u32(out, static_cast<uint32_t>(inner.size()));
  out.append(inner);
  return out;
}

std::optional<FrameKind> frame_kind(std::string_view bytes) {
  if (bytes.empty()) return std::nullopt;
  switch (bytes.front()) {
    case 'U': return FrameKind::User;
    case 'B': return FrameKind::Bcast;
    case 'V': return FrameKind::Vote;
    case 'C': return FrameKind::Copy;
    default: return std::nullopt;
  }
}

std::optional<CopyFrame> decode_copy(std::string_view bytes) {
  if (bytes.empty() || bytes.front() != 'C') return std::nullopt;
  Reader r{bytes, 1};
  CopyFrame f;
  if (!r.take_node(f.source)) return std::nullopt;
  uint32_t plen;
  if (!r.take_u32(plen)) return std::nullopt;
  if (plen > (bytes.size() - r.pos) / 8) return std::nullopt;
  f.path.resize(plen);
  for (uint32_t t = 0; t < plen; ++t) {
    if (!r.take_node(f.path[t])) return std::nullopt;
  }
  if (!r.take_bytes(f.inner) || !r.at_end()) return std::nullopt;
  return f;
}

std::optional<VoteFrame> decode_vote(std::string_view bytes) {
  if (bytes.empty() || bytes.front() != 'V') return std::nullopt;
  Reader r{bytes, 1};
  VoteFrame f;
  if (!r.take_node(f.voter)) return std::nullopt;
  if (!r.take_node(f.from_cluster)) return std::nullopt;
  if (!r.take_bytes(f.inner) || !r.at_end()) return std::nullopt;
  return f;
}

std::optional<BcastFrame> decode_bcast(std::string_view bytes) {
  if (bytes.empty() || bytes.front() != 'B') return std::nullopt;
  Reader r{bytes, 1};
  BcastFrame f;
  if (!r.take_node(f.source)) return std::nullopt;
  if (!r.take_bytes(f.inner) || !r.at_end()) return std::nullopt;
  return f;
}

std::optional<std::string_view> decode_user(std::string_view bytes) {
  if (bytes.empty() || bytes.front() != 'U') return std::nullopt;
  Reader r{bytes, 1};
  std::string_view out;
  if (!r.take_bytes(out) || !r.at_end()) return std::nullopt;
  return out;
}

std::optional<BcastChain> decode_bcast_chain(std::string_view bytes) {
  BcastChain chain;
  std::string_view cur = bytes;
  while (true) {
    auto kind = frame_kind(cur);
    if (!kind) return std::nullopt;
    if (*kind == FrameKind::User) {
      auto user = decode_user(cur);
      if (!user) return std::nullopt;
      chain.user_bytes = *user;
      return chain;
    }
    if (*kind != FrameKind::Bcast) return std::nullopt;
    auto b = decode_bcast(cur);
    if (!b) return std::nullopt;
    chain.wrap_sources.push_back(b->source);
    cur = b->inner;
    if (chain.wrap_sources.size() > 64) return std::nullopt;  // absurd nesting
  }
}

std::string describe_payload(std::string_view bytes) {
  auto kind = frame_kind(bytes);
  if (!kind) return "garbage[" + std::to_string(bytes.size()) + "B]";
  switch (*kind) {
    case FrameKind::User: {
      auto u = decode_user(bytes);
      if (!u) return "garbage";
      std::string body;
      for (char c : *u) {
        body += (c >= 0x20 && c < 0x7f) ? c : '?';
      }
      return "msg:" + body;
    }
    case FrameKind::Bcast: {
      auto b = decode_bcast(bytes);
      if (!b) return "garbage";
      return "bcast{src=" + to_string(b->source) + " " +
             describe_payload(b->inner) + "}";
    }
    case FrameKind::Vote: {
      auto v = decode_vote(bytes);
      if (!v) return "garbage";
      return "vote{by=" + to_string(v->voter) + " from=" +
             to_string(v->from_cluster) + " " + describe_payload(v->inner) + "}";
    }
    case FrameKind::Copy: {
      auto c = decode_copy(bytes);
      if (!c) return "garbage";
      std::string p;
      for (NodeId v : c->path) p += to_string(v);
      return "copy{src=" + to_string(c->source) + " path=[" + p + "] " +
             describe_payload(c->inner) + "}";
    }
  }
  return "garbage";
}

uint32_t PayloadPool::intern(std::string_view bytes) {
  auto it = index_.find(bytes);
  if (it != index_.end()) return it->second;
  store_.emplace_back(bytes);
  uint32_t id = static_cast<uint32_t>(store_.size() - 1);
  index_.emplace(std::string_view(store_.back()), id);
  return id;
}

}  // namespace gridcast
