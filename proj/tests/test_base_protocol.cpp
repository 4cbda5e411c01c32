#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gridcast/base_protocol.hpp"
#include "gridcast/correctness.hpp"

using namespace gridcast;

namespace {

// ---------------------------------------------------------------------------
// Test-side oracles, kept independent of the library's flow/bicomp route.
// ---------------------------------------------------------------------------

bool connected_avoiding(const CorrectnessMap& corr, NodeId from, NodeId to,
                        NodeId removed) {
  const int side = corr.side();
  std::set<NodeId> seen{from};
  std::vector<NodeId> queue{from};
  while (!queue.empty()) {
    const NodeId v = queue.back();
    queue.pop_back();
    if (v == to) return true;
    for (NodeId w : neighbors(v, side)) {
      if (w == removed || seen.count(w)) continue;
      if (w != to && !corr.is_correct(w)) continue;
      seen.insert(w);
      queue.push_back(w);
    }
  }
  return false;
}

// Menger via single-vertex removal: two internally node-disjoint all-correct
// paths exist iff no single correct vertex separates the pair.
bool oracle_pair_live(const CorrectnessMap& corr, NodeId a, NodeId b) {
  if (a == b) return true;
  if (adjacent(a, b)) return true;
  if (!connected_avoiding(corr, a, b, NodeId{-9, -9})) return false;
  for (NodeId v : corr.correct_nodes()) {
    if (v == a || v == b) continue;
    if (!connected_avoiding(corr, a, b, v)) return false;
  }
  return true;
}

// Forgery oracle: a correct node u is forgeable iff copies rooted at two
// distinct Byzantine nodes can reach it over node-disjoint correct relays.
// Menger again, on the graph with a virtual source over all Byzantine nodes.
bool oracle_forgeable(const CorrectnessMap& corr, NodeId u) {
  const int side = corr.side();
  const auto byz = corr.byzantine_nodes();
  if (byz.size() < 2) return false;

  auto reaches = [&](NodeId removed) {
    std::set<NodeId> seen;
    std::vector<NodeId> queue;
    for (NodeId b : byz) {
      if (b == removed) continue;
      seen.insert(b);
      queue.push_back(b);
    }
    while (!queue.empty()) {
      const NodeId v = queue.back();
      queue.pop_back();
      for (NodeId w : neighbors(v, side)) {
        if (w == u) return true;
        if (w == removed || seen.count(w)) continue;
        if (!corr.is_correct(w)) continue;  // relays are correct
        seen.insert(w);
        queue.push_back(w);
      }
    }
    return false;
  };

  if (!reaches(NodeId{-9, -9})) return false;
  for (NodeId b : byz) {
    if (!reaches(b)) return false;  // all routes share one Byzantine root
  }
  for (NodeId v : corr.correct_nodes()) {
    if (v == u) continue;
    if (!reaches(v)) return false;  // a single correct relay carries everything
  }
  return true;
}

// simple driver: floods one replica network synchronously (FIFO) without the
// full engine; used for protocol-local semantics
struct MiniNet {
  int side;
  int cap;
  PayloadPool pool;
  std::vector<BaseReplica> replicas;
  std::vector<std::pair<NodeId, std::pair<NodeId, uint32_t>>> queue;  // (to, (from, payload))
  std::map<NodeId, std::set<std::pair<NodeId, uint32_t>>> accepted;

  explicit MiniNet(int side_, int cap_ = kDefaultForwardCap)
      : side(side_), cap(cap_) {
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        replicas.emplace_back(ClusterRect{{0, 0}, side}, NodeId{i, j}, cap);
      }
    }
  }

  BaseReplica& at(NodeId v) { return replicas[node_index(v, side)]; }

  void drain(const std::set<NodeId>& byzantine = {}) {
    while (!queue.empty()) {
      auto [to, fp] = queue.front();
      queue.erase(queue.begin());
      if (byzantine.count(to)) continue;
      ReplicaOutbox out;
      at(to).deliver(fp.first, fp.second, pool, out);
      for (auto& [dest, id] : out.sends) queue.push_back({dest, {to, id}});
      for (auto& [src, id] : out.accepts) accepted[to].insert({src, id});
    }
  }

  uint32_t broadcast(NodeId s, const std::string& m) {
    const uint32_t id = pool.intern(encode_user(m));
    ReplicaOutbox out;
    at(s).initiate_broadcast(id, pool, out);
    for (auto& [dest, cid] : out.sends) queue.push_back({dest, {s, cid}});
    for (auto& [src, aid] : out.accepts) accepted[s].insert({src, aid});
    return id;
  }
};

}  // namespace

TEST_CASE("direct neighbor accepts immediately") {
  MiniNet net(4);
  const uint32_t m = net.pool.intern(encode_user("hello"));
  const uint32_t copy = net.pool.intern(
      encode_copy(NodeId{0, 0}, {}, net.pool.bytes(m)));
  ReplicaOutbox out;
  net.at({0, 1}).deliver({0, 0}, copy, net.pool, out);
  REQUIRE(out.accepts.size() == 1);
  CHECK(out.accepts[0].first == NodeId{0, 0});
  CHECK(net.at({0, 1}).has_accepted({0, 0}, m));
}

TEST_CASE("two disjoint recorded copies accept, shared relays do not") {
  MiniNet net(4);
  const uint32_t m = net.pool.intern(encode_user("x"));
  const std::string& mb = net.pool.bytes(m);
  // receiver (2,2); source (0,0) is not adjacent
  auto copy_via = [&](std::vector<NodeId> path, NodeId last_hop) {
    // wire path excludes the sending relay; receiver appends it
    return net.pool.intern(encode_copy(NodeId{0, 0}, path, mb));
  };
  ReplicaOutbox out;
  // path {(0,1),(1,1)} delivered by (2,1): records {(0,1),(1,1),(2,1)}
  net.at({2, 2}).deliver({2, 1}, copy_via({{0, 1}, {1, 1}}, {2, 1}), net.pool,
                         out);
  CHECK(out.accepts.empty());
  // shares (0,1): no acceptance
  net.at({2, 2}).deliver({1, 2}, copy_via({{0, 1}}, {1, 2}), net.pool, out);
  CHECK(out.accepts.empty());
  CHECK_FALSE(net.at({2, 2}).has_accepted({0, 0}, m));
  // disjoint second route {(1,0),(2,0)} via (2,1)? (2,1) already recorded ->
  // use column route delivered by (1,2): {(1,0),(2,0)} is not adjacent to
  // (1,2); build a plausible disjoint path instead: {(0,1)... no — use
  // {(1,0),(2,0),(2,1)}? (2,1) collides. Take {(0,2)} via (1,2):
  // {(0,2),(1,2)} vs {(0,1),(1,1),(2,1)}: disjoint -> accept
  net.at({2, 2}).deliver({1, 2}, copy_via({{0, 2}}, {1, 2}), net.pool, out);
  REQUIRE(out.accepts.size() == 1);
  CHECK(net.at({2, 2}).has_accepted({0, 0}, m));
}

TEST_CASE("path invariant violations are dropped") {
  MiniNet net(4);
  const uint32_t m = net.pool.intern(encode_user("x"));
  const std::string& mb = net.pool.bytes(m);
  ReplicaOutbox out;
  // duplicate in path
  net.at({2, 2}).deliver(
      {2, 1}, net.pool.intern(encode_copy({0, 0}, {{0, 1}, {0, 1}}, mb)),
      net.pool, out);
  // holder in path
  net.at({2, 2}).deliver(
      {2, 1}, net.pool.intern(encode_copy({0, 0}, {{2, 2}}, mb)), net.pool,
      out);
  // source in path
  net.at({2, 2}).deliver(
      {2, 1}, net.pool.intern(encode_copy({0, 0}, {{0, 0}}, mb)), net.pool,
      out);
  // out-of-grid path entry
  net.at({2, 2}).deliver(
      {2, 1}, net.pool.intern(encode_copy({0, 0}, {{7, 7}}, mb)), net.pool,
      out);
  // out-of-grid source
  net.at({2, 2}).deliver(
      {2, 1}, net.pool.intern(encode_copy({9, 9}, {}, mb)), net.pool, out);
  // garbage bytes
  net.at({2, 2}).deliver({2, 1}, net.pool.intern("junk"), net.pool, out);
  CHECK(out.accepts.empty());
  CHECK(out.sends.empty());
  CHECK_FALSE(net.at({2, 2}).has_accepted({0, 0}, m));
}

TEST_CASE("failure-free flood reaches everyone") {
  for (int side : {4, 10}) {
    MiniNet net(side);
    const uint32_t m = net.broadcast({0, 0}, "boom");
    net.drain();
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        CAPTURE(side);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(net.at({i, j}).has_accepted({0, 0}, m));
      }
    }
  }
}

TEST_CASE("acceptance matches brute-force disjoint-pair predicate on 4x4") {
  // every pair (s, r) in the all-correct 4x4 grid must accept: the grid is
  // 2-connected, so adjacency or two disjoint relay routes always exist
  MiniNet net(4);
  std::vector<uint32_t> ids;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      ids.push_back(net.broadcast({i, j}, "p" + std::to_string(i * 4 + j)));
    }
  }
  net.drain();
  for (int s = 0; s < 16; ++s) {
    for (int r = 0; r < 16; ++r) {
      CHECK(net.at(node_at(r, 4)).has_accepted(node_at(s, 4), ids[s]));
    }
  }
}

TEST_CASE("rel_base trivia") {
  CorrectnessMap all(10);
  const ReliableSet full = rel_base(all);
  CHECK(full.members.size() == 100);
  CHECK(full.fraction == 1.0);

  CorrectnessMap none(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) none.set_byzantine({i, j});
  }
  CHECK(rel_base(none).members.empty());
}

TEST_CASE("single-Byzantine enumeration: frozen histogram and Def 3") {
  std::map<size_t, int> histogram;
  long long total = 0;
  for (int bi = 0; bi < 10; ++bi) {
    for (int bj = 0; bj < 10; ++bj) {
      CorrectnessMap corr(10);
      corr.set_byzantine({bi, bj});
      const ReliableSet rel = rel_base(corr);
      ++histogram[rel.members.size()];
      total += static_cast<long long>(rel.members.size());
      CAPTURE(bi);
      CAPTURE(bj);
      CHECK(is_correct_macro(corr));
      // members stay correct
      for (NodeId v : rel.members) CHECK(corr.is_correct(v));
    }
  }
  // this protocol loses one extra node only when the failure pins a corner
  CHECK(histogram == std::map<size_t, int>{{98, 8}, {99, 92}});
  CHECK(total == 9892);
}

TEST_CASE("rel_base members verified against the Menger oracle") {
  // sampled placements; every returned pair must satisfy the liveness
  // condition and no member may be forgeable
  std::mt19937_64 rng(7);
  std::vector<CorrectnessMap> cases;
  for (NodeId b : {NodeId{0, 1}, NodeId{4, 4}, NodeId{9, 9}}) {
    CorrectnessMap corr(10);
    corr.set_byzantine(b);
    cases.push_back(corr);
  }
  {
    CorrectnessMap corr(10);
    corr.set_byzantine({2, 3});
    corr.set_byzantine({7, 6});
    cases.push_back(corr);
  }
  for (int t = 0; t < 3; ++t) {
    CorrectnessMap corr(6);
    for (int b = 0; b < 3; ++b) {
      corr.set_byzantine(node_at(
          std::uniform_int_distribution<long long>(0, 35)(rng), 6));
    }
    cases.push_back(corr);
  }

  for (const CorrectnessMap& corr : cases) {
    const ReliableSet rel = rel_base(corr);
    for (NodeId u : rel.members) {
      CHECK_FALSE(oracle_forgeable(corr, u));
    }
    for (size_t a = 0; a < rel.members.size(); ++a) {
      for (size_t b = a + 1; b < rel.members.size(); ++b) {
        CAPTURE(rel.members[a]);
        CAPTURE(rel.members[b]);
        CHECK(oracle_pair_live(corr, rel.members[a], rel.members[b]));
      }
    }
  }
}

TEST_CASE("pair_live agrees with the vertex-removal oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    CorrectnessMap corr(5);
    const int byz = trial % 4;
    for (int b = 0; b < byz; ++b) {
      corr.set_byzantine(
          node_at(std::uniform_int_distribution<long long>(0, 24)(rng), 5));
    }
    const auto correct = corr.correct_nodes();
    for (size_t a = 0; a < correct.size(); a += 3) {
      for (size_t b = a + 1; b < correct.size(); b += 2) {
        CAPTURE(correct[a]);
        CAPTURE(correct[b]);
        CHECK(pair_live(corr, correct[a], correct[b]) ==
              oracle_pair_live(corr, correct[a], correct[b]));
      }
    }
  }
}

TEST_CASE("forgeable_nodes agrees with the rooted Menger oracle") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 6; ++trial) {
    CorrectnessMap corr(5);
    const int byz = 2 + trial % 2;
    for (int b = 0; b < byz; ++b) {
      corr.set_byzantine(
          node_at(std::uniform_int_distribution<long long>(0, 24)(rng), 5));
    }
    const auto forgeable = forgeable_nodes(corr);
    for (NodeId u : corr.correct_nodes()) {
      const bool in =
          std::binary_search(forgeable.begin(), forgeable.end(), u);
      CAPTURE(u);
      CHECK(in == oracle_forgeable(corr, u));
    }
  }
}

TEST_CASE("monotonicity spot-check: extra failures never grow the set") {
  std::mt19937_64 rng(5);
  for (int side : {4, 10}) {
    for (int trial = 0; trial < 6; ++trial) {
      CorrectnessMap corr(side);
      const int byz = trial % 3;
      for (int b = 0; b < byz; ++b) {
        corr.set_byzantine(node_at(
            std::uniform_int_distribution<long long>(0, side * side - 1)(rng),
            side));
      }
      const size_t before = rel_base(corr).members.size();
      // flip one more
      CorrectnessMap worse = corr;
      NodeId extra;
      do {
        extra = node_at(
            std::uniform_int_distribution<long long>(0, side * side - 1)(rng),
            side);
      } while (!worse.is_correct(extra));
      worse.set_byzantine(extra);
      CHECK(rel_base(worse).members.size() <= before);
    }
  }
}

TEST_CASE("is_correct_macro") {
  CorrectnessMap all(10);
  CHECK(is_correct_macro(all));

  CorrectnessMap side_down(10);
  for (int j = 0; j < 10; ++j) side_down.set_byzantine({0, j});
  CHECK_FALSE(is_correct_macro(side_down));

  // strictness at n = 4: an interior failure keeps all sides whole, a border
  // failure drops a side to 3 = 3n/4, not strictly more
  CorrectnessMap interior(4);
  interior.set_byzantine({1, 1});
  CHECK(is_correct_macro(interior));
  CorrectnessMap edge(4);
  edge.set_byzantine({0, 1});
  CHECK_FALSE(is_correct_macro(edge));
}
