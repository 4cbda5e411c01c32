#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "gridcast/grid.hpp"

using namespace gridcast;

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec(3, 1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(5, 1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(10, 0), std::invalid_argument);
  CHECK(GridSpec(10, 1).side() == 10);
  CHECK(GridSpec(10, 2).side() == 100);
  CHECK(GridSpec(10, 3).side() == 1000);
  CHECK(GridSpec(4, 2).side() == 16);
  CHECK(GridSpec(10, 2).node_count() == 10000);
}

TEST_CASE("neighbors") {
  CHECK(neighbors({0, 0}, 10) ==
        std::vector<NodeId>{{1, 0}, {0, 1}});
  const auto mid = neighbors({5, 5}, 10);
  CHECK(std::set<NodeId>(mid.begin(), mid.end()) ==
        std::set<NodeId>{{4, 5}, {6, 5}, {5, 4}, {5, 6}});
  CHECK(neighbors({0, 5}, 10).size() == 3);
  CHECK_THROWS_AS(neighbors({10, 0}, 10), std::invalid_argument);
  CHECK_THROWS_AS(neighbors({-1, 3}, 10), std::invalid_argument);
}

TEST_CASE("neighborhood symmetry, exhaustive up to side 100") {
  for (int side : {1, 2, 3, 4, 5, 7, 10, 16, 33, 64, 100}) {
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        const NodeId u{i, j};
        for (NodeId v : neighbors(u, side)) {
          const auto back = neighbors(v, side);
          CHECK(std::find(back.begin(), back.end(), u) != back.end());
        }
      }
    }
  }
}

TEST_CASE("cluster_of") {
  const GridSpec spec(10, 2);
  CHECK(cluster_of({23, 37}, spec, 1) == MacroNodeId{1, 2, 3});
  CHECK(cluster_of({0, 0}, spec, 1) == MacroNodeId{1, 0, 0});
  CHECK(cluster_of({99, 99}, spec, 1) == MacroNodeId{1, 9, 9});
  CHECK_THROWS_AS(cluster_of({5, 5}, spec, 2), std::invalid_argument);
  CHECK_THROWS_AS(cluster_of({5, 5}, spec, 0), std::invalid_argument);
  CHECK_THROWS_AS(cluster_of({5, 5}, GridSpec(10, 1), 1),
                  std::invalid_argument);

  // inverse of cluster_origin: integer-division oracle
  const GridSpec deep(4, 3);
  for (int i = 0; i < deep.side(); i += 7) {
    for (int j = 0; j < deep.side(); j += 5) {
      for (int level = 1; level < deep.k; ++level) {
        const auto p = cluster_of({i, j}, deep, level);
        const NodeId origin = cluster_origin(p, deep);
        int block = 1;
        for (int l = 0; l < level; ++l) block *= deep.n;
        CHECK(origin.i == (i / block) * block);
        CHECK(origin.j == (j / block) * block);
      }
    }
  }
}

TEST_CASE("clusters partition the grid") {
  const GridSpec spec(4, 3);
  for (int level = 1; level < spec.k; ++level) {
    std::map<MacroNodeId, long long> sizes;
    for (int i = 0; i < spec.side(); ++i) {
      for (int j = 0; j < spec.side(); ++j) {
        ++sizes[cluster_of({i, j}, spec, level)];
      }
    }
    long long block = 1;
    for (int l = 0; l < level; ++l) block *= spec.n;
    long long total = 0;
    for (const auto& [p, count] : sizes) {
      CHECK(count == block * block);  // exactly n^(2*level) nodes each
      total += count;
    }
    CHECK(total == spec.node_count());
  }
}

TEST_CASE("border") {
  const GridSpec spec(10, 2);
  const auto b = border({1, 0, 0}, {1, 0, 1}, spec);
  REQUIRE(b.size() == 10);
  for (int r = 0; r < 10; ++r) CHECK(b[r] == NodeId{r, 9});

  const GridSpec small(4, 2);
  CHECK(border({1, 0, 0}, {1, 1, 0}, small).size() == 4);
  CHECK_THROWS_AS(border({1, 0, 0}, {1, 1, 1}, small), std::invalid_argument);
  CHECK_THROWS_AS(border({1, 0, 0}, {1, 0, 0}, small), std::invalid_argument);
}

TEST_CASE("border pairing is a bijection of physical neighbors") {
  for (const GridSpec& spec : {GridSpec(4, 2), GridSpec(10, 2)}) {
    const int macro = spec.side() / spec.n;
    for (int pi = 0; pi < macro; ++pi) {
      for (int pj = 0; pj < macro; ++pj) {
        const MacroNodeId p{1, pi, pj};
        for (NodeId qd : neighbors({pi, pj}, macro)) {
          const MacroNodeId q{1, qd.i, qd.j};
          const auto bp = border(p, q, spec);
          const auto bq = border(q, p, spec);
          REQUIRE(bp.size() == bq.size());
          std::set<NodeId> seen;
          for (size_t t = 0; t < bp.size(); ++t) {
            CHECK(adjacent(bp[t], bq[t]));
            CHECK(cluster_of(bp[t], spec, 1) == p);
            CHECK(cluster_of(bq[t], spec, 1) == q);
            seen.insert(bp[t]);
          }
          CHECK(seen.size() == bp.size());
        }
      }
    }
  }
}

TEST_CASE("cluster sides include corners twice") {
  const ClusterRect rect{{0, 0}, 4};
  const auto sides = cluster_sides(rect);
  REQUIRE(sides.size() == 4);
  int corner_count = 0;
  for (const auto& side : sides) {
    CHECK(side.size() == 4);
    for (NodeId v : side) {
      if ((v.i == 0 || v.i == 3) && (v.j == 0 || v.j == 3)) ++corner_count;
    }
  }
  CHECK(corner_count == 8);  // each of the 4 corners on two sides
}
