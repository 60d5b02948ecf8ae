// Copyright 2026 The kgreason Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <random>
#include <sstream>

#include "kgr/error.hpp"
#include "kgr/knowledge_graph.hpp"
#include "oracles.hpp"

using namespace kgr;

namespace {

KnowledgeGraph parse(const std::string& text, LoadOptions opts = {}) {
  std::istringstream in(text);
  return parse_graph(in, opts);
}

KnowledgeGraph films() { return load_graph(std::string(KGR_FIXTURE_DIR) + "/kg.tsv"); }

}  // namespace

TEST_SUITE("knowledge_graph") {
  TEST_CASE("two triples give three entities and two relations") {
    const auto g = parse("A\tr1\tB\nB\tr2\tC\n");
    CHECK(g.entity_count() == 3);
    CHECK(g.relation_count() == 2);
    CHECK(g.triple_count() == 2);
    CHECK(g.contains({"A", "r1", "B"}));
    CHECK_FALSE(g.contains({"B", "r1", "C"}));
  }

  TEST_CASE("duplicate lines collapse") {
    const auto g = parse("A\tr1\tB\nA\tr1\tB\n");
    CHECK(g.triple_count() == 1);
  }

  TEST_CASE("comments and blank lines are skipped") {
    const auto g = parse("# header\n\nA\tr1\tB\n  \n");
    CHECK(g.triple_count() == 1);
  }

  TEST_CASE("malformed lines report their line number") {
    try {
      parse("A\tr1\tB\nA\tr1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("A\t\tB\n"), ParseError);
    CHECK_THROWS_AS(load_graph("/nonexistent/graph.tsv"), IoError);
  }

  TEST_CASE("neighbors") {
    const auto g = parse("A\tr1\tB\nB\tr2\tC\n");
    CHECK(g.neighbors("A") == std::vector<std::pair<std::string, std::string>>{{"r1", "B"}});
    CHECK(g.neighbors("Z").empty());
    CHECK(g.neighbors("C").empty());

    const auto fan = parse("H\tz\tT1\nH\ta\tT3\nH\ta\tT2\n");
    CHECK(fan.neighbors("H") ==
          std::vector<std::pair<std::string, std::string>>{{"a", "T2"}, {"a", "T3"}, {"z", "T1"}});
  }

  TEST_CASE("film subgraph round-trips through neighbor queries") {
    const auto g = films();
    const auto films = g.neighbors("Ang Lee");
    CHECK(std::count(films.begin(), films.end(),
                     std::pair<std::string, std::string>{"directed", "Crouching Tiger, Hidden Dragon"}) == 1);
    CHECK(g.neighbors("Crouching Tiger, Hidden Dragon") ==
          std::vector<std::pair<std::string, std::string>>{{"won_award", "m.cvt2"}});
    std::size_t arcs = 0;
    for (const auto& name : g.entity_names()) {
      for (const auto& [r, t] : g.neighbors(name)) {
        CHECK(g.contains({name, r, t}));
        ++arcs;
      }
    }
    CHECK(arcs == g.triple_count());

    std::ostringstream out;
    write_graph(g, out);
    CHECK(parse(out.str()) == g);
  }

  TEST_CASE("ids follow name order and arcs are sorted") {
    const auto g = parse("b\ty\tc\na\tx\tc\nb\tx\ta\n");
    CHECK(g.entity_names() == std::vector<std::string>{"a", "b", "c"});
    CHECK(g.relation_names() == std::vector<std::string>{"x", "y"});
    const auto b = *g.find_entity("b");
    const auto arcs = g.out_arcs(b);
    REQUIRE(arcs.size() == 2);
    CHECK(arcs[0] < arcs[1]);
    CHECK(g.out_arcs(b, *g.find_relation("y")).size() == 1);
  }

  TEST_CASE("inverse materialization") {
    const auto g = parse("A\tr\tB\n", LoadOptions{.materialize_inverse = true});
    CHECK(g.triple_count() == 2);
    CHECK(g.contains({"B", "r.inv", "A"}));
    CHECK_FALSE(parse("A\tr\tB\n").contains({"B", "r.inv", "A"}));
  }

  TEST_CASE("k-hop subgraph on a chain") {
    const auto g = parse("A\tr\tB\nB\tr\tC\nC\tr\tD\n");
    const auto sub = k_hop_subgraph(g, "A", 2);
    CHECK(sub.triple_count() == 2);
    CHECK(sub.contains({"A", "r", "B"}));
    CHECK(sub.contains({"B", "r", "C"}));
    CHECK(k_hop_subgraph(g, "A", 10) == g);
    CHECK(k_hop_subgraph(g, "Z", 2).empty());
    CHECK_THROWS_AS(k_hop_subgraph(g, "A", 0), PreconditionError);
  }

  TEST_CASE("k-hop subgraph matches the BFS oracle on random graphs") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 40; ++t) {
      const auto rg = testing::random_graph(rng, 30, 5, 3);
      const auto g = KnowledgeGraph::from_triples(rg.triples);
      for (const auto& start : rg.entities) {
        const auto sub = k_hop_subgraph(g, start, 3);
        const auto tr = sub.triples();
        CHECK(std::set<Triple>(tr.begin(), tr.end()) == testing::brute_k_hop(rg.triples, start, 3));
      }
    }
  }

  TEST_CASE("bfs distances and stats") {
    const auto g = parse("A\tr\tB\nB\tr\tC\n");
    const auto d = bfs_distances(g, *g.find_entity("A"), 1);
    CHECK(d[static_cast<std::size_t>(*g.find_entity("B"))] == 1);
    CHECK(d[static_cast<std::size_t>(*g.find_entity("C"))] == -1);
    const auto s = graph_stats(g);
    CHECK(s["entities"] == 3);
    CHECK(s["triples"] == 2);
  }
}
