#include <algorithm>
#include <random>

#include "doctest.h"
#include "empath/empathy.hpp"
#include "helpers.hpp"

using namespace empath;
using namespace empath::test;

namespace {

// Transitions of the link-failure figure: link (5,6) dies, p1 detours via 9,
// p2 via 10.
std::vector<Transition> figure_transitions() {
  const SdPair p1 = probe("p1", "s1", "d1");
  const SdPair p2 = probe("p2", "s2", "d2");
  return {
      make_transition(sample(p1, 100, {"s1", "5", "6", "d1"}),
                      sample(p1, 200, {"s1", "5", "9", "6", "d1"})),
      make_transition(sample(p2, 100, {"s2", "4", "5", "6", "8", "d2"}),
                      sample(p2, 200, {"s2", "4", "10", "8", "d2"})),
  };
}

}  // namespace

TEST_CASE("figure deltas drive the empathy relation") {
  const auto txs = figure_transitions();
  CHECK(txs[0].tagged_vertices(Tag::Pre) == hops({"5", "6"}));
  CHECK(txs[0].tagged_vertices(Tag::Post) == hops({"5", "6", "9"}));
  CHECK(pre_empathic(txs[0], txs[1]));
  CHECK_FALSE(post_empathic(txs[0], txs[1]));
}

TEST_CASE("empathy is reflexive and needs temporal overlap") {
  const auto txs = figure_transitions();
  CHECK(pre_empathic(txs[0], txs[0]));
  CHECK(post_empathic(txs[1], txs[1]));

  const Transition late = raw_transition(probe("p3", "s3", "d3"), 200, 300, {"1", "2"}, {"1", "2"});
  CHECK_THROWS_AS(pre_empathic(txs[0], late), Error);  // [100,200) vs [200,300)
}

TEST_CASE("disjoint changed portions are not empathic") {
  const Transition a = raw_transition(probe("a", "s", "da"), 0, 10, {"1", "2"}, {"9"});
  const Transition b = raw_transition(probe("b", "s", "db"), 0, 10, {"3", "4"}, {"9"});
  CHECK_FALSE(pre_empathic(a, b));
  CHECK(post_empathic(a, b));
  const Transition c = raw_transition(probe("c", "s", "dc"), 0, 10, {"12"}, {"5", "9", "6"});
  const Transition d = raw_transition(probe("d", "s", "dd"), 0, 10, {"13"}, {"4", "10", "8"});
  CHECK_FALSE(post_empathic(c, d));
  const Transition e = raw_transition(probe("e", "s", "de"), 5, 15, {"14"}, {"2", "6", "7", "8"});
  CHECK(post_empathic(e, raw_transition(probe("f", "s", "df"), 5, 15, {"15"}, {"7", "11"})));
}

TEST_CASE("empathy graph of the figure") {
  const auto txs = figure_transitions();
  const EmpathyGraph pre = build_empathy_graph(txs, 150, Tag::Pre);
  REQUIRE(pre.vertices.size() == 2);
  CHECK(pre.edges.size() == 1);
  CHECK(pre.has_edge(0, 1));

  const EmpathyGraph post = build_empathy_graph(txs, 150, Tag::Post);
  CHECK(post.vertices.size() == 2);
  CHECK(post.edges.empty());

  CHECK(build_empathy_graph({}, 150, Tag::Pre).vertices.empty());
}

TEST_CASE("graph respects half-open activity") {
  const auto txs = figure_transitions();
  CHECK(build_empathy_graph(txs, 100, Tag::Pre).vertices.size() == 2);
  CHECK(build_empathy_graph(txs, 200, Tag::Pre).vertices.empty());
}

TEST_CASE("three transitions sharing a pre address form a triangle") {
  std::vector<Transition> txs;
  for (int i = 0; i < 3; ++i) {
    Transition t;
    t.pair = probe("p" + std::to_string(i), "s", "d" + std::to_string(i));
    t.interval = {0, 10};
    t.diff.delta_pre = {Address("h"), Address(std::to_string(20 + i))};
    t.diff.delta_post = {Address(std::to_string(40 + i))};
    t.changed = changed_set(t.diff);
    txs.push_back(std::move(t));
  }
  const EmpathyGraph g = build_empathy_graph(txs, 5, Tag::Pre);
  CHECK(g.edges.size() == 3);
  const auto components = connected_components(g);
  REQUIRE(components.size() == 1);
  CHECK(components[0].size() == 3);
}

TEST_CASE("connected components: basic shapes") {
  EmpathyGraph g;
  for (int i = 0; i < 4; ++i) g.vertices.push_back(probe("p" + std::to_string(i), "s", "d"));
  std::sort(g.vertices.begin(), g.vertices.end());

  CHECK(connected_components(g).size() == 4);  // edgeless

  g.edges = {{0, 1}, {2, 3}};
  const auto comps = connected_components(g);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].size() == 2);
  CHECK(comps[1].size() == 2);
}

TEST_CASE("connected components agree with a BFS oracle") {
  std::mt19937 rng(41);
  for (int round = 0; round < 60; ++round) {
    EmpathyGraph g;
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int i = 0; i < n; ++i) {
      g.vertices.push_back(probe("p" + std::to_string(100 + i), "s", "d"));
    }
    std::uniform_int_distribution<int> v(0, n - 1);
    const int m = std::uniform_int_distribution<int>(0, 2 * n)(rng);
    for (int e = 0; e < m; ++e) {
      int a = v(rng), b = v(rng);
      if (a == b) continue;
      g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

    // BFS labeling oracle.
    std::vector<int> label(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
      if (label[s] != -1) continue;
      std::vector<int> frontier{s};
      label[s] = next;
      while (!frontier.empty()) {
        std::vector<int> grow;
        for (int u : frontier) {
          for (const auto& [a, b] : g.edges) {
            const int w = static_cast<int>(a) == u   ? static_cast<int>(b)
                          : static_cast<int>(b) == u ? static_cast<int>(a)
                                                     : -1;
            if (w >= 0 && label[w] == -1) {
              label[w] = next;
              grow.push_back(w);
            }
          }
        }
        frontier = std::move(grow);
      }
      ++next;
    }
    const auto comps = connected_components(g);
    CHECK(static_cast<int>(comps.size()) == next);
    std::size_t total = 0;
    for (const auto& comp : comps) total += comp.size();
    CHECK(total == g.vertices.size());
  }
}

TEST_CASE("pivot sets of the figure") {
  const auto txs = figure_transitions();
  CHECK(pivot_set(txs, Tag::Pre).members == hops({"5", "6"}));
  CHECK(pivot_set(txs, Tag::Post).members.empty());
  // Singleton: the whole tagged vertex set.
  CHECK(pivot_set(std::span(txs).first(1), Tag::Pre).members == hops({"5", "6"}));
}

TEST_CASE("non-empty pivot implies a clique") {
  std::mt19937 rng(43);
  for (int round = 0; round < 80; ++round) {
    std::vector<Transition> txs;
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    std::uniform_int_distribution<int> label(0, 7);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> pre, post;
      for (int k = 0; k <= label(rng) % 3; ++k) pre.push_back(std::to_string(label(rng)));
      for (int k = 0; k <= label(rng) % 3; ++k) post.push_back(std::to_string(label(rng)));
      Transition t;
      t.pair = probe("p" + std::to_string(i), "s", "d" + std::to_string(i));
      t.interval = {0, 10};
      for (const auto& s : pre) t.diff.delta_pre.emplace_back(s);
      for (const auto& s : post) t.diff.delta_post.emplace_back(s);
      t.changed = changed_set(t.diff);
      txs.push_back(std::move(t));
    }
    for (Tag kind : {Tag::Pre, Tag::Post}) {
      if (pivot_set(txs, kind).members.empty()) continue;
      for (std::size_t i = 0; i < txs.size(); ++i) {
        for (std::size_t j = i + 1; j < txs.size(); ++j) {
          const bool edge = kind == Tag::Pre ? pre_empathic(txs[i], txs[j])
                                             : post_empathic(txs[i], txs[j]);
          CHECK(edge);
        }
      }
    }
  }
}

TEST_CASE("classify_component") {
  const auto txs = figure_transitions();
  const ComponentEvidence down = classify_component(txs);
  CHECK(down.kind == ComponentEvidence::Kind::Down);
  CHECK(down.hubs == hops({"5", "6"}));

  // Shared pre and post addresses: type cannot be disambiguated.
  const std::vector<Transition> unknown{
      raw_transition(probe("a", "s", "da"), 0, 10, {"u", "h", "b"}, {"u", "c", "b"}),
      raw_transition(probe("b", "s", "db"), 0, 10, {"u", "h", "b"}, {"u", "c", "b"}),
  };
  const ComponentEvidence ev = classify_component(unknown);
  CHECK(ev.kind == ComponentEvidence::Kind::Unknown);
  CHECK(ev.hubs == hops({"b", "c", "h", "u"}));

  const std::vector<Transition> apart{
      raw_transition(probe("a", "s", "da"), 0, 10, {"1", "2"}, {"3"}),
      raw_transition(probe("b", "s", "db"), 0, 10, {"4", "5"}, {"6"}),
  };
  CHECK(classify_component(apart).kind == ComponentEvidence::Kind::NotAClique);

  CHECK_THROWS_AS(classify_component(std::span(txs).first(1)), Error);
}

TEST_CASE("DOT output is deterministic and labeled by sd-pair id") {
  const auto txs = figure_transitions();
  const std::string dot = to_dot(build_empathy_graph(txs, 150, Tag::Pre));
  CHECK(dot.find("\"p1→d1\"") != std::string::npos);
  CHECK(dot.find("\"p1→d1\" -- \"p2→d2\"") != std::string::npos);
  CHECK(dot == to_dot(build_empathy_graph(txs, 150, Tag::Pre)));
}
