#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "empath/detector.hpp"
#include "empath/ingest.hpp"
#include "helpers.hpp"

using namespace empath;
using namespace empath::test;

namespace {

// The three transitions behind the worked sweep example: a down event with
// hub 1 seen by sd-pairs a, b, c at five endpoints t1..t5 = 1..5.
std::vector<Transition> example_transitions() {
  return {
      raw_transition(probe("a", "sa", "da"), 3, 5, {"1"}, {"2"}),
      raw_transition(probe("b", "sb", "db"), 1, 5, {"1"}, {"2", "3"}),
      raw_transition(probe("c", "sc", "dc"), 2, 4, {"1"}, {"3"}),
  };
}

std::vector<std::string> scope_ids(const std::vector<SdPair>& pairs) {
  std::vector<std::string> ids;
  for (const SdPair& p : pairs) ids.push_back(p.probe);
  return ids;
}

// Literal rendition of the sweep pseudocode: at every endpoint, for every
// extended address, recompute the tracked set from scratch; candidate
// emission into a set absorbs the repeat evaluations.
std::set<std::tuple<Timestamp, Timestamp, std::vector<std::string>, std::string>>
reference_sweep(const std::vector<Transition>& txs) {
  std::set<Timestamp> endpoints;
  std::set<ExtendedAddress> addresses;
  for (const Transition& t : txs) {
    endpoints.insert(t.interval.start);
    endpoints.insert(t.interval.end);
    addresses.insert(t.changed.begin(), t.changed.end());
  }
  struct History {
    std::vector<std::set<std::string>> sets{{}, {}, {}};  // pprev, prev, current
    std::vector<Timestamp> times{-1e300, -1e300};         // prev(t), t
  };
  std::map<ExtendedAddress, History> vars;
  std::set<std::tuple<Timestamp, Timestamp, std::vector<std::string>, std::string>> out;
  for (Timestamp t : endpoints) {
    for (const ExtendedAddress& a : addresses) {
      std::set<std::string> sdp;
      for (const Transition& tx : txs) {
        if (tx.interval.contains_halfopen(t) &&
            std::binary_search(tx.changed.begin(), tx.changed.end(), a)) {
          sdp.insert(tx.pair.probe);
        }
      }
      History& h = vars[a];
      if (h.sets[2] != sdp) {
        h.sets = {h.sets[1], h.sets[2], sdp};
        h.times = {h.times[1], t};
      }
      if (h.sets[0].size() <= h.sets[1].size() && h.sets[1].size() > h.sets[2].size()) {
        out.insert({h.times[0], h.times[1],
                    std::vector<std::string>(h.sets[1].begin(), h.sets[1].end()),
                    std::string(a.address.str()) + "^" + tag_name(a.tag)});
      }
    }
  }
  return out;
}

std::vector<Transition> random_transitions(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(0, 14);
  std::uniform_int_distribution<int> instant(0, 9);
  std::uniform_int_distribution<int> label(0, 4);
  std::uniform_int_distribution<int> pair_no(0, 5);
  std::vector<Transition> txs;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int a = instant(rng);
    const int b = instant(rng);
    if (a == b) continue;
    Transition t;
    t.pair = probe("p" + std::to_string(pair_no(rng)), "s", "d");
    t.interval = {static_cast<Timestamp>(std::min(a, b)), static_cast<Timestamp>(std::max(a, b))};
    t.diff.delta_pre = {Address(std::to_string(label(rng)))};
    t.diff.delta_post = {Address(std::to_string(label(rng)))};
    if (label(rng) > 2) t.diff.delta_pre.push_back(Address(std::to_string(label(rng))));
    t.changed = changed_set(t.diff);
    txs.push_back(std::move(t));
  }
  // One active transition per pair per instant: drop overlaps within a pair.
  std::sort(txs.begin(), txs.end(), [](const Transition& x, const Transition& y) {
    if (!(x.pair == y.pair)) return x.pair < y.pair;
    return x.interval < y.interval;
  });
  std::vector<Transition> kept;
  for (Transition& t : txs) {
    if (!kept.empty() && kept.back().pair == t.pair &&
        kept.back().interval.overlaps_halfopen(t.interval)) {
      continue;
    }
    kept.push_back(std::move(t));
  }
  return kept;
}

}  // namespace

TEST_CASE("sweep reproduces the worked example's three candidates") {
  const std::vector<CandidateEvent> cands = sweep_candidates(example_transitions());
  REQUIRE(cands.size() == 3);

  // (t3, t4, {a,b,c}, 1^pre)
  CHECK(cands[1].interval == Interval{3, 4});
  CHECK(cands[1].address == ExtendedAddress{Address("1"), Tag::Pre});
  CHECK(scope_ids(cands[1].pairs) == std::vector<std::string>{"a", "b", "c"});
  // (t3, t5, {a,b}, 2^post)
  CHECK(cands[2].interval == Interval{3, 5});
  CHECK(cands[2].address == ExtendedAddress{Address("2"), Tag::Post});
  CHECK(scope_ids(cands[2].pairs) == std::vector<std::string>{"a", "b"});
  // (t2, t4, {b,c}, 3^post)
  CHECK(cands[0].interval == Interval{2, 4});
  CHECK(cands[0].address == ExtendedAddress{Address("3"), Tag::Post});
  CHECK(scope_ids(cands[0].pairs) == std::vector<std::string>{"b", "c"});
}

TEST_CASE("a single transition yields one candidate per address") {
  const std::vector<Transition> txs{raw_transition(probe("p", "s", "d"), 10, 20, {"h"}, {"w"})};
  const auto cands = sweep_candidates(txs);
  REQUIRE(cands.size() == 2);
  for (const CandidateEvent& c : cands) {
    CHECK(c.interval == Interval{10, 20});
    CHECK(scope_ids(c.pairs) == std::vector<std::string>{"p"});
  }
  CHECK(sweep_candidates({}).empty());
}

TEST_CASE("chained transitions keep the tracked set alive across the joint") {
  // Same pair flaps back at t=20; address h stays pre-tagged in both.
  const std::vector<Transition> txs{
      raw_transition(probe("p", "s", "d"), 10, 20, {"h"}, {"x"}),
      raw_transition(probe("p", "s", "d"), 20, 30, {"h", "x"}, {"h", "y"}),
  };
  const auto cands = sweep_candidates(txs);
  for (const CandidateEvent& c : cands) {
    if (c.address == ExtendedAddress{Address("h"), Tag::Pre}) {
      CHECK(c.interval == Interval{10, 30});
    }
  }
}

TEST_CASE("sweep matches the pseudocode reference on random inputs") {
  std::mt19937 rng(53);
  for (int round = 0; round < 200; ++round) {
    const std::vector<Transition> txs = random_transitions(rng);
    const auto expected = reference_sweep(txs);
    std::set<std::tuple<Timestamp, Timestamp, std::vector<std::string>, std::string>> got;
    for (const CandidateEvent& c : sweep_candidates(txs)) {
      got.insert({c.interval.start, c.interval.end, scope_ids(c.pairs),
                  std::string(c.address.address.str()) + "^" + tag_name(c.address.tag)});
    }
    REQUIRE(got == expected);
  }
}

TEST_CASE("candidate windows are bounded by input endpoints") {
  std::mt19937 rng(101);
  for (int round = 0; round < 100; ++round) {
    const std::vector<Transition> txs = random_transitions(rng);
    std::set<Timestamp> endpoints;
    for (const Transition& t : txs) {
      endpoints.insert(t.interval.start);
      endpoints.insert(t.interval.end);
    }
    for (const CandidateEvent& c : sweep_candidates(txs)) {
      CHECK(endpoints.count(c.interval.start) == 1);
      CHECK(endpoints.count(c.interval.end) == 1);
      CHECK(c.interval.start <= c.interval.end);
    }
  }
}

TEST_CASE("subsumption pruning keeps only the maximal-impact candidate") {
  const auto cands = sweep_candidates(example_transitions());
  const auto kept = prune_subsumed(cands);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].interval == Interval{3, 4});
  CHECK(scope_ids(kept[0].pairs) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("pruning: equal sets and disjoint windows survive") {
  CandidateEvent a{{0, 10}, {probe("x", "s", "d"), probe("y", "s", "d")}, {Address("1"), Tag::Pre}};
  CandidateEvent b{{5, 15}, {probe("x", "s", "d"), probe("y", "s", "d")}, {Address("2"), Tag::Post}};
  std::sort(a.pairs.begin(), a.pairs.end());
  std::sort(b.pairs.begin(), b.pairs.end());
  const std::vector<CandidateEvent> equal_sets{a, b};
  CHECK(prune_subsumed(equal_sets).size() == 2);  // containment is strict

  CandidateEvent small{{20, 30}, {probe("x", "s", "d")}, {Address("1"), Tag::Pre}};
  const std::vector<CandidateEvent> disjoint{a, small};
  CHECK(prune_subsumed(disjoint).size() == 2);  // no temporal overlap

  CandidateEvent touching{{10, 12}, {probe("x", "s", "d")}, {Address("1"), Tag::Pre}};
  const std::vector<CandidateEvent> closed{a, touching};
  CHECK(prune_subsumed(closed).size() == 1);  // endpoint touch counts as overlap
}

TEST_CASE("grouping, thresholding and type labels") {
  const auto kept = prune_subsumed(sweep_candidates(example_transitions()));

  const std::vector<InferredEvent> events = group_and_infer(kept, 0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].interval == Interval{3, 4});
  CHECK(scope_ids(events[0].scope) == std::vector<std::string>{"a", "b", "c"});
  CHECK(events[0].addresses == hops({"1"}));
  CHECK(events[0].type == EventType::Down);
  CHECK(events[0].impact() == 3);

  // |S| == threshold is filtered: the rule is strict.
  CHECK(group_and_infer(kept, 3).empty());

  // A group mixing pre and post tags is typed unknown.
  CandidateEvent cpre{{0, 10}, {probe("x", "s", "d")}, {Address("h"), Tag::Pre}};
  CandidateEvent cpost{{0, 10}, {probe("x", "s", "d")}, {Address("h"), Tag::Post}};
  const std::vector<InferredEvent> mixed = group_and_infer(std::vector{cpre, cpost}, 0);
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].type == EventType::Unknown);
  CHECK(mixed[0].addresses == hops({"h"}));
}

TEST_CASE("detect_events: stable input produces nothing") {
  const SdPair pr = probe("p1", "1", "3");
  std::vector<TraceroutePath> paths;
  for (int i = 0; i < 10; ++i) paths.push_back(sample(pr, 10.0 * i, {"1", "2", "3"}));
  const DetectResult r = detect_events(paths);
  CHECK(r.events.empty());
  CHECK(r.stats.transitions == 0);
  CHECK(r.stats.paths_in == 10);
}

TEST_CASE("detect_events counts rejections and duplicates") {
  const SdPair pr = probe("p1", "1", "3");
  std::vector<TraceroutePath> paths{
      sample(pr, 10, {"1", "2", "3"}),
      sample(pr, 10, {"1", "3"}),            // duplicate timestamp
      sample(pr, 20, {"1", "2", "1", "3"}),  // cycle
      sample(pr, 30, {"1", "3"}),
  };
  const DetectResult r = detect_events(paths);
  CHECK(r.stats.paths_rejected == 2);
  CHECK(r.stats.rejections.at(Errc::DuplicateTimestamp) == 1);
  CHECK(r.stats.rejections.at(Errc::Cycle) == 1);
  CHECK(r.stats.transitions == 1);
}

TEST_CASE("detect_events output is identical across thread counts") {
  std::mt19937 rng(59);
  std::uniform_int_distribution<int> label(2, 7);
  std::vector<TraceroutePath> paths;
  for (int p = 0; p < 12; ++p) {
    const SdPair pr = probe("p" + std::to_string(p), "s" + std::to_string(p), "d");
    for (int k = 0; k < 8; ++k) {
      paths.push_back({pr,
                       10.0 * k + p,
                       {pr.source, Address(std::to_string(label(rng))),
                        Address(std::to_string(label(rng) + 10)), Address("d")}});
    }
  }
  // Hop sequences may repeat labels; keep only valid paths.
  std::vector<TraceroutePath> valid;
  for (const TraceroutePath& p : paths) {
    if (!validate_path(p)) valid.push_back(p);
  }
  const DetectResult one = detect_events(valid, {0, 1});
  const DetectResult eight = detect_events(valid, {0, 8});
  CHECK(write_events(one.events) == write_events(eight.events));
  CHECK(one.stats.transitions == eight.stats.transitions);
  CHECK(one.stats.candidates == eight.stats.candidates);
}
