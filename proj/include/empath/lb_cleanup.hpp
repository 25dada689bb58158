#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "empath/core.hpp"

namespace empath {

struct NextHopKey {
  Address destination;
  Address node;

  friend bool operator==(const NextHopKey&, const NextHopKey&) = default;
  friend auto operator<=>(const NextHopKey&, const NextHopKey&) = default;
};

struct NextHopEntry {
  std::size_t samples = 0;  // observations of the node with a following hop
  std::size_t changes = 0;  // observations whose next hop differed from the previous one
  std::set<Address> next_hops;
};

using NextHopStats = std::map<NextHopKey, NextHopEntry>;

/// Accumulates next-hop evolution per (destination, node). Each sd-pair's
/// series is scanned in time order independently; a change is counted when a
/// node's next hop differs from the one previously seen in the same series.
/// The last hop of a path contributes no sample.
NextHopStats build_nexthop_stats(std::span<const TraceroutePath> paths);

/// (destination, node) entries considered part of a load balancer, each with
/// the representative next hop their successors are rewritten to.
struct BalancerMap {
  std::map<NextHopKey, Address> representatives;

  bool empty() const { return representatives.empty(); }
};

/// Flags entries with changes/samples strictly above the instability
/// fraction. The representative is the lexicographically smallest observed
/// next hop, so rewriting is reproducible.
BalancerMap identify_balancers(const NextHopStats& stats, double instability = 0.20);

struct RewriteResult {
  std::vector<TraceroutePath> paths;
  std::size_t hops_rewritten = 0;
  std::size_t duplicates_collapsed = 0;
  std::size_t dropped_cyclic = 0;  // paths whose rewrite produced a cycle
};

/// Replaces the hop following each flagged node (toward the flagged
/// destination) with the representative, collapsing accidental adjacent
/// duplicates. Scans left to right over the evolving sequence, which makes
/// the rewrite idempotent. Paths made cyclic are dropped and counted.
RewriteResult rewrite_paths(std::span<const TraceroutePath> paths, const BalancerMap& map);

/// Audit dump: one line per flagged entry,
/// "<destination> <node> <representative> <samples> <changes>".
std::string write_balancer_map(const BalancerMap& map, const NextHopStats& stats);

}  // namespace empath
