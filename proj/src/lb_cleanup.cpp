#include "empath/lb_cleanup.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace empath {

NextHopStats build_nexthop_stats(std::span<const TraceroutePath> paths) {
  // Per-series scan; merging across series is additive, so grouping first
  // and accumulating per group gives the same totals in any input order.
  std::map<SdPair, std::vector<const TraceroutePath*>> series;
  for (const TraceroutePath& p : paths) series[p.pair].push_back(&p);

  NextHopStats stats;
  for (auto& [pair, samples] : series) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const TraceroutePath* a, const TraceroutePath* b) {
                       return a->timestamp < b->timestamp;
                     });
    std::map<Address, Address> last_next_hop;  // node -> previously seen next hop
    for (const TraceroutePath* p : samples) {
      for (std::size_t i = 0; i + 1 < p->hops.size(); ++i) {
        const Address& node = p->hops[i];
        const Address& next = p->hops[i + 1];
        NextHopEntry& entry = stats[{p->pair.destination, node}];
        ++entry.samples;
        entry.next_hops.insert(next);
        auto [it, first_seen] = last_next_hop.emplace(node, next);
        if (!first_seen) {
          if (it->second != next) ++entry.changes;
          it->second = next;
        }
      }
    }
  }
  return stats;
}

BalancerMap identify_balancers(const NextHopStats& stats, double instability) {
  BalancerMap map;
  for (const auto& [key, entry] : stats) {
    if (entry.samples == 0) continue;
    const double ratio = static_cast<double>(entry.changes) / static_cast<double>(entry.samples);
    if (ratio > instability) {
      map.representatives.emplace(key, *entry.next_hops.begin());
    }
  }
  return map;
}

RewriteResult rewrite_paths(std::span<const TraceroutePath> paths, const BalancerMap& map) {
  RewriteResult result;
  result.paths.reserve(paths.size());
  for (const TraceroutePath& p : paths) {
    TraceroutePath rewritten = p;
    if (!map.empty()) {
      auto& hops = rewritten.hops;
      // Left-to-right over the evolving sequence keeps the pass idempotent.
      for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
        auto it = map.representatives.find({p.pair.destination, hops[i]});
        if (it == map.representatives.end()) continue;
        if (hops[i + 1] != it->second) {
          hops[i + 1] = it->second;
          ++result.hops_rewritten;
        }
      }
      for (std::size_t i = 0; i + 1 < hops.size();) {
        if (hops[i] == hops[i + 1]) {
          hops.erase(hops.begin() + static_cast<std::ptrdiff_t>(i) + 1);
          ++result.duplicates_collapsed;
        } else {
          ++i;
        }
      }
      if (auto reason = validate_path(rewritten); reason == Errc::Cycle) {
        ++result.dropped_cyclic;
        continue;
      }
    }
    result.paths.push_back(std::move(rewritten));
  }
  return result;
}

std::string write_balancer_map(const BalancerMap& map, const NextHopStats& stats) {
  std::ostringstream out;
  for (const auto& [key, rep] : map.representatives) {
    out << key.destination.str() << ' ' << key.node.str() << ' ' << rep.str();
    auto it = stats.find(key);
    if (it != stats.end()) {
      out << ' ' << it->second.samples << ' ' << it->second.changes;
    } else {
      out << " 0 0";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace empath
