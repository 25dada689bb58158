#include "empath/path_diff.hpp"

#include <algorithm>
#include <map>

namespace empath {

std::vector<Address> common_prefix(std::span<const Address> p, std::span<const Address> q) {
  if (p.empty() || q.empty() || p.front() != q.front()) {
    throw Error(Errc::FirstHopMismatch, "paths do not share their first hop");
  }
  std::size_t j = 0;
  const std::size_t limit = std::min(p.size(), q.size());
  while (j < limit && p[j] == q[j]) ++j;
  return {p.begin(), p.begin() + static_cast<std::ptrdiff_t>(j)};
}

std::vector<Address> common_suffix(std::span<const Address> p, std::span<const Address> q) {
  std::size_t k = 0;
  const std::size_t limit = std::min(p.size(), q.size());
  while (k < limit && p[p.size() - 1 - k] == q[q.size() - 1 - k]) ++k;
  return {p.end() - static_cast<std::ptrdiff_t>(k), p.end()};
}

PathDiff diff_paths(std::span<const Address> p, std::span<const Address> q) {
  if (p.size() == q.size() && std::equal(p.begin(), p.end(), q.begin())) {
    throw Error(Errc::IdenticalPaths, "no transition between identical paths");
  }
  PathDiff diff;
  diff.common_head = common_prefix(p, q);
  const std::size_t j = diff.common_head.size();
  std::size_t k = common_suffix(p, q).size();
  // Acyclic inputs keep head and tail disjoint; clamp shields degenerate ones.
  k = std::min(k, std::min(p.size(), q.size()) - j);
  diff.common_tail.assign(p.end() - static_cast<std::ptrdiff_t>(k), p.end());

  auto segment = [&](std::span<const Address> path) {
    const std::size_t last = k > 0 ? path.size() - k : path.size() - 1;
    return std::vector<Address>(path.begin() + static_cast<std::ptrdiff_t>(j - 1),
                                path.begin() + static_cast<std::ptrdiff_t>(last + 1));
  };
  diff.delta_pre = segment(p);
  diff.delta_post = segment(q);
  return diff;
}

std::vector<ExtendedAddress> changed_set(const PathDiff& diff) {
  std::vector<ExtendedAddress> out;
  out.reserve(diff.delta_pre.size() + diff.delta_post.size());
  for (const Address& a : diff.delta_pre) out.push_back({a, Tag::Pre});
  for (const Address& a : diff.delta_post) out.push_back({a, Tag::Post});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Address> Transition::tagged_vertices(Tag kind) const {
  std::vector<Address> out;
  for (const ExtendedAddress& ea : changed) {
    if (ea.tag == kind) out.push_back(ea.address);
  }
  return out;  // `changed` is sorted by (address, tag), so the slice is sorted
}

bool Transition::has_tag(Tag kind) const {
  return std::any_of(changed.begin(), changed.end(),
                     [kind](const ExtendedAddress& ea) { return ea.tag == kind; });
}

Transition make_transition(const TraceroutePath& earlier, const TraceroutePath& later) {
  Transition t;
  t.pair = earlier.pair;
  t.interval = {earlier.timestamp, later.timestamp};
  t.diff = diff_paths(earlier.hops, later.hops);
  t.changed = changed_set(t.diff);
  return t;
}

bool has_shared_interior(const PathDiff& diff) {
  std::vector<Address> delimiters{diff.delta_pre.front()};
  if (!diff.common_tail.empty()) delimiters.push_back(diff.delta_pre.back());
  for (const Address& v : diff.delta_pre) {
    if (std::find(delimiters.begin(), delimiters.end(), v) != delimiters.end()) continue;
    if (std::find(diff.delta_post.begin(), diff.delta_post.end(), v) != diff.delta_post.end()) {
      return true;
    }
  }
  return false;
}

TransitionScan find_transitions(std::span<const TraceroutePath> samples) {
  TransitionScan scan;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const TraceroutePath& a = samples[i - 1];
    const TraceroutePath& b = samples[i];
    if (!(a.timestamp < b.timestamp)) {
      throw Error(Errc::UnsortedInput, "samples of " + a.pair.id() + " not strictly time-ordered");
    }
    if (a.hops == b.hops) continue;
    if (a.hops.empty() || b.hops.empty() || a.hops.front() != b.hops.front()) {
      ++scan.first_hop_mismatches;
      continue;
    }
    scan.transitions.push_back(make_transition(a, b));
    if (has_shared_interior(scan.transitions.back().diff)) ++scan.shared_interior;
  }
  return scan;
}

TransitionScan all_transitions(std::span<const TraceroutePath> paths) {
  std::map<SdPair, std::vector<const TraceroutePath*>> series;
  for (const TraceroutePath& p : paths) series[p.pair].push_back(&p);
  TransitionScan all;
  for (auto& [pair, samples] : series) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const TraceroutePath* a, const TraceroutePath* b) {
                       return a->timestamp < b->timestamp;
                     });
    std::vector<TraceroutePath> ordered;
    ordered.reserve(samples.size());
    for (const TraceroutePath* p : samples) {
      if (!ordered.empty() && ordered.back().timestamp == p->timestamp) continue;
      ordered.push_back(*p);
    }
    TransitionScan scan = find_transitions(ordered);
    all.first_hop_mismatches += scan.first_hop_mismatches;
    all.shared_interior += scan.shared_interior;
    std::move(scan.transitions.begin(), scan.transitions.end(),
              std::back_inserter(all.transitions));
  }
  return all;
}

}  // namespace empath
