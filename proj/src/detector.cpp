#include "empath/detector.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <thread>
#include <tuple>
#include <unordered_map>

namespace empath {

namespace {

constexpr Timestamp kNegInf = -std::numeric_limits<Timestamp>::infinity();

using PairId = std::uint32_t;
using AddrId = std::uint32_t;

struct AddrDelta {
  Timestamp t;
  PairId pair;
  std::int32_t delta;
};

struct RawCandidate {
  Timestamp t1;
  Timestamp t2;
  AddrId addr;
  std::vector<PairId> pairs;
};

/// Tracked-set walk for a single extended address over its own endpoint
/// timeline. Keeps the current sd-pair set as active-transition counts and
/// the history as sizes; the previous set's content is rebuilt from the
/// current instant's additions and removals when a local maximum is emitted.
void sweep_one_address(const std::vector<AddrDelta>& deltas, AddrId addr,
                       std::vector<RawCandidate>& out) {
  std::unordered_map<PairId, std::int32_t> counts;
  std::size_t prev_size = 0;  // |prev(S)| once the pending shift lands
  Timestamp t_current = kNegInf;

  std::vector<PairId> added;
  std::vector<PairId> removed;
  std::vector<std::pair<PairId, std::int32_t>> batch;

  std::size_t i = 0;
  while (i < deltas.size()) {
    const Timestamp t = deltas[i].t;
    batch.clear();
    for (; i < deltas.size() && deltas[i].t == t; ++i) {
      batch.emplace_back(deltas[i].pair, deltas[i].delta);
    }
    // Aggregate per pair: a pair whose transitions chain across this instant
    // keeps the set unchanged.
    std::sort(batch.begin(), batch.end());
    added.clear();
    removed.clear();
    const std::size_t old_size = counts.size();
    for (std::size_t b = 0; b < batch.size();) {
      const PairId pair = batch[b].first;
      std::int32_t net = 0;
      for (; b < batch.size() && batch[b].first == pair; ++b) net += batch[b].second;
      if (net == 0) continue;
      auto it = counts.find(pair);
      const std::int32_t before = it == counts.end() ? 0 : it->second;
      const std::int32_t after = before + net;
      if (after == 0) {
        counts.erase(it);
        removed.push_back(pair);
      } else {
        counts[pair] = after;
        if (before == 0) added.push_back(pair);
      }
    }
    if (added.empty() && removed.empty()) continue;  // S unchanged: no assignment

    const std::size_t new_size = counts.size();
    // This assignment shifts the history: pprev becomes the stored prev_size,
    // prev becomes the set just replaced. |pprev| <= |prev| and |prev| > |S|.
    if (prev_size <= old_size && old_size > new_size) {
      std::vector<PairId> prev_pairs;
      prev_pairs.reserve(old_size);
      std::sort(added.begin(), added.end());
      for (const auto& [pair, cnt] : counts) {
        if (!std::binary_search(added.begin(), added.end(), pair)) prev_pairs.push_back(pair);
      }
      prev_pairs.insert(prev_pairs.end(), removed.begin(), removed.end());
      std::sort(prev_pairs.begin(), prev_pairs.end());
      out.push_back(RawCandidate{t_current, t, addr, std::move(prev_pairs)});
    }
    prev_size = old_size;
    t_current = t;
  }
}

void run_partitioned(std::size_t jobs, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), jobs == 0 ? 1 : jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) fn(j);
    });
  }
  for (auto& th : pool) th.join();
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

std::vector<CandidateEvent> sweep_candidates(std::span<const Transition> transitions,
                                             int threads) {
  // Intern sd-pairs and extended addresses; both tables sorted so id order
  // matches value order.
  std::vector<SdPair> pair_table;
  std::vector<ExtendedAddress> addr_table;
  pair_table.reserve(transitions.size());
  for (const Transition& t : transitions) {
    pair_table.push_back(t.pair);
    addr_table.insert(addr_table.end(), t.changed.begin(), t.changed.end());
  }
  std::sort(pair_table.begin(), pair_table.end());
  pair_table.erase(std::unique(pair_table.begin(), pair_table.end()), pair_table.end());
  std::sort(addr_table.begin(), addr_table.end());
  addr_table.erase(std::unique(addr_table.begin(), addr_table.end()), addr_table.end());

  auto pair_id = [&](const SdPair& p) {
    return static_cast<PairId>(
        std::lower_bound(pair_table.begin(), pair_table.end(), p) - pair_table.begin());
  };
  auto addr_id = [&](const ExtendedAddress& a) {
    return static_cast<AddrId>(
        std::lower_bound(addr_table.begin(), addr_table.end(), a) - addr_table.begin());
  };

  std::vector<std::vector<AddrDelta>> per_addr(addr_table.size());
  for (const Transition& t : transitions) {
    const PairId pid = pair_id(t.pair);
    for (const ExtendedAddress& ea : t.changed) {
      auto& list = per_addr[addr_id(ea)];
      list.push_back({t.interval.start, pid, +1});
      list.push_back({t.interval.end, pid, -1});
    }
  }

  std::vector<std::vector<RawCandidate>> found(addr_table.size());
  run_partitioned(addr_table.size(), threads, [&](std::size_t a) {
    auto& deltas = per_addr[a];
    std::sort(deltas.begin(), deltas.end(), [](const AddrDelta& x, const AddrDelta& y) {
      return x.t < y.t;
    });
    sweep_one_address(deltas, static_cast<AddrId>(a), found[a]);
  });

  std::vector<CandidateEvent> out;
  for (auto& list : found) {
    for (RawCandidate& raw : list) {
      CandidateEvent c;
      c.interval = {raw.t1, raw.t2};
      c.address = addr_table[raw.addr];
      c.pairs.reserve(raw.pairs.size());
      for (PairId pid : raw.pairs) c.pairs.push_back(pair_table[pid]);
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(), [](const CandidateEvent& a, const CandidateEvent& b) {
    return std::tie(a.interval, a.address, a.pairs) < std::tie(b.interval, b.address, b.pairs);
  });
  return out;
}

namespace {

bool strict_subset(const std::vector<SdPair>& small, const std::vector<SdPair>& big) {
  return small.size() < big.size() &&
         std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

std::vector<CandidateEvent> prune_subsumed(std::span<const CandidateEvent> candidates) {
  std::vector<CandidateEvent> kept;
  for (const CandidateEvent& c : candidates) {
    const bool subsumed = std::any_of(
        candidates.begin(), candidates.end(), [&](const CandidateEvent& other) {
          return c.interval.overlaps_closed(other.interval) && strict_subset(c.pairs, other.pairs);
        });
    if (!subsumed) kept.push_back(c);
  }
  return kept;
}

std::vector<InferredEvent> group_and_infer(std::span<const CandidateEvent> candidates,
                                           std::size_t threshold) {
  using Key = std::tuple<Timestamp, Timestamp, std::vector<SdPair>>;
  std::map<Key, std::vector<ExtendedAddress>> groups;
  for (const CandidateEvent& c : candidates) {
    groups[{c.interval.start, c.interval.end, c.pairs}].push_back(c.address);
  }

  std::vector<InferredEvent> events;
  for (auto& [key, addrs] : groups) {
    const auto& [t1, t2, pairs] = key;
    if (pairs.size() <= threshold) continue;
    InferredEvent ev;
    ev.interval = {t1, t2};
    ev.scope = pairs;
    bool all_pre = true;
    bool all_post = true;
    for (const ExtendedAddress& ea : addrs) {
      (ea.tag == Tag::Pre ? all_post : all_pre) = false;
      ev.addresses.push_back(ea.address);
    }
    std::sort(ev.addresses.begin(), ev.addresses.end());
    ev.addresses.erase(std::unique(ev.addresses.begin(), ev.addresses.end()),
                       ev.addresses.end());
    ev.type = all_pre ? EventType::Down : all_post ? EventType::Up : EventType::Unknown;
    events.push_back(std::move(ev));
  }
  return events;  // map iteration order is the canonical (t1, t2, scope) order
}

DetectResult detect_events(std::span<const TraceroutePath> paths, const DetectOptions& opts) {
  DetectResult res;
  RunStats& st = res.stats;
  st.paths_in = paths.size();

  auto tick = std::chrono::steady_clock::now();

  // Phase 1: per-pair transition extraction.
  std::map<SdPair, std::vector<const TraceroutePath*>> series;
  for (const TraceroutePath& p : paths) {
    if (auto reason = validate_path(p)) {
      ++st.paths_rejected;
      ++st.rejections[*reason];
      continue;
    }
    series[p.pair].push_back(&p);
  }
  st.sd_pairs = series.size();

  std::vector<std::vector<const TraceroutePath*>*> groups;
  groups.reserve(series.size());
  for (auto& [pair, samples] : series) groups.push_back(&samples);

  std::vector<TransitionScan> scans(groups.size());
  std::vector<std::size_t> duplicate_drops(groups.size(), 0);
  run_partitioned(groups.size(), opts.threads, [&](std::size_t g) {
    auto& samples = *groups[g];
    std::stable_sort(samples.begin(), samples.end(),
                     [](const TraceroutePath* a, const TraceroutePath* b) {
                       return a->timestamp < b->timestamp;
                     });
    std::vector<TraceroutePath> ordered;
    ordered.reserve(samples.size());
    for (const TraceroutePath* p : samples) {
      if (!ordered.empty() && ordered.back().timestamp == p->timestamp) {
        ++duplicate_drops[g];
        continue;
      }
      ordered.push_back(*p);
    }
    scans[g] = find_transitions(ordered);
  });

  std::vector<Transition> transitions;
  for (std::size_t g = 0; g < scans.size(); ++g) {
    st.first_hop_mismatches += scans[g].first_hop_mismatches;
    st.shared_interior += scans[g].shared_interior;
    if (duplicate_drops[g] > 0) {
      st.paths_rejected += duplicate_drops[g];
      st.rejections[Errc::DuplicateTimestamp] += duplicate_drops[g];
    }
    std::move(scans[g].transitions.begin(), scans[g].transitions.end(),
              std::back_inserter(transitions));
  }
  st.transitions = transitions.size();
  st.phase1_ms = elapsed_ms(tick);

  // Phase 2: candidate sweep.
  tick = std::chrono::steady_clock::now();
  std::vector<CandidateEvent> candidates = sweep_candidates(transitions, opts.threads);
  st.candidates = candidates.size();
  st.phase2_ms = elapsed_ms(tick);

  // Phase 3: subsumption pruning, grouping, thresholding.
  tick = std::chrono::steady_clock::now();
  std::vector<CandidateEvent> kept = prune_subsumed(candidates);
  st.candidates_pruned = candidates.size() - kept.size();
  res.events = group_and_infer(kept, opts.threshold);
  st.events = res.events.size();
  st.phase3_ms = elapsed_ms(tick);
  return res;
}

}  // namespace empath
