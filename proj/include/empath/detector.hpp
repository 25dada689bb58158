#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "empath/core.hpp"
#include "empath/path_diff.hpp"

namespace empath {

/// A (closed) time window over which a set of sd-pairs all had the same
/// extended address in the changed set of an active transition, at the
/// window's size maximum.
struct CandidateEvent {
  Interval interval;
  std::vector<SdPair> pairs;  // sorted
  ExtendedAddress address;

  friend bool operator==(const CandidateEvent&, const CandidateEvent&) = default;
};

/// Final output of the pipeline.
struct InferredEvent {
  Interval interval;
  std::vector<SdPair> scope;       // sorted
  std::vector<Address> addresses;  // sorted, untagged union over the group
  EventType type = EventType::Unknown;

  std::size_t impact() const { return scope.size(); }

  friend bool operator==(const InferredEvent&, const InferredEvent&) = default;
};

struct RunStats {
  std::size_t paths_in = 0;
  std::size_t paths_rejected = 0;
  std::map<Errc, std::size_t> rejections;
  std::size_t sd_pairs = 0;
  std::size_t transitions = 0;
  std::size_t first_hop_mismatches = 0;
  std::size_t shared_interior = 0;  // transitions whose deltas overlap beyond delimiters
  std::size_t candidates = 0;
  std::size_t candidates_pruned = 0;
  std::size_t events = 0;
  double phase1_ms = 0;
  double phase2_ms = 0;
  double phase3_ms = 0;
};

/// Sweeps the distinct transition endpoints in time order, tracking for
/// every extended address the set of sd-pairs whose active transitions carry
/// it. Each time a tracked set shrinks from a local size maximum, the
/// maximal set and its validity window are emitted as a candidate. The
/// tracked-set history (the pseudovariables with prev/pprev access) is kept
/// as sizes plus an incrementally maintained current set; the previous set's
/// content is reconstructed from the endpoint's own additions and removals
/// exactly when a candidate is emitted, so a sweep over |T| transitions
/// stays linear apart from the emitted output itself.
/// Result is sorted canonically and is independent of the thread count.
std::vector<CandidateEvent> sweep_candidates(std::span<const Transition> transitions,
                                             int threads = 1);

/// Drops every candidate whose sd-pair set is a strict subset of another
/// candidate's that overlaps it in time (closed intervals). Subsumption is
/// evaluated against the input set as a whole, so the result does not depend
/// on candidate order.
std::vector<CandidateEvent> prune_subsumed(std::span<const CandidateEvent> candidates);

/// Groups candidates by exact (pairs, start, end) and emits one event per
/// group whose scope size strictly exceeds the threshold. The event type is
/// Down when every grouped address is Pre-tagged, Up when all are
/// Post-tagged, Unknown otherwise.
std::vector<InferredEvent> group_and_infer(std::span<const CandidateEvent> candidates,
                                           std::size_t threshold);

struct DetectOptions {
  std::size_t threshold = 0;
  int threads = 1;
};

struct DetectResult {
  std::vector<InferredEvent> events;
  RunStats stats;
};

/// The full three-phase pipeline over raw samples: per-pair transition
/// extraction, the candidate sweep, and subsumption + grouping. Invalid
/// paths and duplicate timestamps are counted, never fatal. Output is
/// byte-stable for a given input regardless of opts.threads.
DetectResult detect_events(std::span<const TraceroutePath> paths, const DetectOptions& opts = {});

}  // namespace empath
