#pragma once

#include <span>
#include <vector>

#include "empath/core.hpp"

namespace empath {

/// Decomposition of a pair of paths sharing their first hop:
/// path  = common_head ∘ delta_pre  ∘ common_tail
/// path' = common_head ∘ delta_post ∘ common_tail
/// where ∘ merges on the shared boundary vertex, so delta_pre/delta_post
/// carry the delimiting common vertices at both ends.
struct PathDiff {
  std::vector<Address> common_head;
  std::vector<Address> common_tail;
  std::vector<Address> delta_pre;
  std::vector<Address> delta_post;

  friend bool operator==(const PathDiff&, const PathDiff&) = default;
};

/// Maximal shared leading subsequence. Throws Error(FirstHopMismatch) when
/// the sequences do not start at the same address (or either is empty).
std::vector<Address> common_prefix(std::span<const Address> p, std::span<const Address> q);

/// Maximal equal-length shared trailing subsequence; may be empty.
/// Precondition: p != q.
std::vector<Address> common_suffix(std::span<const Address> p, std::span<const Address> q);

/// Splits two distinct same-origin paths into common and changed portions.
/// When the common suffix is empty (a path truncated before the
/// destination), the changed portion runs to the end of its path; when a
/// whole path equals the common head, its delta degenerates to the single
/// last common vertex. Throws Error(IdenticalPaths) / Error(FirstHopMismatch).
PathDiff diff_paths(std::span<const Address> p, std::span<const Address> q);

/// Tagged union of the changed portions: delta_pre vertices tagged Pre and
/// delta_post vertices tagged Post. Sorted, duplicates removed.
std::vector<ExtendedAddress> changed_set(const PathDiff& diff);

/// A pair of consecutive differing samples of one sd-pair, active on the
/// half-open interval [earlier sample, later sample).
struct Transition {
  SdPair pair;
  Interval interval;
  PathDiff diff;
  std::vector<ExtendedAddress> changed;  // == changed_set(diff), kept sorted

  /// Vertices of delta_pre (kind == Pre) or delta_post (kind == Post), as a
  /// sorted unique list.
  std::vector<Address> tagged_vertices(Tag kind) const;
  bool has_tag(Tag kind) const;
};

Transition make_transition(const TraceroutePath& earlier, const TraceroutePath& later);

/// True when the changed portions share interior vertices beyond the
/// delimiting common ones. Such transitions are kept (the deltas stay single
/// continuous subpaths) but callers surface a count of them.
bool has_shared_interior(const PathDiff& diff);

struct TransitionScan {
  std::vector<Transition> transitions;
  std::size_t first_hop_mismatches = 0;  // adjacent samples whose sources differ, skipped
  std::size_t shared_interior = 0;       // transitions whose deltas overlap beyond delimiters
};

/// Scans the time-ordered samples of a single sd-pair and emits one
/// Transition per adjacent pair of differing samples. Adjacent samples whose
/// first hops differ (source drift) are skipped and counted. Throws
/// Error(UnsortedInput) on a timestamp inversion or duplicate.
TransitionScan find_transitions(std::span<const TraceroutePath> samples);

/// Phase-1 assembly over a mixed collection: groups by sd-pair, sorts each
/// series by timestamp (dropping duplicate instants), and concatenates the
/// per-pair scans in canonical pair order.
TransitionScan all_transitions(std::span<const TraceroutePath> paths);

}  // namespace empath
