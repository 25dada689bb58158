#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "empath/core.hpp"
#include "empath/path_diff.hpp"

namespace empath {

/// True when both transitions overlap in time and the vertex sets of their
/// changed pre-portions intersect. Reflexive and commutative. Throws
/// Error(NoTemporalOverlap) when the activity intervals share no instant.
bool pre_empathic(const Transition& a, const Transition& b);

/// As pre_empathic, on the post-portions.
bool post_empathic(const Transition& a, const Transition& b);

/// Relation over the sd-pairs whose transitions are active at a given
/// instant, one edge per empathic pair. Vertices are sorted; edges are
/// (i, j) index pairs with i < j, sorted.
struct EmpathyGraph {
  Tag kind = Tag::Pre;
  Timestamp at = 0;
  std::vector<SdPair> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  bool has_edge(std::size_t i, std::size_t j) const;
};

EmpathyGraph build_empathy_graph(std::span<const Transition> transitions, Timestamp at, Tag kind);

/// Components as sorted sd-pair sets, ordered by smallest member.
std::vector<std::vector<SdPair>> connected_components(const EmpathyGraph& g);

/// Vertices common to the tagged changed portions of every transition in the
/// group. Non-empty only when the group is pairwise empathic. members is
/// sorted; an empty result is valid.
struct PivotSet {
  std::vector<Address> members;
  Tag kind = Tag::Pre;
};

/// Expects one transition per sd-pair of the queried set, pairwise
/// overlapping in time.
PivotSet pivot_set(std::span<const Transition> group, Tag kind);

/// Evidence classification of a candidate scope per the pivot rules: a
/// non-empty pivot certifies the clique on that side.
struct ComponentEvidence {
  enum class Kind { Down, Up, Unknown, NotAClique };
  Kind kind = Kind::NotAClique;
  std::vector<Address> hubs;  // candidate hub addresses, sorted
};

/// Classifies a group of >= 2 transitions (one per sd-pair): Down when only
/// the pre pivot is non-empty, Up when only the post pivot is, Unknown when
/// both are (hubs = union), NotAClique otherwise. Throws Error(SetTooSmall).
ComponentEvidence classify_component(std::span<const Transition> group);

/// Deterministic DOT rendering; vertex label is the sd-pair id.
std::string to_dot(const EmpathyGraph& g);

}  // namespace empath
