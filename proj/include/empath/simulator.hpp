#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "empath/core.hpp"
#include "empath/detector.hpp"

namespace empath::sim {

using Link = std::pair<Address, Address>;  // normalized: first < second

Link make_link(const Address& a, const Address& b);

struct Topology {
  std::set<Address> vertices;
  std::set<Link> edges;
  std::vector<SdPair> probes;
  std::set<std::string> unreachable_ok;  // probes allowed to start disconnected

  void add_edge(const Address& a, const Address& b);
  void remove_edge(const Address& a, const Address& b);
  bool has_edge(const Address& a, const Address& b) const;
};

enum class Direction { Down, Up };

const char* direction_name(Direction d);

struct PhysicalEvent {
  Timestamp at = 0;
  Direction direction = Direction::Down;
  std::vector<Link> links;  // all sharing a hub vertex
  std::vector<Address> hubs;  // filled by event_hubs / generate; two for a single link
};

/// The common endpoint(s) of the event's links: both endpoints for a single
/// link, the unique shared vertex otherwise. Throws Error(NoCommonHub).
std::vector<Address> event_hubs(const PhysicalEvent& e);

/// Applies the link changes in place after checking the event invariants.
/// Throws Error(LinkNotPresent) / Error(LinkAlreadyPresent) /
/// Error(NoCommonHub). Up events may introduce new vertices.
void apply_event(Topology& topo, const PhysicalEvent& e);

/// Deterministic hop-count shortest path, breaking ties by the
/// lexicographically smallest next hop at every step. When dst is
/// unreachable the path is truncated: it runs toward the farthest reachable
/// vertex (ties again broken lexicographically), mimicking a traceroute that
/// never reaches its target.
std::vector<Address> route(const Topology& topo, const Address& src, const Address& dst);

struct ProbeSchedule {
  std::string probe;
  Timestamp first = 0;
  Timestamp period = 0;   // > 0
  Timestamp jitter = 0;   // < period / 2; uniform in [-jitter, +jitter] per sample
};

struct Schedule {
  std::vector<ProbeSchedule> probes;
  Timestamp horizon = 0;
  std::optional<std::uint64_t> seed;  // required when any jitter is nonzero
};

struct GroundTruth {
  PhysicalEvent event;
  std::vector<SdPair> scope;  // sd-pairs whose route changes across event.at, sorted
  bool visible = false;       // scope non-empty
};

struct SimulationOutput {
  std::vector<TraceroutePath> paths;   // canonical (pair, timestamp) order
  std::vector<GroundTruth> truths;
};

/// Samples every probe on its schedule against the topology as it evolves
/// through the events (sorted by time, ties allowed). Ground truth records
/// each event's scope, computed from the routes immediately before and after
/// its instant. Events sharing an instant are checked for non-interference:
/// their scopes must be disjoint, each affected route must be explained by
/// exactly one of them, and the changed portions must not share vertices on
/// either side; otherwise Error(InterferingEvents). Sample timestamps are
/// quantized to milliseconds; event instants are kept as given.
/// Deterministic for a fixed seed.
SimulationOutput generate(const Topology& topo, const Schedule& schedule,
                          std::vector<PhysicalEvent> events, std::uint64_t seed = 0);

struct ValidationReport {
  std::size_t truth_total = 0;
  std::size_t truth_visible = 0;
  std::size_t matched_visible = 0;  // visible truths matched by some inferred event
  std::size_t scope_exact = 0;      // matched with an inferred scope equal to the truth scope
  std::size_t type_correct = 0;     // matched with an inferred type equal to the direction
  std::size_t inferred_total = 0;
  std::size_t inferred_matched = 0;

  double completeness() const;
  double scope_exactness() const;
  double correctness() const;
  double type_accuracy() const;
};

/// Matches inferred events against ground truth: an inferred event matches a
/// truth event when its interval contains the event instant and its address
/// set intersects the hubs. Type is ignored for matching and scored
/// separately.
ValidationReport validate_inference(std::span<const InferredEvent> inferred,
                                    std::span<const GroundTruth> truths);

/// Topology file: lines `edge <a> <b>` and `probe <id> <src> <dst>
/// [unreachable-ok]`; `#` comments and blank lines ignored.
Topology parse_topology(std::istream& in);

struct ScheduleFile {
  Schedule schedule;
  std::vector<PhysicalEvent> events;
};

/// Schedule file: lines `sample <probe> <start> <period> [jitter]`,
/// `event <t> <down|up> <u,v>[;<u,v>...]`, `horizon <t>`, `seed <n>`.
ScheduleFile parse_schedule(std::istream& in);

/// Truth lines: `truth <t> <down|up> <hub,hub,...> <scope-size> <id...>`.
std::string write_truths(std::span<const GroundTruth> truths);
std::vector<GroundTruth> read_truths(std::istream& in);

}  // namespace empath::sim
