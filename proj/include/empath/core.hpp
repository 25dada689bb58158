#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace empath {

using Timestamp = double;

/// Reason codes attached to rejections and thrown errors.
enum class Errc {
  Cycle,
  Empty,
  SourceMismatch,
  FirstHopMismatch,
  IdenticalPaths,
  UnsortedInput,
  DuplicateTimestamp,
  NoTemporalOverlap,
  SetTooSmall,
  LinkNotPresent,
  LinkAlreadyPresent,
  NoCommonHub,
  InterferingEvents,
  Malformed,
  NoActiveTransitions,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Canonical form of a textual address: lowercase, and IPv4 dotted quads
/// lose leading zeros per octet. Idempotent.
std::string canonical_address(std::string_view raw);

/// Opaque network identifier (an IP address or a simulator vertex label),
/// stored in canonical form. Ordering and equality are plain string
/// comparisons of the canonical text.
class Address {
 public:
  Address() = default;
  explicit Address(std::string_view raw) : value_(canonical_address(raw)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Address&, const Address&) = default;

 private:
  std::string value_;
};

/// A measured source-destination pair. Identity (equality, ordering) is
/// (probe, destination): probes behind NAT may report identical source
/// addresses, and a probe's source may drift between samples, without
/// changing which series the samples belong to.
struct SdPair {
  std::string probe;
  Address source;
  Address destination;

  /// Stable textual id used in event files, truth files and DOT labels.
  std::string id() const { return probe + "→" + destination.str(); }

  friend bool operator==(const SdPair& a, const SdPair& b) {
    return a.probe == b.probe && a.destination == b.destination;
  }
  friend bool operator<(const SdPair& a, const SdPair& b) {
    if (a.probe != b.probe) return a.probe < b.probe;
    return a.destination < b.destination;
  }
};

/// One timestamped traceroute measurement. hops[0] is the source; the
/// destination may be absent when the probe could not reach it.
struct TraceroutePath {
  SdPair pair;
  Timestamp timestamp = 0;
  std::vector<Address> hops;

  friend bool operator==(const TraceroutePath&, const TraceroutePath&) = default;
};

/// Checks the path invariants. Returns std::nullopt when the path is
/// acceptable, otherwise the rejection reason: Empty, SourceMismatch, or
/// Cycle (repeated addresses are treated as evidence of an anomaly and
/// rejected rather than silently kept).
std::optional<Errc> validate_path(const TraceroutePath& path);

enum class Tag : std::uint8_t { Pre, Post };

const char* tag_name(Tag t);

/// An address labeled with the side of a transition it was drawn from.
struct ExtendedAddress {
  Address address;
  Tag tag = Tag::Pre;

  friend bool operator==(const ExtendedAddress&, const ExtendedAddress&) = default;
  friend bool operator<(const ExtendedAddress& a, const ExtendedAddress& b) {
    if (a.address != b.address) return a.address < b.address;
    return a.tag < b.tag;
  }
};

/// A time window. Transition activity is half-open [start, end); candidate
/// and inferred event windows are closed [start, end].
struct Interval {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains_halfopen(Timestamp t) const { return start <= t && t < end; }
  bool contains_closed(Timestamp t) const { return start <= t && t <= end; }
  bool overlaps_halfopen(const Interval& o) const {
    return (start > o.start ? start : o.start) < (end < o.end ? end : o.end);
  }
  bool overlaps_closed(const Interval& o) const { return start <= o.end && o.start <= end; }

  friend bool operator==(const Interval&, const Interval&) = default;
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

enum class EventType { Down, Up, Unknown };

const char* event_type_name(EventType t);
std::optional<EventType> event_type_from(std::string_view name);

}  // namespace empath

template <>
struct std::hash<empath::Address> {
  std::size_t operator()(const empath::Address& a) const noexcept {
    return std::hash<std::string>{}(a.str());
  }
};

template <>
struct std::hash<empath::SdPair> {
  std::size_t operator()(const empath::SdPair& p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.probe);
    return h ^ (std::hash<empath::Address>{}(p.destination) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};
