#include "empath/core.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace empath {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Cycle: return "CYCLE";
    case Errc::Empty: return "EMPTY";
    case Errc::SourceMismatch: return "SOURCE_MISMATCH";
    case Errc::FirstHopMismatch: return "FIRST_HOP_MISMATCH";
    case Errc::IdenticalPaths: return "IDENTICAL_PATHS";
    case Errc::UnsortedInput: return "UNSORTED_INPUT";
    case Errc::DuplicateTimestamp: return "DUPLICATE_TIMESTAMP";
    case Errc::NoTemporalOverlap: return "NO_TEMPORAL_OVERLAP";
    case Errc::SetTooSmall: return "SET_TOO_SMALL";
    case Errc::LinkNotPresent: return "LINK_NOT_PRESENT";
    case Errc::LinkAlreadyPresent: return "LINK_ALREADY_PRESENT";
    case Errc::NoCommonHub: return "NO_COMMON_HUB";
    case Errc::InterferingEvents: return "INTERFERING_EVENTS";
    case Errc::Malformed: return "MALFORMED";
    case Errc::NoActiveTransitions: return "NO_ACTIVE_TRANSITIONS";
  }
  return "UNKNOWN_ERROR";
}

namespace {

// A dotted quad of decimal octets <= 255, leading zeros allowed.
bool parse_ipv4(std::string_view s, unsigned octets[4]) {
  std::size_t part = 0;
  std::size_t digits = 0;
  unsigned value = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      if (digits == 0 || part >= 4) return false;
      octets[part++] = value;
      value = 0;
      digits = 0;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(s[i])) || digits >= 4) return false;
    value = value * 10 + static_cast<unsigned>(s[i] - '0');
    if (value > 255) return false;
    ++digits;
  }
  return part == 4;
}

}  // namespace

std::string canonical_address(std::string_view raw) {
  unsigned octets[4];
  if (parse_ipv4(raw, octets)) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
      if (i) out += '.';
      out += std::to_string(octets[i]);
    }
    return out;
  }
  std::string out(raw);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<Errc> validate_path(const TraceroutePath& path) {
  if (path.hops.empty()) return Errc::Empty;
  if (path.hops.front() != path.pair.source) return Errc::SourceMismatch;
  std::unordered_set<std::string_view> seen;
  seen.reserve(path.hops.size());
  for (const Address& hop : path.hops) {
    if (!seen.insert(hop.str()).second) return Errc::Cycle;
  }
  return std::nullopt;
}

const char* tag_name(Tag t) { return t == Tag::Pre ? "pre" : "post"; }

const char* event_type_name(EventType t) {
  switch (t) {
    case EventType::Down: return "down";
    case EventType::Up: return "up";
    case EventType::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<EventType> event_type_from(std::string_view name) {
  if (name == "down") return EventType::Down;
  if (name == "up") return EventType::Up;
  if (name == "unknown") return EventType::Unknown;
  return std::nullopt;
}

}  // namespace empath
