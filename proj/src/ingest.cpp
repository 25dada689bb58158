#include "empath/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace empath {

std::size_t ParseStats::rejected_total() const {
  std::size_t n = 0;
  for (const auto& [code, count] : rejected) n += count;
  return n;
}

std::string format_timestamp(Timestamp t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

std::vector<Address> normalize_hops(std::span<const std::string> raw) {
  std::vector<Address> hops;
  hops.reserve(raw.size());
  for (const std::string& h : raw) {
    if (h == "*") continue;
    hops.emplace_back(h);
  }
  return hops;
}

SdPair sd_pair_from_id(const std::string& id) {
  static const std::string arrow = "→";
  const std::size_t pos = id.find(arrow);
  if (pos == std::string::npos) {
    throw Error(Errc::Malformed, "sd-pair id without separator: " + id);
  }
  SdPair pair;
  pair.probe = id.substr(0, pos);
  pair.destination = Address(id.substr(pos + arrow.size()));
  return pair;
}

namespace {

void sort_canonical(std::vector<TraceroutePath>& paths) {
  std::stable_sort(paths.begin(), paths.end(),
                   [](const TraceroutePath& a, const TraceroutePath& b) {
                     if (!(a.pair == b.pair)) return a.pair < b.pair;
                     return a.timestamp < b.timestamp;
                   });
}

// Canonical ordering plus duplicate-timestamp rejection: the first record of
// a (probe, dst, ts) clash is kept, later ones are counted out.
void finalize(ParseResult& result) {
  sort_canonical(result.paths);
  std::vector<TraceroutePath> kept;
  kept.reserve(result.paths.size());
  for (TraceroutePath& p : result.paths) {
    if (!kept.empty() && kept.back().pair == p.pair && kept.back().timestamp == p.timestamp) {
      ++result.stats.rejected[Errc::DuplicateTimestamp];
      continue;
    }
    kept.push_back(std::move(p));
  }
  result.paths = std::move(kept);
  result.stats.accepted = result.paths.size();
}

bool accept_path(ParseResult& result, TraceroutePath path) {
  if (path.hops.empty()) {
    ++result.stats.rejected[Errc::Empty];
    return false;
  }
  if (auto reason = validate_path(path)) {
    ++result.stats.rejected[*reason];
    return false;
  }
  result.paths.push_back(std::move(path));
  return true;
}

bool parse_timestamp_token(const std::string& tok, Timestamp& out) {
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ParseResult parse_internal(std::istream& in) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    ++result.stats.records;
    if (tok.size() < 5) {
      ++result.stats.rejected[Errc::Malformed];
      continue;
    }
    TraceroutePath path;
    path.pair = {tok[0], Address(tok[1]), Address(tok[2])};
    if (!parse_timestamp_token(tok[3], path.timestamp)) {
      ++result.stats.rejected[Errc::Malformed];
      continue;
    }
    path.hops = normalize_hops(std::span<const std::string>(tok).subspan(4));
    accept_path(result, std::move(path));
  }
  finalize(result);
  return result;
}

namespace {

using nlohmann::json;

void parse_atlas_record(const json& record, ParseResult& result) {
  ++result.stats.records;
  try {
    if (!record.is_object() || !record.contains("timestamp") ||
        !record["timestamp"].is_number() || !record.contains("src_addr") ||
        !record.contains("dst_addr") || !record.contains("prb_id") ||
        !record.contains("result") || !record["result"].is_array()) {
      ++result.stats.rejected[Errc::Malformed];
      return;
    }
    TraceroutePath path;
    const json& prb = record["prb_id"];
    path.pair.probe = prb.is_string() ? prb.get<std::string>() : std::to_string(prb.get<long long>());
    path.pair.source = Address(record["src_addr"].get<std::string>());
    path.pair.destination = Address(record["dst_addr"].get<std::string>());
    path.timestamp = record["timestamp"].get<double>();

    // One reply list per TTL; the first replying address wins the hop.
    std::map<long long, std::string> by_ttl;
    for (const json& hop : record["result"]) {
      if (!hop.is_object() || !hop.contains("hop")) continue;
      const long long ttl = hop["hop"].get<long long>();
      std::string first;
      bool disagreement = false;
      if (hop.contains("result") && hop["result"].is_array()) {
        for (const json& reply : hop["result"]) {
          if (reply.is_object() && reply.contains("from") && reply["from"].is_string()) {
            const std::string from = reply["from"].get<std::string>();
            if (first.empty()) {
              first = from;
            } else if (from != first) {
              disagreement = true;
            }
          }
        }
      }
      if (disagreement) ++result.stats.hop_reply_disagreements;
      auto [it, inserted] = by_ttl.emplace(ttl, first.empty() ? "*" : first);
      if (!inserted && it->second == "*" && !first.empty()) it->second = first;
    }
    std::vector<std::string> raw{path.pair.source.str()};
    for (const auto& [ttl, addr] : by_ttl) raw.push_back(addr);
    path.hops = normalize_hops(raw);
    accept_path(result, std::move(path));
  } catch (const json::exception&) {
    ++result.stats.rejected[Errc::Malformed];
  }
}

}  // namespace

ParseResult parse_atlas(std::istream& in) {
  ParseResult result;
  // Either one JSON array or one object per line.
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  if (!in) {
    finalize(result);
    return result;
  }
  in.putback(first);
  if (first == '[') {
    json doc;
    try {
      in >> doc;
    } catch (const json::exception&) {
      ++result.stats.records;
      ++result.stats.rejected[Errc::Malformed];
      finalize(result);
      return result;
    }
    for (const json& record : doc) parse_atlas_record(record, result);
  } else {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception&) {
        ++result.stats.records;
        ++result.stats.rejected[Errc::Malformed];
        continue;
      }
      parse_atlas_record(record, result);
    }
  }
  finalize(result);
  return result;
}

std::string write_traces(std::span<const TraceroutePath> paths) {
  std::vector<TraceroutePath> ordered(paths.begin(), paths.end());
  sort_canonical(ordered);
  std::ostringstream out;
  for (const TraceroutePath& p : ordered) {
    out << p.pair.probe << ' ' << p.pair.source.str() << ' ' << p.pair.destination.str() << ' '
        << format_timestamp(p.timestamp);
    for (const Address& hop : p.hops) out << ' ' << hop.str();
    out << '\n';
  }
  return out.str();
}

std::string write_events(std::span<const InferredEvent> events) {
  std::ostringstream out;
  for (const InferredEvent& ev : events) {
    std::vector<Address> addresses = ev.addresses;
    std::sort(addresses.begin(), addresses.end());
    std::vector<SdPair> scope = ev.scope;
    std::sort(scope.begin(), scope.end());
    out << format_timestamp(ev.interval.start) << ' ' << format_timestamp(ev.interval.end) << ' '
        << event_type_name(ev.type) << ' ' << scope.size() << ' ';
    for (std::size_t i = 0; i < addresses.size(); ++i) {
      if (i) out << ',';
      out << addresses[i].str();
    }
    for (const SdPair& p : scope) out << ' ' << p.id();
    out << '\n';
  }
  return out.str();
}

std::vector<InferredEvent> read_events(std::istream& in) {
  std::vector<InferredEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    auto malformed = [&](const std::string& why) {
      return Error(Errc::Malformed, "event line " + std::to_string(lineno) + ": " + why);
    };
    if (tok.size() < 6) throw malformed("too few fields");
    InferredEvent ev;
    if (!parse_timestamp_token(tok[0], ev.interval.start) ||
        !parse_timestamp_token(tok[1], ev.interval.end) ||
        ev.interval.start > ev.interval.end) {
      throw malformed("bad interval");
    }
    const auto type = event_type_from(tok[2]);
    if (!type) throw malformed("bad type '" + tok[2] + "'");
    ev.type = *type;
    std::size_t impact = 0;
    try {
      impact = std::stoul(tok[3]);
    } catch (const std::exception&) {
      throw malformed("bad impact");
    }
    std::istringstream addrs(tok[4]);
    std::string addr;
    while (std::getline(addrs, addr, ',')) ev.addresses.emplace_back(addr);
    if (ev.addresses.empty()) throw malformed("empty address set");
    if (tok.size() != 5 + impact) throw malformed("impact does not match scope");
    for (std::size_t k = 5; k < tok.size(); ++k) {
      ev.scope.push_back(sd_pair_from_id(tok[k]));
    }
    std::sort(ev.addresses.begin(), ev.addresses.end());
    std::sort(ev.scope.begin(), ev.scope.end());
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace empath
