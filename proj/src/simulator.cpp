#include "empath/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <sstream>

#include "empath/ingest.hpp"
#include "empath/path_diff.hpp"

namespace empath::sim {

Link make_link(const Address& a, const Address& b) {
  return a < b ? Link{a, b} : Link{b, a};
}

void Topology::add_edge(const Address& a, const Address& b) {
  vertices.insert(a);
  vertices.insert(b);
  edges.insert(make_link(a, b));
}

void Topology::remove_edge(const Address& a, const Address& b) { edges.erase(make_link(a, b)); }

bool Topology::has_edge(const Address& a, const Address& b) const {
  return edges.count(make_link(a, b)) > 0;
}

const char* direction_name(Direction d) { return d == Direction::Down ? "down" : "up"; }

std::vector<Address> event_hubs(const PhysicalEvent& e) {
  if (e.links.empty()) {
    throw Error(Errc::NoCommonHub, "event has no links");
  }
  if (e.links.size() == 1) {
    std::vector<Address> hubs{e.links.front().first, e.links.front().second};
    std::sort(hubs.begin(), hubs.end());
    return hubs;
  }
  std::vector<Address> common{e.links.front().first, e.links.front().second};
  std::sort(common.begin(), common.end());
  for (std::size_t i = 1; i < e.links.size(); ++i) {
    std::vector<Address> ends{e.links[i].first, e.links[i].second};
    std::sort(ends.begin(), ends.end());
    std::vector<Address> kept;
    std::set_intersection(common.begin(), common.end(), ends.begin(), ends.end(),
                          std::back_inserter(kept));
    common = std::move(kept);
  }
  if (common.empty()) {
    throw Error(Errc::NoCommonHub, "event links share no endpoint");
  }
  return common;
}

void apply_event(Topology& topo, const PhysicalEvent& e) {
  event_hubs(e);  // validates the hub invariant
  for (const Link& link : e.links) {
    const bool present = topo.edges.count(link) > 0;
    if (e.direction == Direction::Down && !present) {
      throw Error(Errc::LinkNotPresent,
                  "cannot remove absent link " + link.first.str() + "-" + link.second.str());
    }
    if (e.direction == Direction::Up && present) {
      throw Error(Errc::LinkAlreadyPresent,
                  "cannot add existing link " + link.first.str() + "-" + link.second.str());
    }
  }
  for (const Link& link : e.links) {
    if (e.direction == Direction::Down) {
      topo.edges.erase(link);
    } else {
      topo.add_edge(link.first, link.second);
    }
  }
}

namespace {

using Adjacency = std::map<Address, std::vector<Address>>;

Adjacency build_adjacency(const Topology& topo) {
  Adjacency adj;
  for (const Address& v : topo.vertices) adj[v];
  for (const Link& e : topo.edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& [v, neighbors] : adj) std::sort(neighbors.begin(), neighbors.end());
  return adj;
}

std::map<Address, int> bfs_distances(const Adjacency& adj, const Address& from) {
  std::map<Address, int> dist;
  dist[from] = 0;
  std::vector<Address> frontier{from};
  int d = 0;
  while (!frontier.empty()) {
    ++d;
    std::vector<Address> next;
    for (const Address& v : frontier) {
      auto it = adj.find(v);
      if (it == adj.end()) continue;
      for (const Address& n : it->second) {
        if (dist.emplace(n, d).second) next.push_back(n);
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

// Shortest path by hop count toward `target`, picking the lexicographically
// smallest next hop among those that strictly approach it.
std::vector<Address> greedy_walk(const Adjacency& adj, const Address& src, const Address& target,
                                 const std::map<Address, int>& dist_to_target) {
  std::vector<Address> path{src};
  Address cur = src;
  while (cur != target) {
    const int d = dist_to_target.at(cur);
    const Address* chosen = nullptr;
    for (const Address& n : adj.at(cur)) {  // neighbors sorted: first hit is lex-min
      auto it = dist_to_target.find(n);
      if (it != dist_to_target.end() && it->second == d - 1) {
        chosen = &n;
        break;
      }
    }
    path.push_back(*chosen);
    cur = *chosen;
  }
  return path;
}

std::vector<Address> route_adj(const Adjacency& adj, const Address& src, const Address& dst) {
  if (src == dst) return {src};
  const std::map<Address, int> to_dst = bfs_distances(adj, dst);
  if (to_dst.count(src)) {
    return greedy_walk(adj, src, dst, to_dst);
  }
  // Unreachable: truncate at the farthest reachable vertex (lex-min on ties).
  const std::map<Address, int> from_src = bfs_distances(adj, src);
  int max_d = 0;
  for (const auto& [v, d] : from_src) max_d = std::max(max_d, d);
  const Address* frontier = nullptr;
  for (const auto& [v, d] : from_src) {
    if (d == max_d) {
      frontier = &v;
      break;  // map order is lexicographic
    }
  }
  if (*frontier == src) return {src};
  return greedy_walk(adj, src, *frontier, bfs_distances(adj, *frontier));
}

Timestamp quantize_ms(Timestamp t) { return std::round(t * 1000.0) / 1000.0; }

std::vector<Address> vertex_set(std::span<const Address> seq) {
  std::vector<Address> v(seq.begin(), seq.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool disjoint(const std::vector<Address>& a, const std::vector<Address>& b) {
  std::vector<Address> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.empty();
}

}  // namespace

std::vector<Address> route(const Topology& topo, const Address& src, const Address& dst) {
  return route_adj(build_adjacency(topo), src, dst);
}

SimulationOutput generate(const Topology& topo, const Schedule& schedule,
                          std::vector<PhysicalEvent> events, std::uint64_t seed) {
  for (const ProbeSchedule& ps : schedule.probes) {
    if (ps.period <= 0) {
      throw Error(Errc::Malformed, "schedule for " + ps.probe + " has non-positive period");
    }
    if (ps.jitter < 0 || ps.jitter >= ps.period / 2) {
      throw Error(Errc::Malformed, "schedule for " + ps.probe + " has jitter >= period/2");
    }
    const bool known = std::any_of(topo.probes.begin(), topo.probes.end(),
                                   [&](const SdPair& p) { return p.probe == ps.probe; });
    if (!known) {
      throw Error(Errc::Malformed, "schedule references unknown probe " + ps.probe);
    }
  }

  {
    const Adjacency adj0 = build_adjacency(topo);
    for (const SdPair& p : topo.probes) {
      if (topo.unreachable_ok.count(p.probe)) continue;
      const std::vector<Address> r = route_adj(adj0, p.source, p.destination);
      if (r.empty() || r.back() != p.destination) {
        throw Error(Errc::Malformed, "probe " + p.probe +
                                         " cannot reach its destination at time 0 "
                                         "(mark it unreachable-ok to allow this)");
      }
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const PhysicalEvent& a, const PhysicalEvent& b) { return a.at < b.at; });

  SimulationOutput out;

  // Evolve the topology through the events, recording one routing epoch per
  // distinct event instant and the ground-truth scope of every event.
  struct Epoch {
    Timestamp from;
    std::map<std::string, std::vector<Address>> routes;  // probe id -> hops
  };
  std::vector<Epoch> epochs;

  Topology current = topo;
  auto routes_of = [&](const Topology& state) {
    const Adjacency adj = build_adjacency(state);
    std::map<std::string, std::vector<Address>> routes;
    for (const SdPair& p : state.probes) {
      routes[p.probe] = route_adj(adj, p.source, p.destination);
    }
    return routes;
  };
  epochs.push_back({-std::numeric_limits<Timestamp>::infinity(), routes_of(current)});

  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    while (j < events.size() && events[j].at == events[i].at) ++j;
    // Event instants are kept as given; only sample timestamps are quantized.
    const Timestamp at = events[i].at;

    const auto& routes_pre = epochs.back().routes;

    // Per-event scopes against the pre state.
    std::vector<std::vector<SdPair>> scopes;
    std::vector<std::map<std::string, std::vector<Address>>> single_routes;
    for (std::size_t k = i; k < j; ++k) {
      events[k].at = at;
      events[k].hubs = event_hubs(events[k]);
      Topology single = current;
      apply_event(single, events[k]);
      single_routes.push_back(routes_of(single));
      std::vector<SdPair> scope;
      for (const SdPair& p : current.probes) {
        if (routes_pre.at(p.probe) != single_routes.back().at(p.probe)) scope.push_back(p);
      }
      std::sort(scope.begin(), scope.end());
      scopes.push_back(std::move(scope));
    }

    for (std::size_t k = i; k < j; ++k) apply_event(current, events[k]);
    auto routes_post = routes_of(current);

    if (j - i > 1) {
      auto interfering = [&](const std::string& why) {
        return Error(Errc::InterferingEvents,
                     "events at t=" + format_timestamp(at) + " interfere: " + why);
      };
      // Scopes must partition the observed changes, and every member's final
      // route must be the one its own event produces.
      for (std::size_t a = 0; a < scopes.size(); ++a) {
        for (std::size_t b = a + 1; b < scopes.size(); ++b) {
          std::vector<SdPair> shared;
          std::set_intersection(scopes[a].begin(), scopes[a].end(), scopes[b].begin(),
                                scopes[b].end(), std::back_inserter(shared));
          if (!shared.empty()) throw interfering("scopes overlap on " + shared.front().id());
        }
      }
      for (std::size_t k = 0; k < scopes.size(); ++k) {
        for (const SdPair& p : scopes[k]) {
          if (routes_post.at(p.probe) != single_routes[k].at(p.probe)) {
            throw interfering("combined routing of " + p.id() + " differs from its own event");
          }
        }
      }
      for (const SdPair& p : current.probes) {
        if (routes_pre.at(p.probe) == routes_post.at(p.probe)) continue;
        const bool covered = std::any_of(scopes.begin(), scopes.end(), [&](const auto& s) {
          return std::binary_search(s.begin(), s.end(), p);
        });
        if (!covered) throw interfering("change of " + p.id() + " explained by no single event");
      }
      // Changed portions must not share vertices across events, on either side.
      std::vector<std::vector<Address>> pre_union(scopes.size()), post_union(scopes.size());
      for (std::size_t k = 0; k < scopes.size(); ++k) {
        std::vector<Address> pre_all, post_all;
        for (const SdPair& p : scopes[k]) {
          const PathDiff d = diff_paths(routes_pre.at(p.probe), single_routes[k].at(p.probe));
          for (const Address& v : vertex_set(d.delta_pre)) pre_all.push_back(v);
          for (const Address& v : vertex_set(d.delta_post)) post_all.push_back(v);
        }
        pre_union[k] = vertex_set(pre_all);
        post_union[k] = vertex_set(post_all);
      }
      for (std::size_t a = 0; a < scopes.size(); ++a) {
        for (std::size_t b = a + 1; b < scopes.size(); ++b) {
          if (!disjoint(pre_union[a], pre_union[b]) || !disjoint(post_union[a], post_union[b])) {
            throw interfering("changed portions share vertices");
          }
        }
      }
    }

    for (std::size_t k = i; k < j; ++k) {
      GroundTruth truth;
      truth.event = events[k];
      truth.scope = std::move(scopes[k - i]);
      truth.visible = !truth.scope.empty();
      out.truths.push_back(std::move(truth));
    }
    epochs.push_back({at, std::move(routes_post)});
    i = j;
  }

  // Sample every scheduled probe against the epoch its instant falls in.
  std::vector<ProbeSchedule> ordered = schedule.probes;
  std::sort(ordered.begin(), ordered.end(),
            [](const ProbeSchedule& a, const ProbeSchedule& b) { return a.probe < b.probe; });
  std::mt19937_64 rng(seed);
  for (const ProbeSchedule& ps : ordered) {
    const SdPair* pair = nullptr;
    for (const SdPair& p : topo.probes) {
      if (p.probe == ps.probe) pair = &p;
    }
    Timestamp last = -std::numeric_limits<Timestamp>::infinity();
    for (Timestamp t = ps.first; t <= schedule.horizon + 1e-9; t += ps.period) {
      Timestamp ts = t;
      if (ps.jitter > 0) {
        ts += std::uniform_real_distribution<Timestamp>(-ps.jitter, ps.jitter)(rng);
      }
      ts = quantize_ms(ts);
      if (ts <= last) continue;  // quantization collapsed two samples
      last = ts;
      std::size_t e = epochs.size();
      while (e > 0 && epochs[e - 1].from > ts) --e;
      const Epoch& epoch = epochs[e - 1];
      out.paths.push_back({*pair, ts, epoch.routes.at(ps.probe)});
    }
  }
  std::sort(out.paths.begin(), out.paths.end(),
            [](const TraceroutePath& a, const TraceroutePath& b) {
              if (!(a.pair == b.pair)) return a.pair < b.pair;
              return a.timestamp < b.timestamp;
            });
  return out;
}

double ValidationReport::completeness() const {
  return truth_visible == 0 ? 1.0
                            : static_cast<double>(matched_visible) /
                                  static_cast<double>(truth_visible);
}

double ValidationReport::scope_exactness() const {
  return truth_visible == 0 ? 1.0
                            : static_cast<double>(scope_exact) / static_cast<double>(truth_visible);
}

double ValidationReport::correctness() const {
  return inferred_total == 0 ? 1.0
                             : static_cast<double>(inferred_matched) /
                                   static_cast<double>(inferred_total);
}

double ValidationReport::type_accuracy() const {
  return matched_visible == 0 ? 1.0
                              : static_cast<double>(type_correct) /
                                    static_cast<double>(matched_visible);
}

ValidationReport validate_inference(std::span<const InferredEvent> inferred,
                                    std::span<const GroundTruth> truths) {
  ValidationReport report;
  report.truth_total = truths.size();
  report.inferred_total = inferred.size();

  auto matches = [](const InferredEvent& ev, const GroundTruth& truth) {
    if (!ev.interval.contains_closed(truth.event.at)) return false;
    std::vector<Address> hubs = truth.event.hubs;
    std::sort(hubs.begin(), hubs.end());
    return !disjoint(ev.addresses, hubs);
  };

  std::vector<bool> inferred_hit(inferred.size(), false);
  for (const GroundTruth& truth : truths) {
    if (!truth.visible) continue;
    ++report.truth_visible;
    bool matched = false;
    bool exact = false;
    bool typed = false;
    for (std::size_t i = 0; i < inferred.size(); ++i) {
      if (!matches(inferred[i], truth)) continue;
      matched = true;
      inferred_hit[i] = true;
      if (inferred[i].scope == truth.scope) exact = true;
      const EventType want =
          truth.event.direction == Direction::Down ? EventType::Down : EventType::Up;
      if (inferred[i].type == want) typed = true;
    }
    report.matched_visible += matched;
    report.scope_exact += exact;
    report.type_correct += typed;
  }
  // An inferred event matches any truth event, visible or not.
  for (std::size_t i = 0; i < inferred.size(); ++i) {
    if (inferred_hit[i]) {
      ++report.inferred_matched;
      continue;
    }
    for (const GroundTruth& truth : truths) {
      if (matches(inferred[i], truth)) {
        ++report.inferred_matched;
        break;
      }
    }
  }
  return report;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

Timestamp parse_time(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const Timestamp t = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return t;
  } catch (const std::exception&) {
    throw Error(Errc::Malformed, std::string("bad ") + what + " '" + tok + "'");
  }
}

std::vector<Link> parse_links(const std::string& list) {
  std::vector<Link> links;
  std::istringstream in(list);
  std::string part;
  while (std::getline(in, part, ';')) {
    const std::size_t comma = part.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == part.size()) {
      throw Error(Errc::Malformed, "bad link '" + part + "'");
    }
    links.push_back(make_link(Address(part.substr(0, comma)), Address(part.substr(comma + 1))));
  }
  if (links.empty()) throw Error(Errc::Malformed, "event with no links");
  return links;
}

}  // namespace

Topology parse_topology(std::istream& in) {
  Topology topo;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> tok = tokenize(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "edge" && tok.size() == 3) {
      topo.add_edge(Address(tok[1]), Address(tok[2]));
    } else if (tok[0] == "probe" && (tok.size() == 4 || tok.size() == 5)) {
      if (tok.size() == 5 && tok[4] != "unreachable-ok") {
        throw Error(Errc::Malformed, "topology line " + std::to_string(lineno));
      }
      SdPair pair{tok[1], Address(tok[2]), Address(tok[3])};
      topo.vertices.insert(pair.source);
      topo.vertices.insert(pair.destination);
      if (tok.size() == 5) topo.unreachable_ok.insert(pair.probe);
      topo.probes.push_back(std::move(pair));
    } else {
      throw Error(Errc::Malformed, "topology line " + std::to_string(lineno) + ": " + line);
    }
  }
  std::sort(topo.probes.begin(), topo.probes.end());
  return topo;
}

ScheduleFile parse_schedule(std::istream& in) {
  ScheduleFile file;
  std::string line;
  std::size_t lineno = 0;
  bool horizon_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> tok = tokenize(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "sample" && (tok.size() == 4 || tok.size() == 5)) {
      ProbeSchedule ps;
      ps.probe = tok[1];
      ps.first = parse_time(tok[2], "start");
      ps.period = parse_time(tok[3], "period");
      if (tok.size() == 5) ps.jitter = parse_time(tok[4], "jitter");
      file.schedule.probes.push_back(std::move(ps));
    } else if (tok[0] == "event" && tok.size() == 4) {
      PhysicalEvent e;
      e.at = parse_time(tok[1], "event time");
      if (tok[2] == "down") {
        e.direction = Direction::Down;
      } else if (tok[2] == "up") {
        e.direction = Direction::Up;
      } else {
        throw Error(Errc::Malformed, "bad event direction '" + tok[2] + "'");
      }
      e.links = parse_links(tok[3]);
      file.events.push_back(std::move(e));
    } else if (tok[0] == "horizon" && tok.size() == 2) {
      file.schedule.horizon = parse_time(tok[1], "horizon");
      horizon_seen = true;
    } else if (tok[0] == "seed" && tok.size() == 2) {
      try {
        file.schedule.seed = std::stoull(tok[1]);
      } catch (const std::exception&) {
        throw Error(Errc::Malformed, "bad seed '" + tok[1] + "'");
      }
    } else {
      throw Error(Errc::Malformed, "schedule line " + std::to_string(lineno) + ": " + line);
    }
  }
  if (!horizon_seen) {
    throw Error(Errc::Malformed, "schedule file declares no horizon");
  }
  return file;
}

std::string write_truths(std::span<const GroundTruth> truths) {
  std::ostringstream out;
  for (const GroundTruth& t : truths) {
    out << "truth " << format_timestamp(t.event.at) << ' ' << direction_name(t.event.direction)
        << ' ';
    std::vector<Address> hubs = t.event.hubs;
    std::sort(hubs.begin(), hubs.end());
    for (std::size_t i = 0; i < hubs.size(); ++i) {
      if (i) out << ',';
      out << hubs[i].str();
    }
    out << ' ' << t.scope.size();
    for (const SdPair& p : t.scope) out << ' ' << p.id();
    out << '\n';
  }
  return out.str();
}

std::vector<GroundTruth> read_truths(std::istream& in) {
  std::vector<GroundTruth> truths;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> tok = tokenize(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] != "truth" || tok.size() < 5) {
      throw Error(Errc::Malformed, "truth line " + std::to_string(lineno));
    }
    GroundTruth truth;
    truth.event.at = parse_time(tok[1], "time");
    if (tok[2] == "down") {
      truth.event.direction = Direction::Down;
    } else if (tok[2] == "up") {
      truth.event.direction = Direction::Up;
    } else {
      throw Error(Errc::Malformed, "truth line " + std::to_string(lineno));
    }
    std::istringstream hubs(tok[3]);
    std::string hub;
    while (std::getline(hubs, hub, ',')) truth.event.hubs.emplace_back(hub);
    std::size_t scope_size = 0;
    try {
      scope_size = std::stoul(tok[4]);
    } catch (const std::exception&) {
      throw Error(Errc::Malformed, "truth line " + std::to_string(lineno) + ": scope size");
    }
    if (tok.size() != 5 + scope_size) {
      throw Error(Errc::Malformed, "truth line " + std::to_string(lineno) + ": scope size");
    }
    for (std::size_t k = 0; k < scope_size; ++k) {
      truth.scope.push_back(sd_pair_from_id(tok[5 + k]));
    }
    std::sort(truth.scope.begin(), truth.scope.end());
    truth.visible = !truth.scope.empty();
    truths.push_back(std::move(truth));
  }
  return truths;
}

}  // namespace empath::sim
