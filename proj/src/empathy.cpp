#include "empath/empathy.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace empath {

namespace {

bool tagged_intersect(const Transition& a, const Transition& b, Tag kind) {
  // `changed` is sorted by (address, tag); walk both tagged slices.
  const std::vector<Address> va = a.tagged_vertices(kind);
  const std::vector<Address> vb = b.tagged_vertices(kind);
  std::vector<Address> common;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(common));
  return !common.empty();
}

bool empathic(const Transition& a, const Transition& b, Tag kind) {
  if (!a.interval.overlaps_halfopen(b.interval)) {
    throw Error(Errc::NoTemporalOverlap, "transitions of " + a.pair.id() + " and " + b.pair.id() +
                                             " share no instant");
  }
  return tagged_intersect(a, b, kind);
}

}  // namespace

bool pre_empathic(const Transition& a, const Transition& b) { return empathic(a, b, Tag::Pre); }

bool post_empathic(const Transition& a, const Transition& b) { return empathic(a, b, Tag::Post); }

bool EmpathyGraph::has_edge(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  auto e = std::minmax(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(e.first, e.second));
}

EmpathyGraph build_empathy_graph(std::span<const Transition> transitions, Timestamp at, Tag kind) {
  EmpathyGraph g;
  g.kind = kind;
  g.at = at;

  // One active transition per sd-pair: phase-1 transitions of a pair are
  // consecutive half-open windows, so at most one contains `at`.
  std::map<SdPair, const Transition*> active;
  for (const Transition& t : transitions) {
    if (t.interval.contains_halfopen(at) && t.has_tag(kind)) {
      active.emplace(t.pair, &t);
    }
  }

  std::vector<const Transition*> by_vertex;
  g.vertices.reserve(active.size());
  for (const auto& [pair, t] : active) {
    g.vertices.push_back(pair);
    by_vertex.push_back(t);
  }
  for (std::size_t i = 0; i < by_vertex.size(); ++i) {
    for (std::size_t j = i + 1; j < by_vertex.size(); ++j) {
      if (tagged_intersect(*by_vertex[i], *by_vertex[j], kind)) {
        g.edges.emplace_back(i, j);
      }
    }
  }
  return g;
}

std::vector<std::vector<SdPair>> connected_components(const EmpathyGraph& g) {
  std::vector<std::size_t> parent(g.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [i, j] : g.edges) parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<SdPair>> groups;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    groups[find(v)].push_back(g.vertices[v]);
  }
  std::vector<std::vector<SdPair>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  // vertices are sorted, so each component is sorted; order by smallest member
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

PivotSet pivot_set(std::span<const Transition> group, Tag kind) {
  PivotSet pivot;
  pivot.kind = kind;
  if (group.empty()) return pivot;
  pivot.members = group.front().tagged_vertices(kind);
  for (std::size_t i = 1; i < group.size() && !pivot.members.empty(); ++i) {
    std::vector<Address> next = group[i].tagged_vertices(kind);
    std::vector<Address> kept;
    std::set_intersection(pivot.members.begin(), pivot.members.end(), next.begin(), next.end(),
                          std::back_inserter(kept));
    pivot.members = std::move(kept);
  }
  return pivot;
}

ComponentEvidence classify_component(std::span<const Transition> group) {
  if (group.size() < 2) {
    throw Error(Errc::SetTooSmall, "component classification needs at least 2 sd-pairs");
  }
  const PivotSet pre = pivot_set(group, Tag::Pre);
  const PivotSet post = pivot_set(group, Tag::Post);

  ComponentEvidence ev;
  if (!pre.members.empty() && post.members.empty()) {
    ev.kind = ComponentEvidence::Kind::Down;
    ev.hubs = pre.members;
  } else if (pre.members.empty() && !post.members.empty()) {
    ev.kind = ComponentEvidence::Kind::Up;
    ev.hubs = post.members;
  } else if (!pre.members.empty() && !post.members.empty()) {
    ev.kind = ComponentEvidence::Kind::Unknown;
    ev.hubs.reserve(pre.members.size() + post.members.size());
    std::set_union(pre.members.begin(), pre.members.end(), post.members.begin(),
                   post.members.end(), std::back_inserter(ev.hubs));
  } else {
    ev.kind = ComponentEvidence::Kind::NotAClique;
  }
  return ev;
}

std::string to_dot(const EmpathyGraph& g) {
  std::ostringstream out;
  out << "// " << tag_name(g.kind) << "-empathy graph\n";
  out << "graph empathy {\n";
  for (const SdPair& v : g.vertices) {
    out << "  \"" << v.id() << "\";\n";
  }
  for (const auto& [i, j] : g.edges) {
    out << "  \"" << g.vertices[i].id() << "\" -- \"" << g.vertices[j].id() << "\";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace empath
