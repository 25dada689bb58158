#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "empath/path_diff.hpp"

namespace empath::test {

inline Address addr(const std::string& s) { return Address(s); }

inline std::vector<Address> hops(std::initializer_list<const char*> labels) {
  std::vector<Address> out;
  for (const char* l : labels) out.emplace_back(l);
  return out;
}

inline SdPair probe(const std::string& id, const std::string& src, const std::string& dst) {
  return {id, Address(src), Address(dst)};
}

inline TraceroutePath sample(const SdPair& pair, Timestamp ts,
                             std::initializer_list<const char*> labels) {
  return {pair, ts, hops(labels)};
}

/// Transition with explicit changed portions, for exercising the sweep and
/// the empathy relation without full paths.
inline Transition raw_transition(const SdPair& pair, Timestamp start, Timestamp end,
                                 std::initializer_list<const char*> delta_pre,
                                 std::initializer_list<const char*> delta_post) {
  Transition t;
  t.pair = pair;
  t.interval = {start, end};
  t.diff.delta_pre = hops(delta_pre);
  t.diff.delta_post = hops(delta_post);
  t.changed = changed_set(t.diff);
  return t;
}

}  // namespace empath::test
