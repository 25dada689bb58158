#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "empath/core.hpp"
#include "empath/detector.hpp"

namespace empath {

struct ParseStats {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::map<Errc, std::size_t> rejected;
  std::size_t hop_reply_disagreements = 0;  // atlas hops answered by several addresses

  std::size_t rejected_total() const;
};

struct ParseResult {
  std::vector<TraceroutePath> paths;  // canonical (pair, timestamp) order
  ParseStats stats;
};

/// Internal trace format, one record per line:
///   <probe> <src> <dst> <ts> <hop> [<hop> ...]
/// "*" marks an unresponsive hop and is dropped by normalization. Malformed
/// lines, duplicate (probe, dst, ts) records and invalid paths are counted,
/// never fatal.
ParseResult parse_internal(std::istream& in);

/// RIPE-Atlas-style traceroute results: a JSON array or one JSON object per
/// line, each carrying prb_id, src_addr, dst_addr, timestamp and a result
/// list of per-hop reply lists. The first replying address wins a hop;
/// non-replying hops become "*". The probe's source address is prepended
/// since Atlas hop lists start at TTL 1.
ParseResult parse_atlas(std::istream& in);

/// Drops "*" hops. The caller rejects paths that come out empty.
std::vector<Address> normalize_hops(std::span<const std::string> raw);

std::string format_timestamp(Timestamp t);  // fixed 3 decimals
std::string write_traces(std::span<const TraceroutePath> paths);

/// Event format, one record per line:
///   <t1> <t2> <type> <impact> <addr,addr,...> <scope-id> [<scope-id> ...]
/// Timestamps are fixed 3-decimal; addresses and scope ids are sorted, so
/// serialization is canonical and read(write(x)) == x.
std::string write_events(std::span<const InferredEvent> events);
std::vector<InferredEvent> read_events(std::istream& in);  // throws Error(Malformed)

/// Splits a "probe→destination" id back into an sd-pair (source unknown).
SdPair sd_pair_from_id(const std::string& id);

}  // namespace empath
