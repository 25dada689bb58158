#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "empath/detector.hpp"
#include "empath/empathy.hpp"
#include "empath/ingest.hpp"
#include "empath/lb_cleanup.hpp"
#include "empath/path_diff.hpp"
#include "empath/simulator.hpp"

namespace {

using namespace empath;
using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

void emit(const std::optional<std::string>& path, const std::string& content) {
  if (path) {
    write_file(*path, content);
  } else {
    std::cout << content;
  }
}

ParseResult load_traces(const std::string& path, const std::string& format) {
  std::ifstream in = open_input(path);
  ParseResult result = format == "atlas" ? parse_atlas(in) : parse_internal(in);
  if (result.stats.rejected_total() > 0) {
    std::cerr << "warning: " << result.stats.rejected_total() << " of " << result.stats.records
              << " records rejected\n";
  }
  return result;
}

json parse_stats_json(const ParseStats& st) {
  json rejected = json::object();
  for (const auto& [code, count] : st.rejected) rejected[errc_name(code)] = count;
  return {{"records", st.records},
          {"accepted", st.accepted},
          {"rejected", rejected},
          {"hop_reply_disagreements", st.hop_reply_disagreements}};
}

json run_stats_json(const RunStats& st) {
  json rejections = json::object();
  for (const auto& [code, count] : st.rejections) rejections[errc_name(code)] = count;
  return {{"paths_in", st.paths_in},
          {"paths_rejected", st.paths_rejected},
          {"rejections", rejections},
          {"sd_pairs", st.sd_pairs},
          {"transitions", st.transitions},
          {"first_hop_mismatches", st.first_hop_mismatches},
          {"shared_interior", st.shared_interior},
          {"candidates", st.candidates},
          {"candidates_pruned", st.candidates_pruned},
          {"events", st.events},
          {"phase_ms",
           {{"phase1", st.phase1_ms}, {"phase2", st.phase2_ms}, {"phase3", st.phase3_ms}}}};
}

void emit_stats(const std::optional<std::string>& path, const json& stats) {
  // Machine-readable stats are always produced; without a file they go to
  // stderr as a single line so event output stays clean.
  if (path) {
    write_file(*path, stats.dump(2) + "\n");
  } else {
    std::cerr << stats.dump() << "\n";
  }
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct CommonOpts {
  std::string input;
  std::string format = "internal";
  std::size_t threshold = 10;
  bool lb_clean = true;
  double lb_instability = 0.20;
  int threads = 1;
  std::optional<std::string> stats_path;
};

int cmd_detect(const CommonOpts& opt, const std::optional<std::string>& events_path) {
  ParseResult parsed = load_traces(opt.input, opt.format);
  json stats{{"config",
              {{"command", "detect"},
               {"format", opt.format},
               {"threshold", opt.threshold},
               {"lb_clean", opt.lb_clean},
               {"lb_instability", opt.lb_instability},
               {"threads", opt.threads}}},
             {"parse", parse_stats_json(parsed.stats)}};

  std::vector<TraceroutePath> paths = std::move(parsed.paths);
  if (opt.lb_clean) {
    const NextHopStats nh = build_nexthop_stats(paths);
    const BalancerMap map = identify_balancers(nh, opt.lb_instability);
    RewriteResult rewritten = rewrite_paths(paths, map);
    stats["lb"] = {{"flagged", map.representatives.size()},
                   {"hops_rewritten", rewritten.hops_rewritten},
                   {"duplicates_collapsed", rewritten.duplicates_collapsed},
                   {"dropped_cyclic", rewritten.dropped_cyclic}};
    paths = std::move(rewritten.paths);
  }

  const DetectResult result = detect_events(paths, {opt.threshold, opt.threads});
  stats["run"] = run_stats_json(result.stats);
  emit(events_path, write_events(result.events));
  emit_stats(opt.stats_path, stats);
  return 0;
}

int cmd_simulate(const std::string& topology_path, const std::string& schedule_path,
                 std::optional<std::uint64_t> seed_flag, const std::string& traces_path,
                 const std::string& truth_path) {
  std::ifstream topo_in = open_input(topology_path);
  const sim::Topology topo = sim::parse_topology(topo_in);
  std::ifstream sched_in = open_input(schedule_path);
  const sim::ScheduleFile file = sim::parse_schedule(sched_in);

  std::uint64_t seed = 0;
  if (seed_flag) {
    seed = *seed_flag;
  } else if (file.schedule.seed) {
    seed = *file.schedule.seed;
  } else {
    const bool jittered = std::any_of(file.schedule.probes.begin(), file.schedule.probes.end(),
                                      [](const sim::ProbeSchedule& p) { return p.jitter > 0; });
    if (jittered) {
      throw Error(Errc::Malformed,
                  "jittered schedules need a seed (a `seed` line or --seed)");
    }
  }

  const sim::SimulationOutput out = sim::generate(topo, file.schedule, file.events, seed);
  write_file(traces_path, write_traces(out.paths));
  write_file(truth_path, sim::write_truths(out.truths));
  std::cerr << "simulated " << out.paths.size() << " samples, " << out.truths.size()
            << " events (seed " << seed << ")\n";
  return 0;
}

int cmd_validate(const std::string& events_path, const std::string& truth_path,
                 const std::optional<std::string>& out_path) {
  std::ifstream events_in = open_input(events_path);
  const std::vector<InferredEvent> events = read_events(events_in);
  std::ifstream truth_in = open_input(truth_path);
  const std::vector<sim::GroundTruth> truths = sim::read_truths(truth_in);

  const sim::ValidationReport r = sim::validate_inference(events, truths);
  std::ostringstream human;
  human << "ground-truth events: " << r.truth_total << " (" << r.truth_visible << " visible)\n"
        << "inferred events:     " << r.inferred_total << "\n"
        << "matched visible:     " << r.matched_visible << " (scope-exact " << r.scope_exact
        << ", type-correct " << r.type_correct << ")\n";
  char line[256];
  std::snprintf(line, sizeof line,
                "validation completeness=%.4f scope_exactness=%.4f correctness=%.4f "
                "type_accuracy=%.4f visible=%zu matched=%zu inferred=%zu\n",
                r.completeness(), r.scope_exactness(), r.correctness(), r.type_accuracy(),
                r.truth_visible, r.matched_visible, r.inferred_total);
  std::cout << human.str() << line;
  if (out_path) write_file(*out_path, line);
  return 0;
}

int cmd_graph(const CommonOpts& opt, double at, const std::string& kind,
              const std::optional<std::string>& out_path) {
  ParseResult parsed = load_traces(opt.input, opt.format);
  std::vector<TraceroutePath> paths = std::move(parsed.paths);
  if (opt.lb_clean) {
    const BalancerMap map = identify_balancers(build_nexthop_stats(paths), opt.lb_instability);
    paths = rewrite_paths(paths, map).paths;
  }
  const TransitionScan scan = all_transitions(paths);
  const EmpathyGraph g =
      build_empathy_graph(scan.transitions, at, kind == "pre" ? Tag::Pre : Tag::Post);
  if (g.vertices.empty()) {
    std::cerr << "warning: " << errc_name(Errc::NoActiveTransitions) << " at "
              << format_timestamp(at) << "; emitting an empty graph\n";
  }
  emit(out_path, to_dot(g));
  return 0;
}

int cmd_report(const std::string& events_path, const std::optional<std::string>& out_path) {
  std::ifstream events_in = open_input(events_path);
  const std::vector<InferredEvent> events = read_events(events_in);
  std::ostringstream csv;
  csv << "midpoint,impact,addresses_id,type\n";
  for (const InferredEvent& ev : events) {
    std::string joined;
    for (const Address& a : ev.addresses) {
      if (!joined.empty()) joined += ',';
      joined += a.str();
    }
    char id[32];
    std::snprintf(id, sizeof id, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(joined)));
    csv << format_timestamp((ev.interval.start + ev.interval.end) / 2.0) << ',' << ev.impact()
        << ',' << id << ',' << event_type_name(ev.type) << "\n";
  }
  emit(out_path, csv.str());
  return 0;
}

int cmd_clean(const CommonOpts& opt, const std::optional<std::string>& out_path,
              const std::optional<std::string>& map_path) {
  ParseResult parsed = load_traces(opt.input, opt.format);
  const NextHopStats nh = build_nexthop_stats(parsed.paths);
  const BalancerMap map = identify_balancers(nh, opt.lb_instability);
  RewriteResult rewritten = rewrite_paths(parsed.paths, map);
  emit(out_path, write_traces(rewritten.paths));
  if (map_path) write_file(*map_path, write_balancer_map(map, nh));
  json stats{{"config",
              {{"command", "clean"},
               {"format", opt.format},
               {"lb_instability", opt.lb_instability}}},
             {"parse", parse_stats_json(parsed.stats)},
             {"lb",
              {{"flagged", map.representatives.size()},
               {"hops_rewritten", rewritten.hops_rewritten},
               {"duplicates_collapsed", rewritten.duplicates_collapsed},
               {"dropped_cyclic", rewritten.dropped_cyclic}}}};
  emit_stats(opt.stats_path, stats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"empath: traceroute path-change analysis and routing-event inference"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::optional<std::string> events_out;
  std::optional<std::string> output;
  std::optional<std::string> map_out;
  std::optional<std::uint64_t> seed;
  std::string topology_path, schedule_path, traces_path, truth_path;
  std::string events_path, truth_in_path;
  double at = 0;
  std::string kind = "pre";

  auto* detect = app.add_subcommand("detect", "Infer routing events from traceroute samples");
  detect->add_option("--input,-i", opt.input, "trace file")->required();
  detect->add_option("--format", opt.format, "input format")
      ->check(CLI::IsMember({"internal", "atlas"}))
      ->capture_default_str();
  detect->add_option("--threshold", opt.threshold, "report only events with impact > threshold")
      ->capture_default_str();
  detect->add_flag("--lb-clean,!--no-lb-clean", opt.lb_clean,
                   "apply load-balancer cleanup first (default: on)");
  detect->add_option("--lb-instability", opt.lb_instability,
                     "next-hop change ratio above which a node is a balancer")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  detect->add_option("--threads", opt.threads, "worker parallelism cap")->capture_default_str();
  detect->add_option("--events,-o", events_out, "event output file (default stdout)");
  detect->add_option("--stats", opt.stats_path, "stats JSON file (default one line on stderr)");

  auto* simulate = app.add_subcommand("simulate", "Generate traces with ground truth");
  simulate->add_option("--topology", topology_path, "topology file")->required();
  simulate->add_option("--schedule", schedule_path, "schedule/events file")->required();
  simulate->add_option("--seed", seed, "jitter RNG seed (overrides the file)");
  simulate->add_option("--traces", traces_path, "trace output file")->required();
  simulate->add_option("--truth", truth_path, "ground-truth output file")->required();

  auto* validate = app.add_subcommand("validate", "Score inferred events against ground truth");
  validate->add_option("--events", events_path, "event file")->required();
  validate->add_option("--truth", truth_in_path, "ground-truth file")->required();
  validate->add_option("--output,-o", output, "write the machine-readable line here too");

  auto* graph = app.add_subcommand("graph", "Emit an empathy graph as DOT");
  graph->add_option("--input,-i", opt.input, "trace file")->required();
  graph->add_option("--format", opt.format, "input format")
      ->check(CLI::IsMember({"internal", "atlas"}))
      ->capture_default_str();
  graph->add_option("--at", at, "query instant (seconds)")->required();
  graph->add_option("--kind", kind, "relation side")
      ->check(CLI::IsMember({"pre", "post"}))
      ->required();
  bool graph_lb = false;
  graph->add_flag("--lb-clean", graph_lb, "apply load-balancer cleanup first (off by default)");
  graph->add_option("--lb-instability", opt.lb_instability, "balancer change-ratio threshold")
      ->capture_default_str();
  graph->add_option("--output,-o", output, "DOT output file (default stdout)");

  auto* report = app.add_subcommand("report", "Render events as impact-over-time CSV");
  report->add_option("--events", events_path, "event file")->required();
  report->add_option("--output,-o", output, "CSV output file (default stdout)");

  auto* clean = app.add_subcommand("clean", "Standalone load-balancer rewrite");
  clean->add_option("--input,-i", opt.input, "trace file")->required();
  clean->add_option("--format", opt.format, "input format")
      ->check(CLI::IsMember({"internal", "atlas"}))
      ->capture_default_str();
  clean->add_option("--lb-instability", opt.lb_instability, "balancer change-ratio threshold")
      ->capture_default_str();
  clean->add_option("--output,-o", output, "rewritten trace output file (default stdout)");
  clean->add_option("--map", map_out, "balancer-map audit file");
  clean->add_option("--stats", opt.stats_path, "stats JSON file (default one line on stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (detect->parsed()) return cmd_detect(opt, events_out);
    if (simulate->parsed()) {
      return cmd_simulate(topology_path, schedule_path, seed, traces_path, truth_path);
    }
    if (validate->parsed()) return cmd_validate(events_path, truth_in_path, output);
    if (graph->parsed()) {
      opt.lb_clean = graph_lb;
      return cmd_graph(opt, at, kind, output);
    }
    if (report->parsed()) return cmd_report(events_path, output);
    if (clean->parsed()) return cmd_clean(opt, output, map_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
