#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "empath/detector.hpp"
#include "empath/empathy.hpp"
#include "empath/ingest.hpp"
#include "empath/lb_cleanup.hpp"
#include "empath/path_diff.hpp"
#include "empath/simulator.hpp"

namespace py = pybind11;
using namespace empath;

namespace {

std::vector<Address> to_addresses(const std::vector<std::string>& hops) {
  std::vector<Address> out;
  out.reserve(hops.size());
  for (const std::string& h : hops) out.emplace_back(h);
  return out;
}

std::vector<std::string> to_strings(const std::vector<Address>& addrs) {
  std::vector<std::string> out;
  out.reserve(addrs.size());
  for (const Address& a : addrs) out.push_back(a.str());
  return out;
}

using Record = std::tuple<std::string, std::string, std::string, double, std::vector<std::string>>;

std::vector<TraceroutePath> to_paths(const std::vector<Record>& records) {
  std::vector<TraceroutePath> paths;
  paths.reserve(records.size());
  for (const auto& [probe, src, dst, ts, hops] : records) {
    paths.push_back({{probe, Address(src), Address(dst)}, ts, to_addresses(hops)});
  }
  return paths;
}

py::dict stats_dict(const RunStats& st) {
  py::dict d;
  d["paths_in"] = st.paths_in;
  d["paths_rejected"] = st.paths_rejected;
  d["sd_pairs"] = st.sd_pairs;
  d["transitions"] = st.transitions;
  d["first_hop_mismatches"] = st.first_hop_mismatches;
  d["candidates"] = st.candidates;
  d["candidates_pruned"] = st.candidates_pruned;
  d["events"] = st.events;
  d["phase1_ms"] = st.phase1_ms;
  d["phase2_ms"] = st.phase2_ms;
  d["phase3_ms"] = st.phase3_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Traceroute path-change analysis: transition diffing, empathy "
            "relations, event inference, and a ground-truth network simulator.";

  py::class_<PathDiff>(m, "PathDiff")
      .def_property_readonly("common_head",
                             [](const PathDiff& d) { return to_strings(d.common_head); })
      .def_property_readonly("common_tail",
                             [](const PathDiff& d) { return to_strings(d.common_tail); })
      .def_property_readonly("delta_pre", [](const PathDiff& d) { return to_strings(d.delta_pre); })
      .def_property_readonly("delta_post",
                             [](const PathDiff& d) { return to_strings(d.delta_post); })
      .def("__repr__", [](const PathDiff& d) {
        std::ostringstream out;
        out << "PathDiff(delta_pre=[";
        for (const auto& a : d.delta_pre) out << a.str() << ' ';
        out << "], delta_post=[";
        for (const auto& a : d.delta_post) out << a.str() << ' ';
        out << "])";
        return out.str();
      });

  py::class_<InferredEvent>(m, "Event")
      .def_property_readonly("t1", [](const InferredEvent& e) { return e.interval.start; })
      .def_property_readonly("t2", [](const InferredEvent& e) { return e.interval.end; })
      .def_property_readonly("type",
                             [](const InferredEvent& e) { return event_type_name(e.type); })
      .def_property_readonly("impact", &InferredEvent::impact)
      .def_property_readonly("addresses",
                             [](const InferredEvent& e) { return to_strings(e.addresses); })
      .def_property_readonly("scope", [](const InferredEvent& e) {
        std::vector<std::string> ids;
        for (const SdPair& p : e.scope) ids.push_back(p.id());
        return ids;
      })
      .def("__repr__", [](const InferredEvent& e) {
        std::ostringstream out;
        out << "Event(" << format_timestamp(e.interval.start) << ", "
            << format_timestamp(e.interval.end) << ", " << event_type_name(e.type)
            << ", impact=" << e.impact() << ")";
        return out.str();
      });

  m.def("canonical_address", &canonical_address, py::arg("raw"));

  m.def(
      "common_prefix",
      [](const std::vector<std::string>& p, const std::vector<std::string>& q) {
        return to_strings(common_prefix(to_addresses(p), to_addresses(q)));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "common_suffix",
      [](const std::vector<std::string>& p, const std::vector<std::string>& q) {
        return to_strings(common_suffix(to_addresses(p), to_addresses(q)));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "diff_paths",
      [](const std::vector<std::string>& p, const std::vector<std::string>& q) {
        return diff_paths(to_addresses(p), to_addresses(q));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "detect",
      [](const std::vector<Record>& records, std::size_t threshold, bool lb_clean,
         double lb_instability, int threads) {
        std::vector<TraceroutePath> paths = to_paths(records);
        if (lb_clean) {
          const NextHopStats stats = build_nexthop_stats(paths);
          const BalancerMap map = identify_balancers(stats, lb_instability);
          paths = rewrite_paths(paths, map).paths;
        }
        DetectResult result = detect_events(paths, {threshold, threads});
        return py::make_tuple(result.events, stats_dict(result.stats));
      },
      py::arg("records"), py::arg("threshold") = 0, py::arg("lb_clean") = false,
      py::arg("lb_instability") = 0.20, py::arg("threads") = 1,
      "Run the three-phase detection pipeline over (probe, src, dst, ts, hops) records.");

  m.def(
      "detect_text",
      [](const std::string& traces, std::size_t threshold, bool lb_clean, double lb_instability,
         int threads) {
        std::istringstream in(traces);
        ParseResult parsed = parse_internal(in);
        std::vector<TraceroutePath> paths = std::move(parsed.paths);
        if (lb_clean) {
          const BalancerMap map =
              identify_balancers(build_nexthop_stats(paths), lb_instability);
          paths = rewrite_paths(paths, map).paths;
        }
        DetectResult result = detect_events(paths, {threshold, threads});
        return py::make_tuple(write_events(result.events), stats_dict(result.stats));
      },
      py::arg("traces"), py::arg("threshold") = 0, py::arg("lb_clean") = false,
      py::arg("lb_instability") = 0.20, py::arg("threads") = 1,
      "detect() over internal-format trace text, returning event-format text.");

  m.def(
      "empathy_graph_dot",
      [](const std::vector<Record>& records, double at, const std::string& kind) {
        if (kind != "pre" && kind != "post") {
          throw py::value_error("kind must be 'pre' or 'post'");
        }
        const std::vector<TraceroutePath> paths = to_paths(records);
        const TransitionScan scan = all_transitions(paths);
        return to_dot(
            build_empathy_graph(scan.transitions, at, kind == "pre" ? Tag::Pre : Tag::Post));
      },
      py::arg("records"), py::arg("at"), py::arg("kind"));

  m.def(
      "simulate",
      [](const std::string& topology, const std::string& schedule_text,
         std::optional<std::uint64_t> seed) {
        std::istringstream topo_in(topology);
        std::istringstream sched_in(schedule_text);
        const sim::Topology topo = sim::parse_topology(topo_in);
        const sim::ScheduleFile file = sim::parse_schedule(sched_in);
        std::uint64_t chosen = seed.value_or(file.schedule.seed.value_or(0));
        const sim::SimulationOutput out =
            sim::generate(topo, file.schedule, file.events, chosen);
        return py::make_tuple(write_traces(out.paths), sim::write_truths(out.truths));
      },
      py::arg("topology"), py::arg("schedule"), py::arg("seed") = std::nullopt,
      "Render a topology/schedule pair into trace and ground-truth text.");

  m.def(
      "validate",
      [](const std::string& events_text, const std::string& truth_text) {
        std::istringstream events_in(events_text);
        std::istringstream truth_in(truth_text);
        const std::vector<InferredEvent> events = read_events(events_in);
        const std::vector<sim::GroundTruth> truths = sim::read_truths(truth_in);
        const sim::ValidationReport report = sim::validate_inference(events, truths);
        py::dict d;
        d["completeness"] = report.completeness();
        d["scope_exactness"] = report.scope_exactness();
        d["correctness"] = report.correctness();
        d["type_accuracy"] = report.type_accuracy();
        d["truth_visible"] = report.truth_visible;
        d["matched_visible"] = report.matched_visible;
        d["inferred_total"] = report.inferred_total;
        return d;
      },
      py::arg("events"), py::arg("truth"));

  py::register_exception<Error>(m, "EmpathError");
}
