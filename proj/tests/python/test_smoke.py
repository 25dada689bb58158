import pytest

import empath

FIGURE_OLD = ["1", "2", "3", "4", "5", "8", "9"]
FIGURE_NEW = ["1", "2", "6", "7", "8", "9"]

TOPOLOGY = "\n".join(
    [
        "edge s1 a1", "edge a1 h", "edge h b1", "edge b1 d1",
        "edge a1 c1", "edge c1 e1", "edge e1 b1",
        "edge s2 a2", "edge a2 h", "edge h b2", "edge b2 d2",
        "edge a2 c2", "edge c2 e2", "edge e2 b2",
        "probe p1 s1 d1",
        "probe p2 s2 d2",
    ]
)

SCHEDULE = "\n".join(
    [
        "sample p1 1 10",
        "sample p2 2 10",
        "event 70.2505 down a1,h;a2,h",
        "horizon 140",
    ]
)


def test_diff_matches_the_worked_example():
    d = empath.diff_paths(FIGURE_OLD, FIGURE_NEW)
    assert d.common_head == ["1", "2"]
    assert d.common_tail == ["8", "9"]
    assert d.delta_pre == ["2", "3", "4", "5", "8"]
    assert d.delta_post == ["2", "6", "7", "8"]


def test_prefix_suffix_and_canonicalization():
    assert empath.common_prefix(["1", "2", "3"], ["1", "2"]) == ["1", "2"]
    assert empath.common_suffix(["1", "2", "5"], ["1", "3", "5"]) == ["5"]
    assert empath.canonical_address("10.0.0.01") == "10.0.0.1"
    assert empath.canonical_address("2001:DB8::1") == "2001:db8::1"


def test_errors_surface_as_exceptions():
    with pytest.raises(empath.EmpathError):
        empath.diff_paths(["1", "2"], ["1", "2"])


def test_simulate_detect_validate_roundtrip():
    traces, truth = empath.simulate(TOPOLOGY, SCHEDULE, seed=1)
    assert traces and truth.startswith("truth ")

    events_text, stats = empath.detect_text(traces, threshold=0)
    assert stats["transitions"] == 2
    assert "down" in events_text

    report = empath.validate(events_text, truth)
    assert report["completeness"] == 1.0
    assert report["correctness"] == 1.0


def test_detect_on_records():
    records = [
        ("p1", "s1", "d1", 100.0, ["s1", "5", "6", "d1"]),
        ("p1", "s1", "d1", 200.0, ["s1", "5", "9", "6", "d1"]),
        ("p2", "s2", "d2", 100.0, ["s2", "4", "5", "6", "8", "d2"]),
        ("p2", "s2", "d2", 200.0, ["s2", "4", "10", "8", "d2"]),
    ]
    events, stats = empath.detect(records, threshold=0)
    assert stats["transitions"] == 2
    assert len(events) == 1
    assert events[0].type == "down"
    assert events[0].impact == 2
    assert set(events[0].addresses) == {"5", "6"}

    dot = empath.empathy_graph_dot(records, at=150.0, kind="pre")
    assert "--" in dot
    assert "--" not in empath.empathy_graph_dot(records, at=150.0, kind="post")
