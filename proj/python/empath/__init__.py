"""Traceroute path-change analysis: transition diffing, empathy relations,
routing-event inference, and a ground-truth network simulator."""

from ._core import (
    Event,
    EmpathError,
    PathDiff,
    canonical_address,
    common_prefix,
    common_suffix,
    detect,
    detect_text,
    diff_paths,
    empathy_graph_dot,
    simulate,
    validate,
)

__all__ = [
    "Event",
    "EmpathError",
    "PathDiff",
    "canonical_address",
    "common_prefix",
    "common_suffix",
    "detect",
    "detect_text",
    "diff_paths",
    "empathy_graph_dot",
    "simulate",
    "validate",
]
