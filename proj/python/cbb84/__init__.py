"""Concatenated BB84 simulator: codes, protocol runs, and sampling statistics."""

from ._core import (
    CssPair,
    LinearCode,
    ParseError,
    ProtocolDesyncError,
    load_pair,
    replay,
    run_experiment,
    run_protocol,
    stats,
)

__all__ = [
    "CssPair",
    "LinearCode",
    "ParseError",
    "ProtocolDesyncError",
    "load_pair",
    "replay",
    "run_experiment",
    "run_protocol",
    "stats",
]
