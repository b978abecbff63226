"""Synthesis and certification toolkit for round-robin observer networks.

Thin dict-level wrappers around the C++ core; heavy lifting stays native.
"""

import json

from ._rrhoc import (
    analyze_json,
    certify_json,
    rotate_round_robin,
    run,
    synthesize_json,
    uniform_max_delay,
)

__all__ = [
    "analyze",
    "analyze_json",
    "certify",
    "certify_json",
    "rotate_round_robin",
    "run",
    "synthesize",
    "synthesize_json",
    "uniform_max_delay",
]

__version__ = "0.1.0"


def synthesize(config: dict) -> dict:
    """Gain synthesis (fixed gamma or bisection) from a config dict."""
    return json.loads(synthesize_json(json.dumps(config)))


def analyze(config: dict, witness: dict) -> dict:
    """Certificate search for a fixed gain set."""
    return json.loads(analyze_json(json.dumps(config), json.dumps(witness)))


def certify(config: dict, witness: dict | None = None) -> dict:
    """Full certification battery; synthesizes first if no witness given."""
    witness_text = "" if witness is None else json.dumps(witness)
    return json.loads(certify_json(json.dumps(config), witness_text))
