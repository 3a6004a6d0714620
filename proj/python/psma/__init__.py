"""Python front end for the precision-scalable MAC array simulator."""

import json

from . import _psma
from ._psma import (
    OverflowError,
    PsmaError,
    UnsupportedPreset,
    WorkloadTooSmall,
    __version__,
    golden,
    preset_names,
    rng_algorithm,
    supported_precisions,
)

__all__ = [
    "OverflowError",
    "PsmaError",
    "UnsupportedPreset",
    "WorkloadTooSmall",
    "__version__",
    "bench",
    "cost_report",
    "enumerate_designs",
    "golden",
    "preset",
    "preset_names",
    "rng_algorithm",
    "simulate",
    "supported_precisions",
    "validate",
]


def enumerate_designs(filter="all"):
    return json.loads(_psma.enumerate_designs(filter))


def validate(config):
    """Violation messages for a config dict; empty when legal."""
    return _psma.validate(json.dumps(config))


def preset(name):
    return json.loads(_psma.preset(name))


def cost_report(design, mode="", hs="broadcast-activations"):
    return json.loads(_psma.cost_report(design, mode, hs))


def simulate(design, precision, is_size=64, ws_size=64, os_size=256, seed=1, max_cycles=0,
             mode="", hs="broadcast-activations"):
    """Run one design (id or preset name) and compare against the golden reference."""
    return json.loads(_psma.simulate(design, precision, is_size, ws_size, os_size, seed,
                                     max_cycles, mode, hs))


def bench(filter="all", precisions=(), seeds=(1,), is_size=64, ws_size=64, os_size=256):
    """Returns (csv_text, all_pass)."""
    return _psma.bench_csv(filter, list(precisions), list(seeds), is_size, ws_size, os_size)
