"""Evolve test functions on which one black-box search algorithm beats another."""

import warnings

# numba probes an old system TBB on import and falls back to another threading layer
warnings.filterwarnings("ignore", message=".*TBB.*", module="numba")

from .algorithms import PRESETS, AlgorithmSpec, get_algorithm  # noqa: E402
from .core import Archive, BitGenotype, RngStream, RunOutcome  # noqa: E402
from .duel import DuelResult, duel  # noqa: E402
from .engine import EngineParams, run_nfl  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "PRESETS", "AlgorithmSpec", "get_algorithm", "Archive", "BitGenotype", "RngStream",
    "RunOutcome", "DuelResult", "duel", "EngineParams", "run_nfl",
]
