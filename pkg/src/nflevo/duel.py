"""Meta-fitness of a test function: mean best value reached by algorithm A
minus that of algorithm B over independent runs. Negative means A wins."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .algorithms import AlgorithmSpec
from .core import ObjectiveFunction, RngStream
from .engine import EngineParams, run_batch


@dataclass(frozen=True)
class DuelResult:
    avg_a: float
    avg_b: float
    fitness: float
    runs: int
    best_a: np.ndarray = field(repr=False)
    best_b: np.ndarray = field(repr=False)


def mean_in_order(values: np.ndarray) -> float:
    """Left-to-right mean, independent of thread count or numpy's pairwise sum."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    return float(K.ordered_sum(values)) / values.shape[0]


def duel_seeds(rng: RngStream, runs: int, paired: bool = False) -> tuple[np.ndarray, np.ndarray]:
    seeds_a = rng.child_seeds(0, runs)
    seeds_b = seeds_a if paired else rng.child_seeds(runs, runs)
    return seeds_a, seeds_b


def duel(
    f: ObjectiveFunction,
    a: AlgorithmSpec,
    b: AlgorithmSpec,
    runs: int,
    engine: EngineParams,
    rng: RngStream | None = None,
    *,
    paired_seeds: bool = False,
    seeds_a: np.ndarray | None = None,
    seeds_b: np.ndarray | None = None,
    engine_b: EngineParams | None = None,
) -> DuelResult:
    """Run A and B `runs` times each on `f`.

    Seeds come from `rng` (A and B independent unless `paired_seeds`) or
    are given explicitly; `engine_b` lets B run with different limits.
    """
    for alg in (a, b):
        if alg.encoding_length != f.length:
            raise ValueError(f"{alg.name} encodes {alg.encoding_length} bits, function domain is {f.length}")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if seeds_a is None or seeds_b is None:
        if rng is None:
            raise ValueError("need an rng or explicit seed sets")
        da, db = duel_seeds(rng, runs, paired_seeds)
        seeds_a = da if seeds_a is None else seeds_a
        seeds_b = db if seeds_b is None else seeds_b
    if len(seeds_a) != runs or len(seeds_b) != runs:
        raise ValueError("seed sets must hold exactly `runs` seeds")
    best_a = run_batch(a, f, engine, seeds_a).best
    best_b = run_batch(b, f, engine_b or engine, seeds_b).best
    avg_a = mean_in_order(best_a)
    avg_b = mean_in_order(best_b)
    return DuelResult(avg_a, avg_b, avg_a - avg_b, runs, best_a, best_b)
