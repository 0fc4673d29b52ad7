"""Single-individual search that counts only distinct visited solutions.

Each step mutates the current solution until the offspring is both new
(not in the archive) and accepted, giving up after `max_mutations`
attempts; it then jumps to uniformly random unvisited points instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .algorithms import AlgorithmSpec
from .core import Archive, BitGenotype, ObjectiveFunction, RngStream, RunOutcome


@dataclass(frozen=True)
class EngineParams:
    max_steps: int = 100
    max_mutations: int = 20
    # evaluated-but-rejected offspring are visited points; False gives the
    # looser accounting where only accepted moves and restarts are counted
    count_rejected: bool = True

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_mutations < 1:
            raise ValueError("max_mutations must be >= 1")

    def steps_for(self, length: int) -> int:
        return min(self.max_steps, 1 << length)


class Selection(NamedTuple):
    genotype: BitGenotype
    value: float
    restarted: bool


def _check_lengths(algorithm: AlgorithmSpec, objective: ObjectiveFunction) -> None:
    if algorithm.encoding_length != objective.length:
        raise ValueError(
            f"{algorithm.name} encodes {algorithm.encoding_length} bits but the "
            f"objective takes {objective.length}"
        )


def select_new_solution(
    curr: BitGenotype,
    curr_value: float,
    algorithm: AlgorithmSpec,
    objective: ObjectiveFunction,
    archive: Archive,
    max_mutations: int,
    rng: RngStream,
    count_rejected: bool = True,
) -> Selection | None:
    """Pick the next unvisited solution near `curr`.

    Returns None only when `count_rejected` fills the archive with
    rejected offspring before an accepted one is found.
    """
    for _ in range(max_mutations):
        cand = algorithm.mutate(curr, rng)
        if cand in archive:
            continue
        value = objective.evaluate(cand)
        if algorithm.accepts(curr_value, value):
            return Selection(cand, value, False)
        if count_rejected:
            archive.insert(cand)
            if archive.full:
                return None
    cand = rng.genotype(curr.length)
    while cand in archive:
        cand = rng.genotype(curr.length)
    return Selection(cand, objective.evaluate(cand), True)


def run_nfl_reference(
    algorithm: AlgorithmSpec,
    objective: ObjectiveFunction,
    params: EngineParams,
    rng: RngStream,
    archive: Archive | None = None,
) -> RunOutcome:
    """Plain-Python search loop; same draws and results as the compiled path.

    Pass an empty `archive` to inspect the visited points afterwards.
    """
    _check_lengths(algorithm, objective)
    L = objective.length
    if archive is None:
        archive = Archive(params.steps_for(L))
    elif len(archive) or archive.capacity != params.steps_for(L):
        raise ValueError("archive must be empty with capacity min(max_steps, 2**L)")
    curr = rng.genotype(L)
    archive.insert(curr)
    curr_value = objective.evaluate(curr)
    reinits = 0
    while not archive.full:
        sel = select_new_solution(curr, curr_value, algorithm, objective, archive,
                                  params.max_mutations, rng, params.count_rejected)
        if sel is None:
            break
        archive.insert(sel.genotype)
        reinits += sel.restarted
        curr, curr_value = sel.genotype, sel.value
    best = min(objective.evaluate(g) for g in archive)
    return RunOutcome(float(best), len(archive), reinits)


def _kernel_objective(objective: ObjectiveFunction):
    args = getattr(objective, "kernel_args", None)
    return args() if args is not None else None


def run_nfl(
    algorithm: AlgorithmSpec,
    objective: ObjectiveFunction,
    params: EngineParams,
    rng: RngStream,
) -> RunOutcome:
    """Run one search, on the compiled loop when the objective supports it."""
    _check_lengths(algorithm, objective)
    kobj = _kernel_objective(objective)
    if kobj is None:
        return run_nfl_reference(algorithm, objective, params, rng)
    mut, param, acc = algorithm.kernel_args
    best, distinct, reinits, evals = K.run_one(
        rng.state, objective.length, params.steps_for(objective.length),
        params.max_mutations, mut, param, acc, params.count_rejected, *kobj)
    return RunOutcome(float(best), int(distinct), int(reinits), int(evals))


@dataclass(frozen=True)
class BatchResult:
    best: np.ndarray
    distinct: np.ndarray
    reinits: np.ndarray


def run_batch(
    algorithm: AlgorithmSpec,
    objective: ObjectiveFunction,
    params: EngineParams,
    seeds: np.ndarray,
) -> BatchResult:
    """Independent runs, one per seed; results are in seed order."""
    _check_lengths(algorithm, objective)
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    kobj = _kernel_objective(objective)
    if kobj is None:
        outs = [run_nfl_reference(algorithm, objective, params, RngStream(int(s))) for s in seeds]
        return BatchResult(
            np.array([o.best_value for o in outs], dtype=np.float64),
            np.array([o.distinct_visited for o in outs], dtype=np.int64),
            np.array([o.reinit_count for o in outs], dtype=np.int64),
        )
    mut, param, acc = algorithm.kernel_args
    best, distinct, reinits, _ = K.run_many(
        seeds, objective.length, params.steps_for(objective.length),
        params.max_mutations, mut, param, acc, params.count_rejected, *kobj)
    return BatchResult(best, distinct, reinits)
