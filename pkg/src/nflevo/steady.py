"""Steady-state evolution loop shared by the tree and table function evolvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Generic, TypeVar

from .core import RngStream
from .duel import DuelResult

T = TypeVar("T")


@dataclass
class Evolved(Generic[T]):
    best: T
    fitness: float
    duel: DuelResult
    # best-of-population fitness after initialisation and after each insertion
    history: list[float] = field(default_factory=list)
    replacements: int = 0

    def __iter__(self):
        # allows `tree, fitness = evolve_...(...)`
        return iter((self.best, self.fitness))


def select_parent(fitness: list[float], rng: RngStream, method: str) -> int:
    if method == "uniform":
        return rng.below(len(fitness))
    if method == "tournament":
        i, j = rng.below(len(fitness)), rng.below(len(fitness))
        return i if fitness[i] <= fitness[j] else j
    raise ValueError(f"unknown selection {method!r}")


def worst_index(fitness: list[float]) -> int:
    worst = 0
    for i, f in enumerate(fitness):
        if f > fitness[worst]:
            worst = i
    return worst


def best_index(fitness: list[float]) -> int:
    best = 0
    for i, f in enumerate(fitness):
        if f < fitness[best]:
            best = i
    return best


def steady_state(
    init: Callable[[RngStream], T],
    crossover: Callable[[T, T, RngStream], T],
    mutate: Callable[[T, RngStream], T],
    evaluate: Callable[[T, RngStream], DuelResult],
    population_size: int,
    generations: int,
    crossover_probability: float,
    rng: RngStream,
    selection: str = "uniform",
    progress: Callable[[int, float], None] | None = None,
) -> Evolved[T]:
    """Each generation makes `population_size` insertion attempts.

    An offspring (crossover with the given probability, then mutation)
    replaces the current worst individual only if strictly better.
    Every duel gets its own stream seeded from `rng`.
    """
    pop: list[T] = []
    results: list[DuelResult] = []
    for _ in range(population_size):
        ind = init(rng)
        pop.append(ind)
        results.append(evaluate(ind, RngStream(rng.next_u64())))
    fitness = [r.fitness for r in results]
    history = [min(fitness)]
    replaced = 0
    for gen in range(generations):
        for _ in range(population_size):
            p1 = pop[select_parent(fitness, rng, selection)]
            if rng.uniform() < crossover_probability:
                p2 = pop[select_parent(fitness, rng, selection)]
                child = crossover(p1, p2, rng)
            else:
                child = p1
            child = mutate(child, rng)
            res = evaluate(child, RngStream(rng.next_u64()))
            w = worst_index(fitness)
            if res.fitness < fitness[w]:
                pop[w], results[w], fitness[w] = child, res, res.fitness
                replaced += 1
            history.append(min(fitness))
        if progress is not None:
            progress(gen + 1, history[-1])
    b = best_index(fitness)
    return Evolved(pop[b], fitness[b], results[b], history, replaced)
