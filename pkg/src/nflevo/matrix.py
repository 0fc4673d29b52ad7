"""All-pairs experiment over the B_k algorithms: for each ordered pair,
evolve tables on which the row algorithm beats the column algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algorithms import AlgorithmSpec, B_NAMES, get_algorithm
from .core import RngStream
from .duel import mean_in_order
from .engine import EngineParams
from .tables import TableEaParams, evolve_table_function


@dataclass
class MatrixReport:
    algorithms: list[str]
    meta_runs: int
    mean: np.ndarray  # NaN on the diagonal
    std: np.ndarray
    # (row, col) -> best fitness of each meta-run
    samples: dict[tuple[str, str], list[float]] = field(default_factory=dict, repr=False)

    def cell(self, row: str, col: str) -> float:
        return float(self.mean[self.algorithms.index(row), self.algorithms.index(col)])

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for i, r in enumerate(self.algorithms):
            for j, c in enumerate(self.algorithms):
                if i != j:
                    rows.append([r, c, repr(float(self.mean[i, j])), repr(float(self.std[i, j])),
                                 str(self.meta_runs)])
        return rows

    def to_text(self, decimals: int = 2) -> str:
        """Aligned square table; rows are A, columns are B, diagonal is '-'."""
        cells = [[""] + list(self.algorithms)]
        for i, r in enumerate(self.algorithms):
            line = [r]
            for j in range(len(self.algorithms)):
                line.append("-" if i == j else f"{self.mean[i, j]:.{decimals}f}")
            cells.append(line)
        width = max(len(s) for row in cells for s in row)
        return "\n".join(" ".join(s.rjust(width) for s in row) for row in cells) + "\n"


def _sample_std(values: list[float], mean: float) -> float:
    if len(values) < 2:
        return 0.0
    ss = 0.0
    for v in values:
        ss += (v - mean) ** 2
    return math.sqrt(ss / (len(values) - 1))


def matrix_experiment(
    params: TableEaParams,
    engine: EngineParams,
    rng: RngStream,
    algorithms: Sequence[str] = B_NAMES,
    *,
    bk_semantics: str = "shell",
    paired_seeds: bool = False,
    progress: Callable[[str, str, int, float], None] | None = None,
) -> MatrixReport:
    """Meta-run r of pair (i, j) uses stream rng.child(i * k + j).child(r)."""
    names = list(algorithms)
    specs: list[AlgorithmSpec] = [get_algorithm(n, bk_semantics, params.n) for n in names]
    k = len(names)
    mean = np.full((k, k), np.nan)
    std = np.full((k, k), np.nan)
    samples = {}
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            pair_rng = rng.child(i * k + j)
            fits = []
            for r in range(params.meta_runs):
                res = evolve_table_function(specs[i], specs[j], params, engine, pair_rng.child(r),
                                            paired_seeds=paired_seeds)
                fits.append(res.fitness)
                if progress is not None:
                    progress(names[i], names[j], r, res.fitness)
            m = mean_in_order(np.array(fits))
            mean[i, j] = m
            std[i, j] = _sample_std(fits, m)
            samples[(names[i], names[j])] = fits
    return MatrixReport(names, params.meta_runs, mean, std, samples)
