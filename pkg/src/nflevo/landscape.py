"""Ruggedness of table functions read as one variable over [0, 2**n - 1].

A "peak" is a local minimum: both neighbours strictly higher. The two
endpoints count when their single neighbour is strictly higher.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels as K
from .tables import TableFunction, load_table

LABEL = "local optima (minima): both neighbours strictly higher; endpoints: single neighbour strictly higher"


@dataclass(frozen=True)
class LandscapeReport:
    peak_count: int
    peak_fraction: float
    n: int
    m: int


def count_peaks(values) -> int:
    """Number of strict local minima of a 1-D sequence (or a TableFunction)."""
    if isinstance(values, TableFunction):
        values = values.values
    arr = np.asarray(values)
    if arr.dtype.kind not in "iu":
        arr = arr.astype(np.float64)
    return int(K.count_minima(np.ascontiguousarray(arr)))


def analyse(f: TableFunction) -> LandscapeReport:
    c = count_peaks(f.values)
    return LandscapeReport(c, c / (1 << f.n), f.n, f.m)


def expected_peak_fraction(n: int = 16, m: int = 8) -> Fraction:
    """Exact mean peak fraction of a table with iid uniform m-bit entries."""
    levels = 1 << m
    interior = Fraction(0)
    endpoint = Fraction(0)
    for v in range(levels):
        above = Fraction(levels - 1 - v, levels)
        interior += above * above
        endpoint += above
    interior /= levels
    endpoint /= levels
    size = 1 << n
    return (interior * (size - 2) + 2 * endpoint) / size


@dataclass
class LandscapeSummary:
    files: list[str]
    reports: list[LandscapeReport]

    @property
    def mean_count(self) -> float:
        return sum(r.peak_count for r in self.reports) / len(self.reports)

    @property
    def mean_fraction(self) -> float:
        return sum(r.peak_fraction for r in self.reports) / len(self.reports)


def landscape_report(files) -> LandscapeSummary:
    """Per-file peak counts; raises TableFormatError naming any bad file."""
    files = [Path(p) for p in files]
    if not files:
        raise ValueError("no table files given")
    reports = [analyse(load_table(p)) for p in files]
    return LandscapeSummary([str(p) for p in files], reports)
