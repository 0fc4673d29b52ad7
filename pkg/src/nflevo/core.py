"""Solution encodings, the visited-solution archive, objectives and the
seeded random stream shared by every search component."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, runtime_checkable

import numpy as np

from . import _kernels as K

SENTINEL = K.SENTINEL
MAX_BITS = 62


class ArchiveFull(Exception):
    """Raised when an insert would exceed the archive capacity; the run must stop."""


@dataclass(frozen=True, slots=True)
class BitGenotype:
    """Fixed-length bit string stored as an unsigned integer (bit 0 = LSB)."""

    value: int
    length: int

    def __post_init__(self):
        if not 1 <= self.length <= MAX_BITS:
            raise ValueError(f"genotype length must be in [1, {MAX_BITS}], got {self.length}")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitGenotype:
        bits = list(bits)
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
        return cls(value, len(bits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.length))

    def hamming(self, other: BitGenotype) -> int:
        if other.length != self.length:
            raise ValueError("genotype lengths differ")
        return (self.value ^ other.value).bit_count()

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")


def decode_unit_interval(g: BitGenotype) -> float:
    """Map a genotype to [0, 1] as u / (2**L - 1)."""
    return g.value / ((1 << g.length) - 1)


def encode_unit_interval(x: float, length: int = 32) -> BitGenotype:
    """Nearest fixed-point pattern for x, clamped to [0, 1]."""
    return BitGenotype(int(K.encode_unit(float(x), length)), length)


class Archive:
    """All distinct genotypes visited in one run, bounded by `capacity`."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("archive capacity must be positive")
        self.capacity = capacity
        self._members: set[int] = set()
        self._order: list[BitGenotype] = []

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, g: BitGenotype) -> bool:
        return g.value in self._members

    def __iter__(self):
        return iter(self._order)

    @property
    def full(self) -> bool:
        return len(self._order) >= self.capacity

    def insert(self, g: BitGenotype) -> bool:
        if g.value in self._members:
            return False
        if self.full:
            raise ArchiveFull(f"archive already holds {self.capacity} genotypes")
        self._members.add(g.value)
        self._order.append(g)
        return True


def archive_insert(archive: Archive, g: BitGenotype) -> bool:
    return archive.insert(g)


class RngStream:
    """Deterministic 64-bit random stream (SplitMix64).

    Child streams are keyed on (seed, index) only, so they do not depend on
    how many draws the parent has made.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.state = np.array([self.seed], dtype=np.uint64)

    def child(self, index: int) -> RngStream:
        return RngStream(int(K.derive_seed(np.uint64(self.seed), index)))

    def child_seeds(self, start: int, count: int) -> np.ndarray:
        return K.fill_seeds(np.uint64(self.seed), start, count)

    def next_u64(self) -> int:
        return int(K.next_u64(self.state))

    def uniform(self) -> float:
        return float(K.next_double(self.state))

    def normal(self) -> float:
        return float(K.next_normal(self.state))

    def below(self, n: int) -> int:
        if not 1 <= n <= 1 << 32:
            raise ValueError(f"range {n} outside [1, 2**32]")
        return int(K.next_below(self.state, n))

    def genotype(self, length: int) -> BitGenotype:
        return BitGenotype(int(K.next_bits(self.state, length)), length)

    def choice(self, seq):
        return seq[self.below(len(seq))]


@dataclass(frozen=True)
class RunOutcome:
    best_value: float
    distinct_visited: int
    reinit_count: int
    evaluations: int = 0


@runtime_checkable
class ObjectiveFunction(Protocol):
    """A pure map from genotypes of `length` bits to finite reals.

    Objectives that can also be evaluated by the compiled search loop
    implement `kernel_args()`, returning (kind, table, ops, consts).
    """

    length: int

    def evaluate(self, g: BitGenotype) -> float: ...


def finite_or_sentinel(v: float) -> float:
    return v if math.isfinite(v) else SENTINEL


class CallableObjective:
    """Wrap a Python function of the genotype. Only the reference engine runs these."""

    def __init__(self, fn: Callable[[BitGenotype], float], length: int):
        self.fn = fn
        self.length = length

    def evaluate(self, g: BitGenotype) -> float:
        return finite_or_sentinel(float(self.fn(g)))


class ArrayObjective:
    """Objective given by an explicit value per genotype (index = unsigned value)."""

    def __init__(self, values, length: int | None = None):
        values = np.asarray(values, dtype=np.float64)
        if length is None:
            length = int(values.shape[0]).bit_length() - 1
        if values.shape != (1 << length,):
            raise ValueError(f"need exactly 2**{length} values, got {values.shape[0]}")
        self.values = np.where(np.isfinite(values), values, SENTINEL)
        self.length = length

    def evaluate(self, g: BitGenotype) -> float:
        return float(self.values[g.value])

    def kernel_args(self):
        return K.OBJ_TABLE, self.values, _NO_OPS, _NO_CONSTS


_NO_OPS = np.zeros(0, np.int8)
_NO_CONSTS = np.zeros(0, np.float64)
_EMPTY_TABLE = np.zeros(1, np.float64)
