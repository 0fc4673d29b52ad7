"""Discrete test functions stored as full lookup tables {0,1}^n -> {0,1}^m.

File layout (`NFLF`, little-endian):

    b"NFLF" | version 0x01 | n (1 byte) | m (1 byte)
    | 2**n values, ceil(m/8) bytes each | CRC-32 of the values (4 bytes)
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .core import BitGenotype, RngStream

MAGIC = b"NFLF"
VERSION = 1
MAX_N = 30


class TableFormatError(ValueError):
    pass


class TableFunction:
    def __init__(self, values, n: int = 16, m: int = 8):
        if not 1 <= n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}]")
        if not 1 <= m <= 63:
            raise ValueError("m must be in [1, 63]")
        values = np.ascontiguousarray(values, dtype=np.uint64)
        if values.shape != (1 << n,):
            raise ValueError(f"table needs exactly 2**{n} values, got {values.shape}")
        if m < 64 and values.size and int(values.max()) >> m:
            raise ValueError(f"table value exceeds {m} bits")
        self.values = values
        self.n = n
        self.m = m
        self._as_float: np.ndarray | None = None

    @property
    def length(self) -> int:
        return self.n

    @classmethod
    def constant(cls, v: int = 0, n: int = 16, m: int = 8) -> TableFunction:
        return cls(np.full(1 << n, v, dtype=np.uint64), n, m)

    @classmethod
    def random(cls, rng: RngStream, n: int = 16, m: int = 8) -> TableFunction:
        return cls(K.random_table(1 << n, m, rng.state), n, m)

    def evaluate(self, g: BitGenotype) -> float:
        return float(eval_table(self, g))

    def kernel_args(self):
        if self._as_float is None:
            self._as_float = self.values.astype(np.float64)
        return K.OBJ_TABLE, self._as_float, _NO_OPS, _NO_CONSTS

    def __eq__(self, other) -> bool:
        if not isinstance(other, TableFunction):
            return NotImplemented
        return self.n == other.n and self.m == other.m and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"TableFunction(n={self.n}, m={self.m})"


_NO_OPS = np.zeros(0, np.int8)
_NO_CONSTS = np.zeros(0, np.float64)


def eval_table(f: TableFunction, g: BitGenotype) -> int:
    if g.length != f.n:
        raise ValueError(f"genotype has {g.length} bits, table expects {f.n}")
    return int(f.values[g.value])


def _check_same_shape(a: TableFunction, b: TableFunction) -> None:
    if (a.n, a.m) != (b.n, b.m):
        raise ValueError(f"table dimensions differ: ({a.n},{a.m}) vs ({b.n},{b.m})")


def uniform_crossover(a: TableFunction, b: TableFunction, rng: RngStream) -> TableFunction:
    """Each bit of the child comes from `a` or `b` with probability 1/2."""
    _check_same_shape(a, b)
    return TableFunction(K.table_crossover(a.values, b.values, a.m, rng.state), a.n, a.m)


def crossover_with_mask(a: TableFunction, b: TableFunction, mask) -> TableFunction:
    """Bits set in `mask` come from `b`, the rest from `a`."""
    _check_same_shape(a, b)
    mask = np.asarray(mask, dtype=np.uint64)
    return TableFunction((a.values & ~mask) | (b.values & mask), a.n, a.m)


def mutate_table(f: TableFunction, p: float, rng: RngStream) -> TableFunction:
    """Flip each of the 2**n * m bits independently with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("mutation probability must be in [0, 1]")
    return TableFunction(K.table_mutate(f.values, f.m, float(p), rng.state), f.n, f.m)


# ---------------------------------------------------------------- file format

def _value_bytes(m: int) -> int:
    return (m + 7) // 8


def to_bytes(f: TableFunction) -> bytes:
    w = _value_bytes(f.m)
    payload = f.values.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :w].tobytes()
    header = MAGIC + bytes([VERSION, f.n, f.m])
    return header + payload + struct.pack("<I", zlib.crc32(payload))


def from_bytes(data: bytes) -> TableFunction:
    if len(data) < 11 or data[:4] != MAGIC:
        raise TableFormatError("not an NFLF table (bad magic)")
    version, n, m = data[4], data[5], data[6]
    if version != VERSION:
        raise TableFormatError(f"unsupported NFLF version {version}")
    if not 1 <= n <= MAX_N or not 1 <= m <= 63:
        raise TableFormatError(f"bad dimensions n={n} m={m}")
    w = _value_bytes(m)
    size = (1 << n) * w
    if len(data) != 7 + size + 4:
        raise TableFormatError(f"expected {7 + size + 4} bytes, got {len(data)}")
    payload = data[7:7 + size]
    (crc,) = struct.unpack("<I", data[7 + size:])
    if zlib.crc32(payload) != crc:
        raise TableFormatError("checksum mismatch")
    raw = np.zeros((1 << n, 8), dtype=np.uint8)
    raw[:, :w] = np.frombuffer(payload, dtype=np.uint8).reshape(-1, w)
    values = raw.view("<u8").reshape(-1).astype(np.uint64)
    try:
        return TableFunction(values, n, m)
    except ValueError as e:
        raise TableFormatError(str(e)) from None


def save_table(f: TableFunction, path) -> None:
    Path(path).write_bytes(to_bytes(f))


def load_table(path) -> TableFunction:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise TableFormatError(f"{path}: {e.strerror or e}") from None
    try:
        return from_bytes(data)
    except TableFormatError as e:
        raise TableFormatError(f"{path}: {e}") from None


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class TableEaParams:
    population_size: int = 10
    generations: int = 10
    crossover_probability: float = 0.9
    per_bit_mutation: float = 0.01
    duel_runs: int = 100
    meta_runs: int = 30
    n: int = 16
    m: int = 8
    selection: str = "uniform"

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0 <= self.crossover_probability <= 1:
            raise ValueError("crossover_probability must be in [0, 1]")
        if not 0 <= self.per_bit_mutation <= 1:
            raise ValueError("per_bit_mutation must be in [0, 1]")
        if self.duel_runs < 1 or self.meta_runs < 1:
            raise ValueError("duel_runs and meta_runs must be >= 1")


def evolve_table_function(a, b, ea: TableEaParams, engine, rng: RngStream, *,
                          paired_seeds: bool = False, progress=None):
    """Evolve a lookup table on which `a` reaches lower minima than `b`.

    Returns an `Evolved` record (unpacks as `table, fitness`).
    """
    from .duel import duel
    from .steady import steady_state

    for alg in (a, b):
        if alg.encoding_length != ea.n:
            raise ValueError(f"{alg.name} encodes {alg.encoding_length} bits, tables take {ea.n}")

    def evaluate(f: TableFunction, stream: RngStream):
        return duel(f, a, b, ea.duel_runs, engine, stream, paired_seeds=paired_seeds)

    return steady_state(
        init=lambda r: TableFunction.random(r, ea.n, ea.m),
        crossover=uniform_crossover,
        mutate=lambda f, r: mutate_table(f, ea.per_bit_mutation, r),
        evaluate=evaluate,
        population_size=ea.population_size,
        generations=ea.generations,
        crossover_probability=ea.crossover_probability,
        rng=rng,
        selection=ea.selection,
        progress=progress,
    )
