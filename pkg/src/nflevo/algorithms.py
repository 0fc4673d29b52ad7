"""Comparison algorithms: an encoding length, a mutation operator and an
acceptance rule, plugged into the single-individual search loop."""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels as K
from .core import BitGenotype, RngStream

MUTATIONS = ("gaussian", "per_bit", "k_flips", "uniform")
ACCEPTANCES = ("elitist", "accept_all")

_MUT_CODES = {"gaussian": K.GAUSSIAN, "per_bit": K.PER_BIT, "k_flips": K.K_FLIPS, "uniform": K.UNIFORM}
_ACC_CODES = {"elitist": K.ELITIST, "accept_all": K.ACCEPT_ALL}


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    encoding_length: int
    mutation: str
    parameter: float
    acceptance: str = "elitist"

    def __post_init__(self):
        L = self.encoding_length
        if not 1 <= L <= 62:
            raise ValueError(f"{self.name}: encoding length {L} out of range")
        if self.mutation not in MUTATIONS:
            raise ValueError(f"{self.name}: unknown mutation {self.mutation!r}")
        if self.acceptance not in ACCEPTANCES:
            raise ValueError(f"{self.name}: unknown acceptance {self.acceptance!r}")
        p = self.parameter
        if self.mutation == "gaussian" and not p > 0:
            raise ValueError(f"{self.name}: sigma must be > 0")
        if self.mutation == "per_bit" and not 0 < p <= 1:
            raise ValueError(f"{self.name}: flip probability must be in (0, 1]")
        if self.mutation == "k_flips" and not (p == int(p) and 1 <= p <= L):
            raise ValueError(f"{self.name}: k must be an integer in [1, {L}]")

    @property
    def kernel_args(self) -> tuple[int, float, int]:
        return _MUT_CODES[self.mutation], float(self.parameter), _ACC_CODES[self.acceptance]

    def mutate(self, g: BitGenotype, rng: RngStream) -> BitGenotype:
        kind, param, _ = self.kernel_args
        return BitGenotype(int(K.mutate(g.value, g.length, kind, param, rng.state)), g.length)

    def accepts(self, parent_value: float, offspring_value: float) -> bool:
        if self.acceptance == "accept_all":
            return True
        return accept_elitist(parent_value, offspring_value)

    def describe(self) -> str:
        return f"{self.name}: L={self.encoding_length} {self.mutation}({self.parameter:g}) {self.acceptance}"


def mutate_gaussian(g: BitGenotype, sigma: float, rng: RngStream) -> BitGenotype:
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    return BitGenotype(int(K.mutate_gaussian(g.value, g.length, sigma, rng.state)), g.length)


def mutate_per_bit(g: BitGenotype, p_m: float, rng: RngStream) -> BitGenotype:
    if not 0 <= p_m <= 1:
        raise ValueError("flip probability must be in [0, 1]")
    return BitGenotype(int(K.mutate_per_bit(g.value, g.length, p_m, rng.state)), g.length)


def mutate_k_flips(g: BitGenotype, k: int, rng: RngStream) -> BitGenotype:
    if not 1 <= k <= g.length:
        raise ValueError(f"k must be in [1, {g.length}]")
    return BitGenotype(int(K.mutate_k_flips(g.value, g.length, k, rng.state)), g.length)


def accept_elitist(parent_value: float, offspring_value: float) -> bool:
    # minimisation; ties move the search along plateaus
    return offspring_value <= parent_value


def b_k(k: int, length: int = 16, semantics: str = "shell") -> AlgorithmSpec:
    """B_k: k bit flips per chromosome.

    "shell" flips exactly k distinct positions; "per-bit" flips each bit
    with probability k/length.
    """
    if semantics == "shell":
        return AlgorithmSpec(f"B{k}", length, "k_flips", float(k))
    if semantics == "per-bit":
        return AlgorithmSpec(f"B{k}", length, "per_bit", k / length)
    raise ValueError(f"unknown B_k semantics {semantics!r}")


PRESETS: dict[str, AlgorithmSpec] = {
    "A1": AlgorithmSpec("A1", 32, "gaussian", 0.001),
    "A2": AlgorithmSpec("A2", 32, "gaussian", 0.01),
    "A3": AlgorithmSpec("A3", 32, "per_bit", 0.3),
    "A4": AlgorithmSpec("A4", 32, "per_bit", 0.1),
    **{f"B{k}": b_k(k) for k in range(1, 17)},
}

B_NAMES = tuple(f"B{k}" for k in range(1, 17))


def random_search(length: int) -> AlgorithmSpec:
    """Uniform sampling without replacement (the archive rejects repeats)."""
    return AlgorithmSpec(f"RS{length}", length, "uniform", 0.0, "accept_all")


def get_algorithm(name: str, bk_semantics: str = "shell", length: int | None = None) -> AlgorithmSpec:
    """Look up a preset; `length` rebuilds B_k for tables other than 16 bits."""
    if name.startswith("RS") and name[2:].isdigit():
        return random_search(int(name[2:]))
    if name.startswith("B") and name in PRESETS:
        if bk_semantics != "shell" or (length is not None and length != 16):
            return b_k(int(name[1:]), 16 if length is None else length, bk_semantics)
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; known: {', '.join(PRESETS)}, RS<L>") from None


def algorithm_from_config(cfg: dict) -> AlgorithmSpec:
    """Build a custom spec from config keys (encoding_length, mutation, parameter, acceptance)."""
    return AlgorithmSpec(
        name=str(cfg.get("name", "custom")),
        encoding_length=int(cfg["encoding_length"]),
        mutation=str(cfg["mutation"]),
        parameter=float(cfg["parameter"]),
        acceptance=str(cfg.get("acceptance", "elitist")),
    )
