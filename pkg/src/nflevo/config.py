"""Experiment configuration: flat key=value files plus command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .engine import EngineParams
from .gp import GpParams
from .tables import TableEaParams

FORMAT_VERSION = 1

# keys that change where or how fast results are produced, never what they are
_NOT_ECHOED = {"out", "jobs"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 1
    out: str = "results"
    jobs: int = 1
    pair: str = ""
    runs: int = 0  # 0: command default (500 for trees, 100 for tables)
    meta_runs: int = 10
    max_steps: int = 100
    max_mutations: int = 20
    # deviation switches
    count_rejected: bool = True
    paired_seeds: bool = False
    constants: bool = True
    bk_semantics: str = "shell"
    selection: str = "uniform"
    # tree evolution
    gp_population_size: int = 50
    gp_generations: int = 10
    gp_crossover_probability: float = 0.9
    gp_mutations: int = 1
    gp_max_depth: int = 6
    # table evolution
    table_population_size: int = 10
    table_generations: int = 10
    table_crossover_probability: float = 0.9
    table_mutation_probability: float = 0.01
    table_n: int = 16
    table_m: int = 8
    # matrix / landscape / replay
    algorithms: str = ",".join(f"B{k}" for k in range(1, 17))
    algorithm: str = ""
    random_baseline: bool = False

    def engine(self) -> EngineParams:
        return EngineParams(self.max_steps, self.max_mutations, self.count_rejected)

    def gp_params(self) -> GpParams:
        return GpParams(
            population_size=self.gp_population_size,
            generations=self.gp_generations,
            crossover_probability=self.gp_crossover_probability,
            mutations_per_chromosome=self.gp_mutations,
            max_depth=self.gp_max_depth,
            duel_runs=self.runs or 500,
            constants=self.constants,
            selection=self.selection,
        )

    def table_params(self) -> TableEaParams:
        return TableEaParams(
            population_size=self.table_population_size,
            generations=self.table_generations,
            crossover_probability=self.table_crossover_probability,
            per_bit_mutation=self.table_mutation_probability,
            duel_runs=self.runs or 100,
            meta_runs=self.meta_runs,
            n=self.table_n,
            m=self.table_m,
            selection=self.selection,
        )

    def pair_names(self) -> tuple[str, str]:
        parts = [p.strip() for p in self.pair.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"--pair needs two algorithm names 'A,B', got {self.pair!r}")
        return parts[0], parts[1]

    def header_lines(self, command: str) -> list[str]:
        lines = [f"format_version={FORMAT_VERSION}", f"command={command}"]
        for f in fields(self):
            if f.name not in _NOT_ECHOED:
                lines.append(f"{f.name}={_fmt(getattr(self, f.name))}")
        return lines


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _coerce(name: str, raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot read {raw!r} as {kind.__name__}") from None


_TYPES = {f.name: {"int": int, "float": float, "bool": bool, "str": str}[f.type] for f in fields(ExperimentConfig)}


def apply_overrides(cfg: ExperimentConfig, pairs: dict[str, str]) -> ExperimentConfig:
    changes = {}
    for key, raw in pairs.items():
        key = key.strip().replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        changes[key] = _coerce(key, raw, _TYPES[key])
    return replace(cfg, **changes)


def parse_pairs(lines) -> dict[str, str]:
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from None
    return parse_pairs(text.splitlines())
