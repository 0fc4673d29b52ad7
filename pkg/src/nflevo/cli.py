"""Command-line driver: nflevo {evolve-gp, evolve-table, matrix, landscape, replay}.

Results go to files under --out (and a short summary to stdout); progress
goes to stderr. Every artifact starts with the resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import gp as gpmod
from . import landscape as land
from .algorithms import get_algorithm
from .config import ConfigError, ExperimentConfig, apply_overrides, load_config
from .core import RngStream
from .duel import mean_in_order
from .engine import run_batch
from .matrix import matrix_experiment
from .tables import TableFormatError, evolve_table_function, load_table, save_table


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _set_jobs(jobs: int) -> None:
    import numba

    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    numba.set_num_threads(min(jobs, numba.config.NUMBA_NUM_THREADS))


def _write_csv(path: Path, header_lines: list[str], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_config(out: Path, header: list[str]) -> None:
    (out / "config.txt").write_text("".join(f"{line}\n" for line in header), encoding="utf-8")


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        raise UsageError(f"output directory {out} is not writable: {e.strerror or e}") from None
    return out


def _pair(cfg: ExperimentConfig, length: int | None = None):
    a, b = cfg.pair_names()
    try:
        return get_algorithm(a, cfg.bk_semantics, length), get_algorithm(b, cfg.bk_semantics, length)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _fmt(v: float) -> str:
    return repr(float(v))


def _evolve(cfg: ExperimentConfig, command: str) -> int:
    is_gp = command == "evolve-gp"
    a, b = _pair(cfg, None if is_gp else cfg.table_n)
    engine = cfg.engine()
    out = _prepare_out(cfg)
    header = cfg.header_lines(command)
    root = RngStream(cfg.seed)
    if is_gp:
        params = cfg.gp_params()
        art_dir = out / "trees"
    else:
        params = cfg.table_params()
        art_dir = out / "tables"
    art_dir.mkdir(exist_ok=True)

    summary, history = [], []
    for r in range(cfg.meta_runs):
        rng = root.child(r)
        if is_gp:
            res = gpmod.evolve_gp_function(a, b, params, engine, rng, paired_seeds=cfg.paired_seeds)
            path = art_dir / f"run_{r:03d}.sexp"
            text = "".join(f"; {line}\n" for line in header)
            text += f"; meta_run={r} fitness={_fmt(res.fitness)}\n{gpmod.to_sexpr(res.best)}\n"
            path.write_text(text, encoding="utf-8")
            artifact = gpmod.to_sexpr(res.best)
        else:
            res = evolve_table_function(a, b, params, engine, rng, paired_seeds=cfg.paired_seeds)
            path = art_dir / f"run_{r:03d}.nflf"
            save_table(res.best, path)
            artifact = path.name
        summary.append([str(r), _fmt(res.fitness), _fmt(res.duel.avg_a), _fmt(res.duel.avg_b), artifact])
        history.extend([str(r), str(i), _fmt(f)] for i, f in enumerate(res.history))
        _log(f"[{command}] {a.name} vs {b.name} meta-run {r + 1}/{cfg.meta_runs}: fitness {res.fitness:.6g}")

    fits = np.array([float(row[1]) for row in summary])
    mean = mean_in_order(fits)
    summary.append(["mean", _fmt(mean), "", "", ""])
    col = "tree" if is_gp else "table_file"
    _write_csv(out / "summary.csv", header, ["meta_run", "fitness", "avg_a", "avg_b", col], summary)
    _write_csv(out / "history.csv", header, ["meta_run", "insertion", "best_fitness"], history)
    _write_config(out, header)
    print(f"{a.name},{b.name},mean_fitness={mean!r},meta_runs={cfg.meta_runs}")
    return 0


def cmd_evolve_gp(cfg: ExperimentConfig) -> int:
    return _evolve(cfg, "evolve-gp")


def cmd_evolve_table(cfg: ExperimentConfig) -> int:
    return _evolve(cfg, "evolve-table")


def cmd_matrix(cfg: ExperimentConfig) -> int:
    names = [s.strip() for s in cfg.algorithms.split(",") if s.strip()]
    if len(names) < 2:
        raise UsageError("matrix needs at least two algorithms")
    for n in names:
        try:
            get_algorithm(n, cfg.bk_semantics, cfg.table_n)
        except ValueError as e:
            raise UsageError(str(e)) from None
    out = _prepare_out(cfg)
    header = cfg.header_lines("matrix")

    def progress(row, col, r, fit):
        _log(f"[matrix] ({row},{col}) meta-run {r + 1}/{cfg.meta_runs}: fitness {fit:.6g}")

    report = matrix_experiment(cfg.table_params(), cfg.engine(), RngStream(cfg.seed), names,
                               bk_semantics=cfg.bk_semantics, paired_seeds=cfg.paired_seeds,
                               progress=progress)
    _write_csv(out / "matrix.csv", header, ["row", "col", "mean_fitness", "std", "meta_runs"],
               report.csv_rows())
    text = "".join(f"# {line}\n" for line in header)
    text += f"# mean best fitness over {report.meta_runs} meta-runs; row algorithm is A, column is B\n"
    (out / "matrix.txt").write_text(text + report.to_text(), encoding="utf-8")
    _write_config(out, header)
    sys.stdout.write(report.to_text())
    return 0


def cmd_landscape(cfg: ExperimentConfig, files: list[str]) -> int:
    if not files:
        raise UsageError("landscape needs at least one table file")
    try:
        summary = land.landscape_report(files)
    except TableFormatError as e:
        raise UsageError(str(e)) from None
    out = _prepare_out(cfg)
    header = cfg.header_lines("landscape") + [f"peaks={land.LABEL}"]
    rows = [[f, str(r.peak_count), _fmt(r.peak_fraction)] for f, r in zip(summary.files, summary.reports)]
    rows.append(["mean", _fmt(summary.mean_count), _fmt(summary.mean_fraction)])
    if cfg.random_baseline:
        n, m = summary.reports[0].n, summary.reports[0].m
        frac = land.expected_peak_fraction(n, m)
        rows.append(["random-baseline", _fmt(float(frac) * (1 << n)), _fmt(float(frac))])
    _write_csv(out / "landscape.csv", header, ["file", "peaks", "fraction"], rows)
    print(f"mean_peaks={summary.mean_count!r},mean_fraction={summary.mean_fraction!r},files={len(files)}")
    return 0


def _load_function(path: str):
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{p}: no such file")
    if p.suffix == ".nflf":
        try:
            return load_table(p)
        except TableFormatError as e:
            raise UsageError(str(e)) from None
    try:
        lines = [ln for ln in p.read_text(encoding="utf-8").splitlines()
                 if ln.strip() and not ln.lstrip().startswith(";")]
        return gpmod.GpObjective(gpmod.parse_sexpr(" ".join(lines)))
    except (OSError, UnicodeDecodeError, ValueError) as e:
        raise UsageError(f"{p}: cannot read tree: {e}") from None


def cmd_replay(cfg: ExperimentConfig, function_file: str) -> int:
    if not cfg.algorithm:
        raise UsageError("replay needs --algorithm NAME")
    try:
        f = _load_function(function_file)
        alg = get_algorithm(cfg.algorithm, cfg.bk_semantics, f.length)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if alg.encoding_length != f.length:
        raise UsageError(f"{alg.name} encodes {alg.encoding_length} bits, {function_file} takes {f.length}")
    runs = cfg.runs or 100
    out = _prepare_out(cfg)
    header = cfg.header_lines("replay") + [f"function_file={Path(function_file).name}"]
    batch = run_batch(alg, f, cfg.engine(), RngStream(cfg.seed).child_seeds(0, runs))
    rows = [[str(i), _fmt(batch.best[i]), str(batch.distinct[i]), str(batch.reinits[i])] for i in range(runs)]
    mean = mean_in_order(batch.best)
    rows.append(["mean", _fmt(mean), "", ""])
    _write_csv(out / f"replay_{alg.name}.csv", header,
               ["run", "best_value", "distinct_visited", "reinit_count"], rows)
    print(f"{alg.name},mean_best={mean!r},runs={runs}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--pair", metavar="A,B")
    common.add_argument("--runs", type=int, help="runs per algorithm in each duel")
    common.add_argument("--meta-runs", type=int)
    common.add_argument("--max-steps", type=int)
    common.add_argument("--max-mutations", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")

    p = argparse.ArgumentParser(prog="nflevo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve-gp", parents=[common], help="evolve tree functions for one pair")
    sub.add_parser("evolve-table", parents=[common], help="evolve table functions for one pair")
    m = sub.add_parser("matrix", parents=[common], help="all ordered pairs of B_k algorithms")
    m.add_argument("--algorithms", help="comma-separated subset, default B1..B16")
    ls = sub.add_parser("landscape", parents=[common], help="count local minima of table files")
    ls.add_argument("files", nargs="+")
    ls.add_argument("--random-baseline", action="store_true")
    rp = sub.add_parser("replay", parents=[common], help="rerun one algorithm on a stored function")
    rp.add_argument("function_file")
    rp.add_argument("--algorithm", required=True)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = apply_overrides(cfg, load_config(args.config))
    flags = {}
    for key in ("seed", "pair", "runs", "meta_runs", "max_steps", "max_mutations", "jobs", "out",
                "algorithms", "algorithm"):
        v = getattr(args, key, None)
        if v is not None:
            flags[key] = str(v)
    if getattr(args, "random_baseline", False):
        flags["random_baseline"] = "true"
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        flags[k] = v
    return apply_overrides(cfg, flags)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        _set_jobs(cfg.jobs)
        if args.command == "evolve-gp":
            return cmd_evolve_gp(cfg)
        if args.command == "evolve-table":
            return cmd_evolve_table(cfg)
        if args.command == "matrix":
            return cmd_matrix(cfg)
        if args.command == "landscape":
            return cmd_landscape(cfg, args.files)
        return cmd_replay(cfg, args.function_file)
    except (UsageError, ConfigError) as e:
        print(f"nflevo: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        # parameter validation from the library (bad probabilities, sizes, ...)
        print(f"nflevo: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
