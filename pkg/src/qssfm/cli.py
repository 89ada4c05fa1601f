"""Command-line entry point: ``qssfm run | compare | cost | list-scenarios``.

Config files are INI-style with dotted section names, e.g.::

    [run]
    scenario = soliton
    solver = filtered-ideal

    [run.filter]
    m = 4
    normalize = true

Command-line flags override file values.  Every resolved value is echoed into
``manifest.json`` in the output directory.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics
from .fieldio import write_scalar_csv
from .filtered import FidelityMode, HybridConfig, evolve_hybrid
from .qsim import GateCostLedger, ShotBudget
from .scenarios import SCENARIOS, ScenarioSpec
from .ssfm import Trajectory, evolve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

OUTPUT_ROOT_ENV = "QSSFM_OUTPUT_ROOT"
SOLVERS = ("classical", "ideal-qssfm", "filtered-ideal", "filtered-shots")
NORM_TOLERANCE = 0.10

# section -> key -> parser; every key is also a flat run setting
SCHEMA = {
    "run": {"scenario": str, "solver": str, "output": str, "seed": int, "merge_halves": "bool"},
    "run.filter": {"m": "ints", "normalize": "bool"},
    "run.shots": {"shots": int},
    "run.time": {"tau": float, "t_end": float, "sample_every": int},
    "run.grid": {"n": "ints"},
}


class ConfigError(Exception):
    pass


class NumericalError(Exception):
    pass


def _parse_value(kind, raw: str, key: str):
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "ints":
            return tuple(int(v) for v in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc


def load_config(path: str | Path) -> dict:
    """Read a config file into a flat ``{key: value}`` dict, rejecting unknown keys."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            out[key] = _parse_value(SCHEMA[section][key], raw, f"{section}.{key}")
    return out


def resolve_run(args: argparse.Namespace) -> dict:
    values = load_config(args.config) if args.config else {}
    for key in ("scenario", "solver", "output", "seed", "shots", "tau", "t_end", "sample_every", "m", "n"):
        v = getattr(args, key)
        if v is not None:
            values[key] = tuple(v) if isinstance(v, list) else v
    if args.normalize is not None:
        values["normalize"] = args.normalize
    if args.merge_halves:
        values["merge_halves"] = True

    values.setdefault("scenario", "soliton")
    values.setdefault("solver", "classical")
    values.setdefault("seed", 0)
    values.setdefault("normalize", True)
    values.setdefault("merge_halves", False)
    if values["scenario"] not in SCENARIOS:
        raise ConfigError(f"scenario: unknown {values['scenario']!r}; choose from {sorted(SCENARIOS)}")
    if values["solver"] not in SOLVERS:
        raise ConfigError(f"solver: unknown {values['solver']!r}; choose from {list(SOLVERS)}")
    if values["solver"] == "filtered-shots":
        if values.get("shots") is None:
            raise ConfigError("shots: required for the filtered-shots solver")
        if values["shots"] <= 0:
            raise ConfigError(f"shots: must be positive, got {values['shots']}")
    elif values.get("shots") is not None and values["shots"] <= 0:
        raise ConfigError(f"shots: must be positive, got {values['shots']}")
    if values.get("sample_every") is not None and values["sample_every"] < 1:
        raise ConfigError("sample_every: must be >= 1")
    return values


def build_scenario(values: dict) -> ScenarioSpec:
    factory = SCENARIOS[values["scenario"]]
    kw = {}
    if values.get("n") is not None:
        n = values["n"]
        kw["n"] = n[0] if values["scenario"] == "soliton" else tuple(n)
    if values.get("m") is not None:
        m = values["m"]
        kw["m"] = m[0] if values["scenario"] == "soliton" else tuple(m)
    try:
        spec = factory(**kw)
        over = {k: values[k] for k in ("tau", "t_end") if values.get(k) is not None}
        if over:
            spec = spec.with_overrides(**over)
            if "t_end" in over:
                spec = spec.with_overrides(
                    sample_times=tuple(t for t in spec.sample_times if t < spec.t_end) + (spec.t_end,))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return spec


def hybrid_config_for(spec: ScenarioSpec, values: dict) -> HybridConfig:
    solver = values["solver"]
    kw = {"normalize_reconstruction": values["normalize"], "merge_halves": values["merge_halves"]}
    if solver == "ideal-qssfm":
        return spec.hybrid_config(full=True, **kw)
    if solver == "filtered-shots":
        kw["fidelity_mode"] = FidelityMode.EMULATED_HARDWARE
        kw["shot_budget"] = ShotBudget(values["shots"], values["seed"])
    return spec.hybrid_config(**kw)


def check_norms(traj: Trajectory) -> None:
    for t, f in zip(traj.times, traj.fields):
        norm = float(np.linalg.norm(f.values))
        if not np.isfinite(norm) or abs(norm - 1.0) > NORM_TOLERANCE:
            raise NumericalError(f"norm {norm:.6g} at t={t:g} deviates more than {NORM_TOLERANCE:.0%}")


def execute_run(values: dict) -> tuple[Path, Trajectory]:
    spec = build_scenario(values)
    sample_times = None if values.get("sample_every") else spec.sample_times
    sample_every = values.get("sample_every")
    solver = values["solver"]

    manifest = {"solver": solver, "seed": values["seed"], "normalize": values["normalize"],
                "merge_halves": values["merge_halves"], "shots": values.get("shots"),
                "scenario": spec.manifest(), "density_floor_rule": "1e-6 * max density"}
    out = Path(values.get("output") or Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / f"{spec.name}-{solver}")

    if solver == "classical":
        traj = evolve(spec.initial_field(), spec.ssfm_config(merge_halves=values["merge_halves"]),
                      spec.t_end, sample_every=sample_every, sample_times=sample_times)
        cost = None
    else:
        config = hybrid_config_for(spec, values)
        manifest["filter_m"] = list(config.filter_for(spec.grid()).m)
        manifest["fidelity_mode"] = config.fidelity_mode.value
        ledger = GateCostLedger()
        traj, cost = evolve_hybrid(spec.initial_field(), config, spec.t_end,
                                   sample_every=sample_every, sample_times=sample_times, ledger=ledger)

    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))
    traj.save(out, manifest)
    if cost is not None:
        (out / "cost.txt").write_text(cost.to_text() + ledger.to_text())
        cost.write_csv(out / "cost_steps.csv")
    check_norms(traj)
    return out, traj


def cmd_run(args: argparse.Namespace) -> int:
    try:
        values = resolve_run(args)
        out, _ = execute_run(values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        ref = Trajectory.load(args.run_a)
        cand = Trajectory.load(args.run_b)
    except (OSError, ValueError, KeyError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if ref.final.grid != cand.final.grid:
            raise ValueError("runs use different grids")
        report = diagnostics.error_report(ref, cand)
    except ValueError as exc:
        print(f"incompatible runs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output or Path(args.run_b) / "compare")
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "error_report.txt").write_text(report.to_text())
        for i, (c, q) in enumerate(zip(ref.fields, cand.fields)):
            write_scalar_csv(out / f"error_field_{i:05d}.csv", c.grid,
                             {"density_error": diagnostics.density_error_field(c, q).ravel()})
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(report.to_text(), end="")
    return EXIT_OK


def cost_table(n_steps: int, m: list[int], n: list[int], shots: int, epsilon: float) -> list[tuple[str, str, float]]:
    """Rows ``(name, formula, value)`` for the classical, tomography and filtered cost scalings."""
    if len(m) != len(n):
        raise ValueError("m and n need the same number of axes")
    big_n = 2 ** sum(n)
    big_m = 2 ** sum(m)
    log_n = math.log2(big_n)
    return [
        ("ssfm", "N_t * N * log N", n_steps * big_n * log_n),
        ("qssfm-tomography", "N_t^2 * N * log^2 N / eps^2", n_steps**2 * big_n * log_n**2 / epsilon**2),
        ("qssfm-filtered", "N_t^2 * M * log^2 N / eps^2", n_steps**2 * big_m * log_n**2 / epsilon**2),
    ]


def cmd_cost(args: argparse.Namespace) -> int:
    from .filtered import predicted_runtime

    m = args.m
    n = args.n
    if len(m) == 1 and len(n) > 1:
        m = m * len(n)
    if any(v <= 0 for v in [args.steps, args.shots, *m, *n]) or not 0 < args.epsilon <= 1:
        print("config error: steps, shots, m, n must be positive and epsilon in (0, 1]", file=sys.stderr)
        return EXIT_CONFIG
    if any(a > b for a, b in zip(m, n)):
        print("config error: m exceeds n on some axis", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = cost_table(args.steps, m, n, args.shots, args.epsilon)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"N_t={args.steps} N=2^{sum(n)} M=2^{sum(m)} shots={args.shots} eps={args.epsilon}")
    for name, formula, value in rows:
        print(f"{name:18s} {formula:30s} {value:.6e}")
    print(f"{'filtered/tomography':18s} {'M / N':30s} {rows[2][2] / rows[1][2]:.6e}")
    pr = predicted_runtime(args.steps, 2 ** sum(m), sum(n), args.shots)
    print(f"{'predicted_runtime':18s} {'M * shots * n^2 * N_t(N_t+1)':30s} {pr:.6e}")
    return EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    for name, factory in SCENARIOS.items():
        spec = factory()
        print(f"{name}: shape={spec.shape} lengths={spec.lengths} tau={spec.tau} t_end={spec.t_end} "
              f"filter_m={spec.filter_m}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qssfm", description="Filtered hybrid split-step NLSE solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evolve a scenario with one solver")
    run.add_argument("--config", help="INI config file")
    run.add_argument("--scenario", choices=sorted(SCENARIOS))
    run.add_argument("--solver", choices=SOLVERS)
    run.add_argument("--m", type=int, nargs="+", help="retained qubits per axis")
    run.add_argument("--n", type=int, nargs="+", help="qubits per axis")
    norm = run.add_mutually_exclusive_group()
    norm.add_argument("--normalize", dest="normalize", action="store_true", default=None)
    norm.add_argument("--no-normalize", dest="normalize", action="store_false")
    run.add_argument("--shots", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--tau", type=float)
    run.add_argument("--t-end", dest="t_end", type=float)
    run.add_argument("--sample-every", dest="sample_every", type=int)
    run.add_argument("--merge-halves", action="store_true")
    run.add_argument("--output", help=f"output directory (default ${OUTPUT_ROOT_ENV}/<scenario>-<solver>)")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="error report between two run directories")
    cmp_.add_argument("run_a", help="reference run")
    cmp_.add_argument("run_b", help="candidate run")
    cmp_.add_argument("--output")
    cmp_.set_defaults(func=cmd_compare)

    cost = sub.add_parser("cost", help="evaluate the cost scalings")
    cost.add_argument("--steps", type=int, required=True, help="number of time steps N_t")
    cost.add_argument("--m", type=int, nargs="+", required=True)
    cost.add_argument("--n", type=int, nargs="+", required=True)
    cost.add_argument("--shots", type=int, default=1000)
    cost.add_argument("--epsilon", type=float, default=0.01)
    cost.set_defaults(func=cmd_cost)

    ls = sub.add_parser("list-scenarios", help="show built-in scenarios")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
