"""Command-line front end: analyze, simulate, sweep, verify.

Exit codes: 0 ok, 1 configuration error, 2 solver error, 3 falsified
negativity (generic model with a non-negative exponent), 4 failed
verification.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from .analysis import MCConfig, analyze
from .errors import ConfigError, PhaseSyncError
from .numerics import TWO_PI
from .phase_model import OscillatorModel, load_model

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FALSIFIED, EXIT_VERIFY = 0, 1, 2, 3, 4

log = logging.getLogger("phasesync")


@dataclass
class RunConfig:
    command: str
    model: OscillatorModel | None = None
    n: int = 4096
    dt: float = 1e-3
    horizon: float = 2000.0
    n_paths: int = 64
    seed: int = 0
    workers: int | None = None
    mc: bool = True
    members: int = 16
    stride: int = 100
    independent: bool = False
    depths: tuple[float, ...] = (50.0, 100.0, 200.0)
    sigmas: tuple[float, ...] = ()
    output_dir: Path | None = None
    verbose: bool = False
    checks: list[str] = field(default_factory=list)

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.n >= 2, f"--n must be >= 2, got {self.n}")
        need(math.isfinite(self.dt) and self.dt > 0, f"--dt must be positive, got {self.dt}")
        need(math.isfinite(self.horizon) and self.horizon >= 10 * self.dt,
             f"--horizon must be at least 10 dt, got {self.horizon}")
        need(self.n_paths >= 2, f"--n-paths must be >= 2, got {self.n_paths}")
        need(0 <= self.seed < 2**64, f"--seed must be a non-negative 64-bit integer, got {self.seed}")
        need(self.workers is None or self.workers >= 1, "--workers must be >= 1")
        need(self.members >= 2, f"--members must be >= 2, got {self.members}")
        need(self.stride >= 1, f"--stride must be >= 1, got {self.stride}")
        need(len(self.depths) > 0 and all(d > 0 for d in self.depths), "--depths must be positive")
        need(all(b > a for a, b in zip(self.depths[:-1], self.depths[1:])), "--depths must be increasing")
        need(all(math.isfinite(s) and s >= 0 for s in self.sigmas), "--sigmas must all be >= 0")
        if self.command == "sweep":
            need(len(self.sigmas) > 0, "--sigmas must not be empty")
        if self.command != "verify":
            need(self.model is not None, "--model is required")
            need(self.output_dir is not None, "--out is required")

    @property
    def mc_config(self) -> MCConfig | None:
        if not self.mc:
            return None
        return MCConfig(self.seed, self.n_paths, self.horizon, self.dt, self.workers)


# ------------------------------------------------------------------ output

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _outdir(cfg: RunConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


# ---------------------------------------------------------------- commands

def cmd_analyze(cfg: RunConfig) -> int:
    a = analyze(cfg.model, cfg.n, cfg.mc_config)
    out = _outdir(cfg)
    summary = dict(a.summary)
    summary["mc_options"] = None if cfg.mc_config is None else {
        "seed": cfg.seed, "n_paths": cfg.n_paths, "horizon": cfg.horizon, "dt": cfg.dt}
    write_json(out / "summary.json", _jsonable(summary))
    if a.density is not None:
        write_csv(out / "density.csv", ["phi", "p_st"], zip(a.density.phi, a.density.p))
    for w in a.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if a.falsified:
        print(f"FALSIFIED: generic model with lambda_quadrature = {summary['lambda_quadrature']!r}",
              file=sys.stderr)
        return EXIT_FALSIFIED
    if a.density is None and summary["generic"]:
        print(f"solver error: {summary['density_reason']}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"lambda_quadrature = {summary['lambda_quadrature']!r}  generic = {summary['generic']}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    m = cfg.model
    out = _outdir(cfg)
    stream = dyn.NoiseStream(cfg.seed, cfg.dt)
    x0s = TWO_PI * np.arange(cfg.members) / cfg.members
    n = int(round(cfg.horizon / cfg.dt))
    times = [k * cfg.dt for k in range(0, n + 1, cfg.stride)]
    snaps = dyn.simulate_ensemble(m, stream, x0s, cfg.horizon, times,
                                  independent=cfg.independent, workers=cfg.workers)
    header = ["t"] + [f"phase_{k}" for k in range(cfg.members)] + ["max_pairwise_dist", "order_parameter"]
    write_csv(out / "trajectory.csv", header,
              ([s.t, *s.phases, s.max_pairwise_dist, s.order_parameter] for s in snaps))

    pb_x0s = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    res = dyn.pullback(m, stream, pb_x0s, cfg.depths)
    for r in res:
        r["spread"] = dyn.max_pairwise_distance(r["endpoints"])
    drifts = [float(np.max(dyn.circle_distance(np.array(b["endpoints"]), np.array(a["endpoints"]))))
              for a, b in zip(res[:-1], res[1:])]
    write_json(out / "pullback.json", _jsonable({
        "seed": cfg.seed, "dt": cfg.dt, "x0s": pb_x0s, "depths": list(cfg.depths),
        "results": res, "successive_drift": drifts,
    }))
    final = snaps[-1]
    print(f"final max_pairwise_dist = {final.max_pairwise_dist!r}  "
          f"({'independent' if cfg.independent else 'common'} noise)")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    rows, status = [], EXIT_OK
    for s in cfg.sigmas:
        a = analyze(cfg.model.with_sigma(s), cfg.n, cfg.mc_config)
        mc = a.summary["lambda_mc"]
        rows.append([s, a.summary["lambda_quadrature"], mc and mc["value"], mc and mc["stderr"],
                     a.summary["C"], a.summary["generic"]])
        if a.falsified:
            status = EXIT_FALSIFIED
        elif a.density is None and a.summary["generic"] and status == EXIT_OK:
            print(f"solver error at sigma={s!r}: {a.summary['density_reason']}", file=sys.stderr)
            status = EXIT_SOLVER
    write_csv(out / "sweep.csv", ["sigma", "lambda_quadrature", "lambda_mc", "lambda_mc_stderr", "C", "generic"],
              rows)
    return status


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import format_table, run_checks

    results = run_checks(cfg.checks or None)
    print(format_table(results, cfg.verbose))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed invariants: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify}


# ----------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasesync", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, horizon):
        sp.add_argument("--model", type=Path, required=True, help="model JSON file")
        sp.add_argument("--out", type=Path, required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--dt", type=float, default=1e-3)
        sp.add_argument("--horizon", type=float, default=horizon)
        sp.add_argument("--workers", type=int, default=None, help="threads for independent paths")

    def mc(sp):
        sp.add_argument("--n", type=int, default=4096, help="density grid size")
        sp.add_argument("--n-paths", type=int, default=64, help="Monte Carlo paths")
        sp.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo estimate")

    a = sub.add_parser("analyze", help="density, exponent estimates and interval contributions")
    common(a, 2000.0)
    mc(a)

    s = sub.add_parser("simulate", help="common-noise ensemble and pullback runs")
    common(s, 500.0)
    s.add_argument("--members", type=int, default=16)
    s.add_argument("--stride", type=int, default=100, help="steps between trajectory rows")
    s.add_argument("--independent-noise", action="store_true", help="control run: one noise per member")
    s.add_argument("--depths", type=_floats, default=(50.0, 100.0, 200.0))

    w = sub.add_parser("sweep", help="exponent over a list of noise intensities")
    common(w, 2000.0)
    mc(w)
    w.add_argument("--sigmas", type=_floats, required=True)

    v = sub.add_parser("verify", help="invariant suite over the built-in corpus")
    v.add_argument("--verbose", "-v", action="store_true")
    v.add_argument("--check", action="append", default=[], help="run only the named check (repeatable)")
    return p


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    if ns.command == "verify":
        cfg.verbose, cfg.checks = ns.verbose, ns.check
    else:
        cfg.model = load_model(ns.model)
        cfg.output_dir = ns.out
        cfg.seed, cfg.dt, cfg.horizon, cfg.workers = ns.seed, ns.dt, ns.horizon, ns.workers
        if ns.command in ("analyze", "sweep"):
            cfg.n, cfg.n_paths, cfg.mc = ns.n, ns.n_paths, not ns.no_mc
        if ns.command == "simulate":
            cfg.members, cfg.stride = ns.members, ns.stride
            cfg.independent, cfg.depths = ns.independent_noise, ns.depths
        if ns.command == "sweep":
            cfg.sigmas = ns.sigmas
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhaseSyncError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
