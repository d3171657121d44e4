"""Command-line front end: ``phasecrit sweep | detect | validate``.

Exit codes: 0 success (or a detection), 1 no detection / failed validation,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
from dataclasses import dataclass

from .chains import ConvergenceError
from .correlators import QuadratureError
from .criticality import (
    EvaluationError,
    Observable,
    OBSERVABLE_KINDS,
    SweepSpec,
    Sweeper,
    default_workers,
    detect_cusp,
    detect_discontinuity,
    detect_divergence,
    factorization_scan,
)
from .svg import write_svg
from .validation import SUITES, appendix_table, run_suites

DEFAULT_RANGES = {"xy": "0:2:256", "xxz": "-2:2.5:512"}
DETECTORS = ("auto", "divergence", "discontinuity", "discontinuity-d1", "cusp", "factorization")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    spec: SweepSpec | None = None
    out: str = "-"
    svg: str | None = None
    threads: int = 1
    detector: str = "auto"
    column: str | int = 0
    suites: tuple[str, ...] = ()
    seed: int = 0


_ANGLE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """Numbers and simple multiples of pi: ``0.3``, ``pi/2``, ``2pi``, ``3*pi/7``."""
    m = _ANGLE.match(text)
    if not m or (not m.group(1) and not m.group(2)):
        raise ConfigError(f"cannot parse angle {text!r}")
    coef = float(m.group(1)) if m.group(1) not in (None, "", "+", "-") else (-1.0 if m.group(1) == "-" else 1.0)
    val = coef * (math.pi if m.group(2) else 1.0)
    if m.group(3):
        val /= float(m.group(3))
    return val


def parse_angles(text: str | None) -> tuple[float, ...]:
    if not text:
        return ()
    return tuple(parse_angle(t) for t in text.split(","))


def parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--range expects lo:hi:points, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad --range {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phasecrit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def sweep_args(sp):
        sp.add_argument("--model", choices=("xy", "xxz"), default="xy")
        sp.add_argument("--gamma", type=float, default=0.5, help="XY anisotropy")
        sp.add_argument("--n", type=int, default=16, help="XXZ ring size for exact diagonalization")
        sp.add_argument("--observable", choices=OBSERVABLE_KINDS, default="dwf")
        sp.add_argument("--point", help="phase-space point as bit strings, e.g. 00,01")
        sp.add_argument("--theta", help="comma-separated angles, one per site (pi allowed)")
        sp.add_argument("--phi", help="comma-separated angles, one per site (pi allowed)")
        sp.add_argument("--sqrt", action="store_true", help="evaluate on sqrt(rho) of the pair")
        sp.add_argument("--m", type=int, default=1, help="lattice distance")
        sp.add_argument("--range", dest="range_", help="lo:hi:points")
        sp.add_argument("--levels", type=int, default=None, help="refinement levels")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sweep", help="evaluate an observable on a grid and write CSV")
    sweep_args(s)
    s.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    s.add_argument("--svg", help="optional SVG plot path")

    d = sub.add_parser("detect", help="run critical-signature detectors")
    sweep_args(d)
    d.add_argument("--detector", choices=DETECTORS, default="auto")
    d.add_argument("--column", default="0", help="column name or index of the observable")

    v = sub.add_parser("validate", help="run self-validation suites")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--seed", type=int, default=0)
    return p


def _fix_negative_range(argv: list[str]) -> list[str]:
    # allow "--range -2:2.5:512" (argparse would read -2:... as an option)
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--range" and i + 1 < len(argv):
            out.append(f"--range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def make_config(ns: argparse.Namespace) -> RunConfig:
    if ns.command == "validate":
        suites = SUITES if ns.suite == "all" else (ns.suite,)
        return RunConfig("validate", suites=suites, seed=ns.seed)
    if getattr(ns, "detector", None) == "factorization" and ns.observable == "dwf" and not ns.point:
        ns.point = "00,00"
    lo, hi, points = parse_range(ns.range_ or DEFAULT_RANGES[ns.model])
    thetas, phis = parse_angles(ns.theta), parse_angles(ns.phi)
    if ns.observable == "gwf" and not thetas:
        raise ConfigError("--observable gwf needs --theta and --phi")
    if thetas and not phis:
        phis = (0.0,) * len(thetas)
    levels = ns.levels if ns.levels is not None else (0 if ns.command == "sweep" else 3)
    try:
        obs = Observable(ns.observable, ns.point, thetas, phis, ns.sqrt, ns.m)
        spec = SweepSpec(ns.model, obs, lo, hi, points, levels, ns.gamma, ns.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    threads = ns.threads if ns.threads is not None else default_workers()
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    cfg = RunConfig(ns.command, spec=spec, threads=threads, seed=ns.seed)
    if ns.command == "sweep":
        cfg.out, cfg.svg = ns.out, ns.svg
        for path in (cfg.out, cfg.svg):
            if path and path != "-":
                try:
                    open(path, "a").close()
                except OSError as exc:
                    raise ConfigError(f"cannot write {path}: {exc}") from None
    else:
        cfg.detector = ns.detector
        cfg.column = int(ns.column) if ns.column.isdigit() else ns.column
        if isinstance(cfg.column, str) and cfg.column not in obs.columns:
            raise ConfigError(f"unknown column {cfg.column!r}; have {obs.columns}")
        if cfg.detector == "factorization" and ns.model != "xy":
            raise ConfigError("the factorization scan is defined for the XY chain")
        if cfg.detector != "factorization" and levels < 1:
            raise ConfigError("detectors need --levels >= 1")
    return cfg


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def cmd_sweep(cfg: RunConfig) -> int:
    spec = cfg.spec
    res = Sweeper.from_spec(spec, workers=cfg.threads).sample(0)
    cols = spec.observable.columns
    header = [spec.parameter, *cols, *(f"d1_{c}" for c in cols), *(f"d2_{c}" for c in cols)]
    fh = sys.stdout if cfg.out == "-" else open(cfg.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, x in enumerate(res.grid):
            w.writerow([_fmt(x), *map(_fmt, res.values[i]), *map(_fmt, res.d1[i]), *map(_fmt, res.d2[i])])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if cfg.svg:
        write_svg(cfg.svg, res.grid, {c: res.values[:, j] for j, c in enumerate(cols)},
                  xlabel=spec.parameter, title=spec.observable.kind)
    return 0


def cmd_detect(cfg: RunConfig) -> int:
    spec = cfg.spec
    if cfg.detector == "factorization":
        obs = spec.observable
        config = (obs.thetas[0], obs.phis[0]) if obs.thetas else None
        kw = {"points": spec.points}
        if config:
            kw["config"] = config
        if obs.point:
            kw["point"] = obs.point
        rep = factorization_scan(spec.gamma, **kw)
        print(rep.line())
        print(f"Discontinuity {rep.metrics['sqrt_location']:.6f} (sqrt rho, d1)")
        return 0 if rep.detected else 1
    sweeper = Sweeper.from_spec(spec, workers=cfg.threads)
    col = cfg.column
    runs = {
        "discontinuity": lambda: detect_discontinuity(sweeper, "value", col),
        "divergence": lambda: detect_divergence(sweeper, col),
        "cusp": lambda: detect_cusp(sweeper, col),
        "discontinuity-d1": lambda: detect_discontinuity(sweeper, "d1", col),
    }
    chosen = list(runs) if cfg.detector == "auto" else [cfg.detector]
    found = False
    for name in chosen:
        rep = runs[name]()
        print(f"{rep.line()} detector={name}")
        found |= rep.detected
    return 0 if found else 1


def cmd_validate(cfg: RunConfig) -> int:
    checks = run_suites(cfg.suites, cfg.seed)
    for c in checks:
        print(c.row())
    if "appendix" in cfg.suites:
        print()
        print("three-site terms, printed vs derived (lambda=0.8, gamma=0.5, generic angles):")
        print(appendix_table())
    failed = sum(not c.passed for c in checks)
    print(f"\n{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    argv = _fix_negative_range(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(ns)
        return {"sweep": cmd_sweep, "detect": cmd_detect, "validate": cmd_validate}[cfg.command](cfg)
    except ConfigError as exc:
        print(f"phasecrit: configuration error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, ConvergenceError, QuadratureError, ArithmeticError) as exc:
        print(f"phasecrit: numerical failure: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
