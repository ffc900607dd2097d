"""Command-line interface: ``bundlekit {spectrum,transform,holonomy,check}``.

Exit codes: 0 success, 1 checks ran and failed, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import checks
from .connection import BaseGrid, parallel_transport_alpha, twist_connection
from .duality import TwistParam, line_fourier, shifted_analysis, shifted_synthesis
from .errors import BundleKitError, StepError
from .hilbert import TWO_PI, FibreVector, Momentum, PositionCircle, wrap_angle
from .io import VectorFormatError, fmt, holonomy_csv, holonomy_rows, read_vector, vector_to_json, vector_to_text
from .spectra import (
    PhysicalParams,
    PotentialSpec,
    angular_momentum_eigenvalues,
    build_hamiltonian,
    free_energies,
    solve_eigen,
)

log = logging.getLogger("bundlekit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
TOL_ENV = "BUNDLEKIT_TOL"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    fmt: str = "text"
    out: Optional[str] = None
    tol: Optional[float] = None
    seed: int = 42
    alpha: float = 0.0
    nmax: Optional[int] = None
    grid: Optional[int] = None
    steps: int = 10_000
    hbar: float = 1.0
    mass: float = 1.0
    radius: float = 1.0
    potential: Optional[str] = None
    input: Optional[str] = None
    to: Optional[str] = None
    span: Optional[float] = None
    method: str = "rk4"
    suite: str = "all"

    def validate(self):
        for name in ("hbar", "mass", "radius"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise UsageError(f"--{name} must be positive")
        if not math.isfinite(self.alpha):
            raise UsageError("--alpha must be finite")
        if self.tol is not None and not (self.tol >= 0 and math.isfinite(self.tol)):
            raise UsageError("--tol must be a non-negative number")
        if self.nmax is not None and self.nmax < 0:
            raise UsageError("--nmax must be >= 0")
        if self.grid is not None and self.grid < 1:
            raise UsageError("--grid must be >= 1")
        if self.span is not None and not self.span > 0:
            raise UsageError("--span must be positive")

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.hbar, self.mass, self.radius)


def resolve_tol(flag: Optional[float], default: Optional[float]) -> Optional[float]:
    if flag is not None:
        return flag
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"{TOL_ENV}={env!r} is not a number") from None
    return default


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(header, rows, cfg: RunConfig, meta: dict) -> str:
    if cfg.fmt == "json":
        data = dict(meta)
        data["rows"] = [dict(zip(header, r)) for r in rows]
        return json.dumps(data, indent=1) + "\n"
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[x if isinstance(x, int) else fmt(x) for x in r] for r in rows])
        return buf.getvalue()
    lines = ["  ".join(f"{h:>24}" for h in header)]
    for r in rows:
        lines.append("  ".join(f"{x:>24d}" if isinstance(x, int) else f"{fmt(x):>24}" for x in r))
    return "\n".join(lines) + "\n"


def cmd_spectrum(cfg: RunConfig) -> int:
    nmax = 8 if cfg.nmax is None else cfg.nmax
    twist = TwistParam(cfg.alpha)
    meta = {"alpha": cfg.alpha, "nmax": nmax, "hbar": cfg.hbar, "mass": cfg.mass, "radius": cfg.radius}
    if cfg.potential is None:
        ls = angular_momentum_eigenvalues(nmax, twist, cfg.params)
        es = free_energies(nmax, twist, cfg.params)
        rows = [(int(n), float(l), float(e)) for n, l, e in zip(ls.labels, ls.eigenvalues, es.eigenvalues)]
        _emit(_table(("n", "L", "E"), rows, cfg, meta), cfg)
        return EXIT_OK
    try:
        pot = PotentialSpec.from_file(cfg.potential)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read potential {cfg.potential!r}: {exc}") from None
    res = solve_eigen(build_hamiltonian(nmax, twist, cfg.params, pot))
    rows = [(i, int(n), float(e)) for i, (n, e) in enumerate(zip(res.labels, res.eigenvalues))]
    meta["potential"] = cfg.potential
    _emit(_table(("index", "n", "E"), rows, cfg, meta), cfg)
    return EXIT_OK


def _normalized_alpha(alpha: float) -> float:
    if not 0.0 <= alpha < TWO_PI:
        wrapped = wrap_angle(alpha)
        log.warning("alpha %r outside [0, 2pi); using %r", alpha, wrapped)
        return wrapped
    return alpha


def cmd_transform(cfg: RunConfig) -> int:
    if not cfg.input:
        raise UsageError("transform needs --input")
    try:
        vec = read_vector(cfg.input)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input!r}: {exc}") from None
    frame = vec.frame
    if isinstance(frame, Momentum):
        target = cfg.to or "position"
        if target != "position":
            raise UsageError(f"cannot transform a momentum vector to {target!r}")
        alpha = _normalized_alpha(cfg.alpha)
        npoints = cfg.grid if cfg.grid is not None else frame.dim
        result = shifted_synthesis(vec, alpha, npoints)
    elif isinstance(frame, PositionCircle):
        target = cfg.to or "momentum"
        if target != "momentum":
            raise UsageError(f"cannot transform a circle vector to {target!r}")
        nmax = cfg.nmax if cfg.nmax is not None else (frame.npoints - 1) // 2
        result = shifted_analysis(vec, nmax)
    else:
        default = "line-q" if frame.domain == "p" else "line-p"
        target = cfg.to or default
        if target != default:
            raise UsageError(f"cannot transform a {frame.domain}-grid vector to {target!r}")
        result = line_fourier(vec, "p->q" if frame.domain == "p" else "q->p")
    _emit(vector_to_json(result) if cfg.fmt == "json" else vector_to_text(result), cfg)
    return EXIT_OK


def cmd_holonomy(cfg: RunConfig) -> int:
    npoints = 64 if cfg.grid is None else cfg.grid
    tol = resolve_tol(cfg.tol, 1e-8)
    grid = BaseGrid(max(cfg.steps, 2), npoints)
    conn = twist_connection(grid)
    rng = np.random.default_rng(cfg.seed)
    psi0 = FibreVector(PositionCircle(npoints), rng.standard_normal(npoints) + 1j * rng.standard_normal(npoints))
    res = parallel_transport_alpha(psi0, conn, cfg.steps, method=cfg.method)
    phases = res.holonomy_phase_per_theta
    if cfg.fmt == "json":
        keys = ("theta", "phase_re", "phase_im", "expected_re", "expected_im", "abs_error")
        rows = [dict(zip(keys, map(float, r))) for r in holonomy_rows(phases)]
        text = json.dumps({"grid": npoints, "steps": cfg.steps, "seed": cfg.seed, "tol": tol, "rows": rows}, indent=1) + "\n"
    else:
        text = holonomy_csv(phases)
    _emit(text, cfg)
    worst = float(np.nanmax(np.abs(phases - np.exp(1j * PositionCircle(npoints).theta))))
    if not math.isfinite(worst):
        raise StepError("holonomy phases are not finite")
    log.info("max abs error %.3e (tol %.1e)", worst, tol)
    return EXIT_OK if worst <= tol else EXIT_FAIL


def cmd_check(cfg: RunConfig) -> int:
    if cfg.suite != "all" and cfg.suite not in checks.SUITES:
        raise UsageError(f"unknown suite {cfg.suite!r}")
    report = checks.run_suite(cfg.suite, cfg.seed, resolve_tol(cfg.tol, None))
    if cfg.fmt == "text":
        lines = [f"suite {report.suite} seed {report.seed}"]
        for c in report.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={fmt(c.value)}  tol={fmt(c.tol)}")
        lines.append("PASS" if report.passed else "FAIL")
        text = "\n".join(lines) + "\n"
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("name", "value", "tol", "passed"))
        for c in report.checks:
            writer.writerow((c.name, fmt(c.value), fmt(c.tol), c.passed))
        text = buf.getvalue()
    else:
        text = json.dumps(report.as_dict(), indent=1) + "\n"
    _emit(text, cfg)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "transform": cmd_transform,
    "holonomy": cmd_holonomy,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default=None)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--tol", type=float, help=f"tolerance override (fallback: ${TOL_ENV})")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("-v", "--verbose", action="store_true")

    units = argparse.ArgumentParser(add_help=False)
    units.add_argument("--hbar", type=float, default=1.0)
    units.add_argument("--mass", type=float, default=1.0)
    units.add_argument("--radius", type=float, default=1.0)

    parser = argparse.ArgumentParser(prog="bundlekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common, units], help="twisted-ring spectrum")
    p.add_argument("--alpha", type=float, default=0.0, help="twist in radians")
    p.add_argument("--nmax", type=int, help="mode cutoff N (modes -N..N)")
    p.add_argument("--potential", help="potential file (samples or JSON coefficients)")

    p = sub.add_parser("transform", parents=[common], help="change of frame for a vector file")
    p.add_argument("--input", required=True)
    p.add_argument("--to", choices=("position", "momentum", "line-q", "line-p"))
    p.add_argument("--alpha", type=float, default=0.0, help="twist of the target circle frame")
    p.add_argument("--grid", type=int, help="number of circle samples M")
    p.add_argument("--nmax", type=int, help="mode cutoff for circle analysis")

    p = sub.add_parser("holonomy", parents=[common], help="transport around the twist circle")
    p.add_argument("--grid", type=int, default=64, help="fibre grid size M")
    p.add_argument("--steps", type=int, default=10_000, help="RK4 steps S")
    p.add_argument("--method", choices=("rk4", "exact"), default="rk4")

    p = sub.add_parser("check", parents=[common], help="seeded invariant suites")
    p.add_argument("--suite", default="all", help="one of %s or all" % ", ".join(checks.SUITES))
    return parser


_DEFAULT_FORMAT = {"spectrum": "text", "transform": "text", "holonomy": "csv", "check": "json"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    values = {k: v for k, v in vars(args).items() if k != "verbose"}
    if values.get("fmt") is None:
        values["fmt"] = _DEFAULT_FORMAT[args.command]
    cfg = RunConfig(**values)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except StepError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (VectorFormatError, BundleKitError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
