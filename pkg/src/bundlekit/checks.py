"""Seeded invariant suites run by ``bundlekit check``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import connection as conn
from .duality import (
    ShiftedFourierFamily,
    TwistParam,
    LineGrid,
    analysis,
    line_fourier,
    shifted_analysis,
    shifted_fourier_matrix,
    shifted_synthesis,
    synthesis,
    transition_unitary,
    twist_defect,
)
from .hilbert import FibreVector, Momentum, PositionCircle, inner_product, TWO_PI
from .spectra import PotentialSpec, build_hamiltonian, free_energies, solve_eigen

SUITES = ("unitarity", "roundtrip", "spectrum", "flatness", "gauge", "holonomy")


@dataclass
class Check:
    """``value`` must not exceed ``tol`` (or, with ``at_least``, not fall below it)."""

    name: str
    value: float
    tol: float
    at_least: bool = False
    passed: bool = field(init=False)

    def __post_init__(self):
        self.value = float(self.value)
        self.passed = bool(self.value >= self.tol if self.at_least else self.value <= self.tol)


@dataclass
class CheckReport:
    suite: str
    seed: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _momentum(rng, nmax):
    return FibreVector(Momentum(nmax), _cvec(rng, 2 * nmax + 1))


def suite_unitarity(rng, tol: Callable[[float], float]) -> list[Check]:
    out = []
    nmax, npoints = 64, 129
    for alpha in (0.0, 1.0, math.pi):
        worst = 0.0
        for _ in range(20):
            c, d = _momentum(rng, nmax), _momentum(rng, nmax)
            fc = shifted_synthesis(c, alpha, npoints)
            fd = shifted_synthesis(d, alpha, npoints)
            worst = max(worst, abs(inner_product(fc, fd) - inner_product(c, d)))
        out.append(Check(f"parseval alpha={alpha:.6g}", worst, tol(1e-11)))
        u = transition_unitary(Momentum(nmax), PositionCircle(npoints, alpha)).matrix
        out.append(Check(f"transition unitary alpha={alpha:.6g}", np.max(np.abs(u.conj().T @ u - np.eye(npoints))), tol(1e-10)))
    grid = LineGrid(256, 12.0)
    u = transition_unitary(grid.p_frame, grid.q_frame).matrix
    out.append(Check("line transition unitary", np.max(np.abs(u.conj().T @ u - np.eye(256))), tol(1e-10)))
    return out


def suite_roundtrip(rng, tol) -> list[Check]:
    out = []
    for nmax, npoints in ((16, 64), (128, 257)):
        c = _momentum(rng, nmax)
        back = analysis(synthesis(c, npoints), nmax)
        out.append(Check(f"analysis o synthesis N={nmax}", np.max(np.abs(back.coeffs - c.coeffs)), tol(1e-12)))
        alpha = float(rng.uniform(0, TWO_PI))
        back = shifted_analysis(shifted_synthesis(c, alpha, npoints), nmax)
        out.append(Check(f"shifted round trip N={nmax}", np.max(np.abs(back.coeffs - c.coeffs)), tol(1e-12)))
    c = _momentum(rng, 32)
    fast = shifted_synthesis(c, 1.3, 129)
    direct = shifted_fourier_matrix(32, 129, 1.3) @ c.coeffs
    out.append(Check("fft path vs direct sum", np.max(np.abs(fast.coeffs - direct)), tol(1e-12)))
    out.append(Check("twist defect", max(twist_defect(_momentum(rng, 8), float(rng.uniform(0, TWO_PI))) for _ in range(20)), tol(1e-12)))
    grid = LineGrid(256, 12.0)
    psi = FibreVector(grid.p_frame, _cvec(rng, 256))
    back = line_fourier(line_fourier(psi, "p->q"), "q->p")
    out.append(Check("line round trip", np.max(np.abs(back.coeffs - psi.coeffs)), tol(1e-10)))
    gauss = line_fourier(FibreVector(grid.p_frame, np.exp(-grid.p**2 / 2)), "p->q")
    out.append(Check("line gaussian fixed point", np.max(np.abs(gauss.coeffs - np.exp(-grid.q**2 / 2))), tol(1e-8)))
    return out


def _interior_gap(nmax, alpha):
    a = free_energies(nmax, TwistParam(alpha)).eigenvalues
    b = free_energies(nmax, TwistParam(alpha + TWO_PI)).eigenvalues
    # labels -N+1..N-1 at alpha + 2 pi are labels -N+2..N at alpha
    return np.max(np.abs(np.sort(b[1:-1]) - np.sort(a[2:])))


def suite_spectrum(rng, tol) -> list[Check]:
    out = []
    nmax = 32
    for alpha in (0.0, math.pi / 2, math.pi):
        solved = solve_eigen(build_hamiltonian(nmax, TwistParam(alpha))).eigenvalues
        exact = np.sort(free_energies(nmax, TwistParam(alpha)).eigenvalues)
        out.append(Check(f"free spectrum alpha={alpha:.6g}", np.max(np.abs(solved - exact)), tol(1e-10)))
        out.append(Check(f"alpha vs alpha+2pi alpha={alpha:.6g}", _interior_gap(nmax, alpha), tol(1e-12)))
    low = solve_eigen(build_hamiltonian(nmax, TwistParam(math.pi))).eigenvalues
    out.append(Check("degenerate ground pair at alpha=pi", abs(low[0] - low[1]), tol(1e-12)))
    h = build_hamiltonian(nmax, TwistParam(0.7), potential=PotentialSpec.cosine(1.0))
    u = transition_unitary(PositionCircle(2 * nmax + 1, 0.7), Momentum(nmax)).matrix
    e1 = solve_eigen(h).eigenvalues
    e2 = solve_eigen(u.conj().T @ h @ u, tol=1e-9).eigenvalues
    out.append(Check("frame independence", np.max(np.abs(e1 - e2)), tol(1e-9)))
    return out


def suite_flatness(rng, tol) -> list[Check]:
    out = []
    nmax = 8
    grid = conn.BaseGrid(32, 2 * nmax + 1)
    zero = conn.ConnectionForm.zero(grid, grid.npoints)
    out.append(Check("zero connection curvature", conn.curvature_fd(zero).max_norm(), tol(1e-9)))
    a_prime = conn.gauge_transform(zero, ShiftedFourierFamily(nmax))
    out.append(Check("twist-frame curvature", conn.curvature_fd(a_prime).max_norm(), tol(1e-9)))
    fd = conn.gauge_transform(zero, ShiftedFourierFamily(nmax), derivative="central")
    out.append(Check("twist-frame curvature (central dg)", conn.curvature_fd(fd).max_norm(), tol(1e-9)))
    return out


def _synthetic(grid, x, y):
    th = grid.coords("theta")[:, None, None, None, None]
    al = grid.coords("alpha")[None, None, :, None, None]
    return conn.ConnectionForm(
        grid, x.shape[0], {"alpha": 1j * np.sin(th) * x, "theta": 1j * np.cos(al) * y}
    )


def _hermitian(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


class _ExpFamily:
    """Non-commuting test family ``exp(i sin(theta) X) exp(i sin(alpha) Y)``."""

    def __init__(self, x, y):
        self.x, self.y = x, y

    def __call__(self, theta, L, alpha):
        from scipy.linalg import expm

        return expm(1j * np.sin(theta) * self.x) @ expm(1j * np.sin(alpha) * self.y)


def synthetic_curvature(grid, x, y):
    """Exact curvature of :func:`_synthetic`."""
    th = grid.coords("theta")[:, None, None, None, None]
    al = grid.coords("alpha")[None, None, :, None, None]
    a_th = 1j * np.cos(al) * y
    a_al = 1j * np.sin(th) * x
    return 1j * np.cos(th) * x + 1j * np.sin(al) * y + a_th @ a_al - a_al @ a_th


def suite_gauge(rng, tol) -> list[Check]:
    out = []
    x, y = _hermitian(rng, 3), _hermitian(rng, 3)
    fam = _ExpFamily(_hermitian(rng, 3) * 0.3, _hermitian(rng, 3) * 0.3)
    analytic_err, covariance_err = [], []
    for steps in (24, 48):
        grid = conn.BaseGrid.theta_circle(steps, steps, 3)
        a = _synthetic(grid, x, y)
        f = conn.curvature_fd(a).component("theta", "alpha")
        exact = synthetic_curvature(grid, x, y)
        analytic_err.append(np.max(np.abs(f - exact)) / np.max(np.abs(exact)))
        g_f = conn.curvature_fd(conn.gauge_transform(a, fam, derivative="central")).component("theta", "alpha")
        covariant = np.empty_like(f)
        for idx, point in grid.points():
            g = fam(*point)
            covariant[idx] = g @ f[idx] @ g.conj().T
        covariance_err.append(np.max(np.abs(g_f - covariant)) / np.max(np.abs(exact)))
    out.append(Check("synthetic curvature rel. error (48x48)", analytic_err[-1], tol(2e-2)))
    out.append(Check("synthetic curvature observed order", math.log2(analytic_err[0] / analytic_err[1]), 1.8, at_least=True))
    out.append(Check("curvature covariance rel. error (48x48)", covariance_err[-1], tol(2e-2)))
    out.append(Check("curvature covariance observed order", math.log2(covariance_err[0] / covariance_err[1]), 1.8, at_least=True))
    nmax = 6
    grid = conn.BaseGrid(16, 2 * nmax + 1)
    zero = conn.ConnectionForm.zero(grid, grid.npoints)
    fam = ShiftedFourierFamily(nmax)
    a1 = conn.gauge_transform(zero, fam)
    a2 = conn.gauge_transform(a1, conn.inverse_family(fam))
    out.append(Check("gauge round trip", a2.max_norm(), tol(1e-8)))
    exact = -np.diag(1j * fam.theta / TWO_PI)
    out.append(Check("A' = -diag(i theta / 2 pi)", np.max(np.abs(a1.component("alpha", full=True) - exact)), tol(1e-12)))
    return out


def suite_holonomy(rng, tol) -> list[Check]:
    out = []
    npoints, steps = 64, 10_000
    grid = conn.BaseGrid(steps, npoints)
    a = conn.twist_connection(grid)
    psi0 = FibreVector(PositionCircle(npoints), _cvec(rng, npoints))
    res = conn.parallel_transport_alpha(psi0, a, steps, method="rk4")
    expected = np.diag(conn.holonomy_operator(npoints))
    out.append(Check("rk4 phases vs exp(i theta)", np.max(np.abs(res.holonomy_phase_per_theta - expected)), tol(1e-8)))
    out.append(Check("rk4 norm preservation", res.norm_change / np.linalg.norm(psi0.coeffs), tol(1e-10)))
    out.append(Check("phase at theta=pi", abs(res.holonomy_phase_per_theta[npoints // 2] + 1), tol(1e-8)))
    exact = conn.parallel_transport_alpha(psi0, a, steps, method="exact")
    out.append(Check("rk4 vs exact exponential", np.max(np.abs(exact.final.coeffs - res.final.coeffs)), tol(1e-8)))
    return out


_SUITE_FUNCS = {
    "unitarity": suite_unitarity,
    "roundtrip": suite_roundtrip,
    "spectrum": suite_spectrum,
    "flatness": suite_flatness,
    "gauge": suite_gauge,
    "holonomy": suite_holonomy,
}


def run_suite(name: str, seed: int = 42, tol_override: Optional[float] = None) -> CheckReport:
    """Run one suite (or ``"all"``) with a fixed seed.

    ``tol_override`` replaces every documented tolerance.
    """
    names = SUITES if name == "all" else (name,)
    if any(n not in _SUITE_FUNCS for n in names):
        raise KeyError(name)
    tol = (lambda t: t) if tol_override is None else (lambda t: tol_override)
    checks = []
    for n in names:
        rng = np.random.default_rng([seed, SUITES.index(n)])
        for c in _SUITE_FUNCS[n](rng, tol):
            c.name = f"{n}: {c.name}"
            checks.append(c)
    return CheckReport(name, seed, checks)
