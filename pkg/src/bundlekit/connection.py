"""Connections on the twist-extended base ``T*S^1 x S^1_alpha``.

The base grid has three axes, always in the order ``("theta", "L", "alpha")``.
Connection components are operator-valued (``D x D`` anti-Hermitian) and are
stored with shapes broadcastable to ``grid.shape + (D, D)``, so a component
that does not vary along an axis costs nothing there.

Parallel transport solves ``d psi + A psi = 0``, i.e. the transport operator
around a loop is ``P exp(-oint A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import GridError, ShapeError, StepError
from .hilbert import TWO_PI, FibreVector, Frame, PositionCircle, TransitionUnitary

__all__ = [
    "DIRECTIONS",
    "BaseGrid",
    "ConnectionForm",
    "CurvatureForm",
    "TransportResult",
    "gauge_transform",
    "curvature_fd",
    "covariant_derivative_alpha",
    "parallel_transport_alpha",
    "holonomy_operator",
    "twist_connection",
    "transport_loop",
    "inverse_family",
]

DIRECTIONS = ("theta", "L", "alpha")
_AXIS = {d: i for i, d in enumerate(DIRECTIONS)}
ANTI_HERMITIAN_TOL = 1e-11


@dataclass(frozen=True)
class BaseGrid:
    """Sample points of the base ``M'``.

    ``alpha`` runs over the full circle, ``alpha_s = 2 pi s / S``.  The
    ``theta`` axis is either the full circle (``theta_periodic=True``, the
    values must then be ``2 pi i / n``) or a uniformly spaced patch; ``L`` is
    always a uniformly spaced patch.  Single-point axes are directions along
    which every sampled object is taken to be constant.
    """

    alpha_steps: int
    npoints: int = 1
    theta: tuple = (0.0,)
    L: tuple = (0.0,)
    theta_periodic: bool = False

    def __post_init__(self):
        if self.alpha_steps < 2:
            raise GridError(f"need at least 2 twist samples, got {self.alpha_steps}")
        if self.npoints < 1:
            raise GridError("fibre grid needs at least one point")
        for name in ("theta", "L"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.ndim != 1 or values.size == 0:
                raise GridError(f"{name} axis must be a non-empty 1-d sequence")
            if values.size > 1 and not np.allclose(np.diff(values), values[1] - values[0], rtol=1e-10, atol=1e-14):
                raise GridError(f"{name} axis must be uniformly spaced")
            object.__setattr__(self, name, tuple(float(v) for v in values))

    @classmethod
    def theta_circle(cls, alpha_steps: int, theta_steps: int, npoints: int = 1, L=(0.0,)) -> "BaseGrid":
        return cls(alpha_steps, npoints, tuple(TWO_PI * np.arange(theta_steps) / theta_steps), L, True)

    @property
    def shape(self) -> tuple:
        return (len(self.theta), len(self.L), self.alpha_steps)

    @property
    def alphas(self) -> np.ndarray:
        return TWO_PI * np.arange(self.alpha_steps) / self.alpha_steps

    def coords(self, direction: str) -> np.ndarray:
        if direction == "alpha":
            return self.alphas
        return np.asarray(getattr(self, direction))

    def spacing(self, direction: str) -> float:
        c = self.coords(direction)
        return float(c[1] - c[0]) if c.size > 1 else 0.0

    def periodic(self, direction: str) -> bool:
        return direction == "alpha" or (direction == "theta" and self.theta_periodic)

    def points(self):
        """Iterate ``(index, (theta, L, alpha))`` over every grid node."""
        th, ls, al = (self.coords(d) for d in DIRECTIONS)
        for idx in np.ndindex(*self.shape):
            yield idx, (th[idx[0]], ls[idx[1]], al[idx[2]])


def _derivative(values: np.ndarray, grid: BaseGrid, direction: str) -> np.ndarray:
    """Second-order central difference along a base axis of a sampled field."""
    axis = _AXIS[direction]
    n = grid.shape[axis]
    if values.shape[axis] == 1 or n == 1:
        return np.zeros_like(values)
    h = grid.spacing(direction)
    if grid.periodic(direction):
        if n < 3:
            raise GridError(f"periodic direction {direction} needs at least 3 samples, has {n}")
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    if n < 3:
        return np.gradient(values, h, axis=axis)
    return np.gradient(values, h, axis=axis, edge_order=2)


def _anti_hermitian_defect(x: np.ndarray) -> float:
    return float(np.max(np.abs(x + np.swapaxes(x, -1, -2).conj()), initial=0.0))


@dataclass(frozen=True, eq=False)
class ConnectionForm:
    """Operator-valued one-form ``A = sum_d A_d d(x_d)`` sampled on a base grid."""

    grid: BaseGrid
    dim: int
    components: dict = field(default_factory=dict)
    frame: Optional[Frame] = None
    tol: float = ANTI_HERMITIAN_TOL

    def __post_init__(self):
        comps = {}
        target = self.grid.shape + (self.dim, self.dim)
        for d, value in self.components.items():
            if d not in _AXIS:
                raise GridError(f"unknown base direction {d!r}")
            arr = np.asarray(value, dtype=complex)
            if arr.ndim == 2:
                arr = arr.reshape((1, 1, 1) + arr.shape)
            try:
                np.broadcast_shapes(arr.shape, target)
            except ValueError:
                raise GridError(f"component {d} of shape {arr.shape} does not fit {target}") from None
            if arr.shape[-2:] != (self.dim, self.dim):
                raise ShapeError(f"component {d} is not {self.dim}x{self.dim}")
            scale = max(1.0, float(np.max(np.abs(arr), initial=0.0)))
            if _anti_hermitian_defect(arr) > self.tol * scale:
                raise ValueError(f"component {d} is not anti-Hermitian")
            comps[d] = arr
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, grid: BaseGrid, dim: int, frame: Optional[Frame] = None) -> "ConnectionForm":
        return cls(grid, dim, {}, frame)

    def component(self, direction: str, full: bool = False) -> np.ndarray:
        arr = self.components.get(direction)
        if arr is None:
            arr = np.zeros((1, 1, 1, self.dim, self.dim), dtype=complex)
        if full:
            return np.broadcast_to(arr, self.grid.shape + (self.dim, self.dim))
        return arr

    def max_norm(self) -> float:
        return max([0.0] + [float(np.max(np.abs(a))) for a in self.components.values()])


@dataclass(frozen=True, eq=False)
class CurvatureForm:
    """Two-form components ``F[(d1, d2)]`` for ``d1`` before ``d2`` in ``DIRECTIONS``."""

    grid: BaseGrid
    components: dict

    def component(self, d1: str, d2: str) -> np.ndarray:
        if d1 == d2:
            return np.zeros(1)
        if _AXIS[d1] > _AXIS[d2]:
            return -self.component(d2, d1)
        return self.components[(d1, d2)]

    def max_norm(self) -> float:
        return max([0.0] + [float(np.max(np.abs(f))) for f in self.components.values()])


@dataclass
class TransportResult:
    initial: FibreVector
    final: FibreVector
    # final_j / initial_j; NaN where the initial entry vanishes
    holonomy_phase_per_theta: np.ndarray
    steps: int = 0
    method: str = "rk4"

    @property
    def norm_change(self) -> float:
        return abs(float(np.linalg.norm(self.final.coeffs)) - float(np.linalg.norm(self.initial.coeffs)))


def _as_matrix(value) -> np.ndarray:
    if isinstance(value, TransitionUnitary):
        return value.matrix
    return np.asarray(value, dtype=complex)


def _family_derivative(family, point, direction: str, h: float, mode: str) -> np.ndarray:
    if mode == "analytic" and hasattr(family, "derivative"):
        return _as_matrix(family.derivative(*point, direction))
    plus, minus = list(point), list(point)
    i = _AXIS[direction]
    plus[i] += h
    minus[i] -= h
    return (_as_matrix(family(*plus)) - _as_matrix(family(*minus))) / (2.0 * h)


def gauge_transform(
    A: ConnectionForm,
    family: Callable,
    frame: Optional[Frame] = None,
    derivative: str = "analytic",
    directions: Sequence[str] = DIRECTIONS,
) -> ConnectionForm:
    """Change of frame ``A' = g A g^-1 - (dg) g^-1``.

    Parameters
    ----------
    A : ConnectionForm
        Connection in the source frame.
    family : callable
        ``family(theta, L, alpha)`` returns the transition unitary (matrix or
        :class:`TransitionUnitary`) at a base point.  If it has a
        ``derivative(theta, L, alpha, direction)`` method and ``derivative``
        is ``"analytic"`` that is used for ``dg``.
    derivative : {"analytic", "central"}
        ``"central"`` differentiates the family by central differences with
        the grid spacing as step (so errors are ``O(h^2)``).
    directions : sequence of str
        Base directions along which ``g`` may vary; ``dg`` is zero along the
        others.  Single-point axes use ``2 pi / alpha_steps`` as step.
    """
    if derivative not in ("analytic", "central"):
        raise ValueError(f"unknown derivative mode {derivative!r}")
    grid = A.grid
    dim = A.dim
    full = {d: A.component(d, full=True) for d in DIRECTIONS}
    out = {d: np.empty(grid.shape + (dim, dim), dtype=complex) for d in DIRECTIONS}
    steps = {d: grid.spacing(d) or TWO_PI / grid.alpha_steps for d in DIRECTIONS}
    for idx, point in grid.points():
        g = _as_matrix(family(*point))
        if g.shape != (dim, dim):
            raise GridError(f"transition at {point} has shape {g.shape}, connection has dim {dim}")
        ginv = g.conj().T
        for d in DIRECTIONS:
            value = g @ full[d][idx] @ ginv
            if d in directions:
                value = value - _family_derivative(family, point, d, steps[d], derivative) @ ginv
            out[d][idx] = value
    comps = {}
    for d, arr in out.items():
        if np.any(arr != 0):
            comps[d] = _compress(arr)
    scale = max(1.0, max([float(np.max(np.abs(a))) for a in comps.values()] or [0.0]))
    tol = max(A.tol, ANTI_HERMITIAN_TOL)
    if derivative == "central":
        # a difference quotient of a unitary family is anti-Hermitian only to O(h^2)
        tol = max(tol, max(steps[d] for d in directions) ** 2)
    return ConnectionForm(grid, dim, comps, frame, tol=tol * scale)


def _compress(arr: np.ndarray) -> np.ndarray:
    """Collapse axes along which the samples are constant up to roundoff."""
    slack = 8 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(arr), initial=0.0)))
    for axis in range(3):
        if arr.shape[axis] > 1:
            first = np.take(arr, [0], axis=axis)
            if np.max(np.abs(arr - first)) <= slack:
                arr = first
    return arr


class inverse_family:
    """Pointwise inverse ``g^-1 = g^dagger`` of a unitary family.

    Carries the exact derivative ``d(g^dagger) = (dg)^dagger`` when the
    wrapped family has one.
    """

    def __init__(self, family):
        self.family = family
        if hasattr(family, "derivative"):
            self.derivative = lambda th, L, al, d: _as_matrix(family.derivative(th, L, al, d)).conj().T

    def __call__(self, theta, L, alpha):
        return _as_matrix(self.family(theta, L, alpha)).conj().T


def curvature_fd(A: ConnectionForm) -> CurvatureForm:
    """Curvature ``F = dA + A ^ A`` with central differences on the base grid.

    ``F[(i, j)] = d_i A_j - d_j A_i + [A_i, A_j]``.  A direction carrying a
    non-zero component must be resolved by the grid (3 samples on a circle,
    2 on a patch).
    """
    grid = A.grid
    for d, arr in A.components.items():
        n = grid.shape[_AXIS[d]]
        if np.any(arr != 0) and n > 1 and grid.periodic(d) and n < 3:
            raise GridError(f"direction {d} needs at least 3 samples")
    out = {}
    for a, i in enumerate(DIRECTIONS):
        for j in DIRECTIONS[a + 1:]:
            ai = A.component(i, full=True)
            aj = A.component(j, full=True)
            f = _derivative(np.asarray(aj), grid, i) - _derivative(np.asarray(ai), grid, j)
            f = f + ai @ aj - aj @ ai
            out[(i, j)] = f
    return CurvatureForm(grid, out)


def covariant_derivative_alpha(
    section, A: ConnectionForm, base_index: tuple = (0, 0)
) -> np.ndarray:
    """``D_alpha psi = d psi / d alpha + A_alpha psi`` along the twist grid.

    ``section`` has shape ``(S, D)``: one fibre vector per ``alpha_s``.  The
    section is a path over ``[0, 2 pi)`` rather than a field on the circle
    (in a twisted frame it need not close up), so the end points use
    one-sided second-order differences.
    """
    grid = A.grid
    if isinstance(section, Sequence) and section and isinstance(section[0], FibreVector):
        psi = np.stack([v.coeffs for v in section])
    else:
        psi = np.asarray(section, dtype=complex)
    if psi.shape != (grid.alpha_steps, A.dim):
        raise GridError(f"section shape {psi.shape} != ({grid.alpha_steps}, {A.dim})")
    if grid.alpha_steps < 3:
        raise GridError("need at least 3 twist samples")
    h = grid.spacing("alpha")
    dpsi = np.gradient(psi, h, axis=0, edge_order=2)
    a_alpha = A.component("alpha", full=True)[base_index[0], base_index[1]]
    return dpsi + np.einsum("sij,sj->si", a_alpha, psi)


def holonomy_operator(npoints: int) -> np.ndarray:
    """Closed-form holonomy ``diag(exp(i theta_j))`` around the twist circle."""
    theta = TWO_PI * np.arange(npoints) / npoints
    return np.diag(np.exp(1j * theta))


def twist_connection(grid: BaseGrid, frame: Optional[Frame] = None) -> ConnectionForm:
    """Position-frame connection induced by the shifted Fourier family.

    Its only component is ``A_alpha = -diag(i theta_j / 2 pi)``, constant over
    the base; for odd fibre grids it coincides with
    ``gauge_transform(zero, ShiftedFourierFamily(N))``.
    """
    theta = TWO_PI * np.arange(grid.npoints) / grid.npoints
    a_alpha = np.diag(-1j * theta / TWO_PI)
    return ConnectionForm(grid, grid.npoints, {"alpha": a_alpha}, frame or PositionCircle(grid.npoints))


def _alpha_generator(A: ConnectionForm, steps: int, base_index):
    """Return ``(kind, data)`` describing ``A_alpha`` for the integrator."""
    arr = A.component("alpha")
    arr = arr[min(base_index[0], arr.shape[0] - 1), min(base_index[1], arr.shape[1] - 1)]
    if arr.shape[0] == 1:
        samples = arr[0]
        const = True
    elif arr.shape[0] == 2 * steps:
        samples = arr
        const = False
    else:
        raise GridError(
            f"A_alpha varies over {arr.shape[0]} samples; RK4 with {steps} steps needs {2 * steps}"
        )
    return const, samples


def parallel_transport_alpha(
    psi0: FibreVector,
    A: ConnectionForm,
    steps: int,
    method: str = "auto",
    base_index: tuple = (0, 0),
) -> TransportResult:
    """Transport ``psi0`` once around ``alpha: 0 -> 2 pi`` at a fixed base point.

    Solves ``d psi / d alpha = -A_alpha psi`` with ``steps`` classical RK4
    steps.  ``A_alpha`` must be constant in ``alpha`` or sampled at
    ``2 * steps`` points (the RK4 half steps).  ``method="exact"`` uses the
    matrix exponential for constant generators; ``"auto"`` picks it only for
    constant diagonal ones.
    """
    if steps < 4:
        raise StepError(f"need at least 4 steps, got {steps}")
    h = TWO_PI / steps
    if h == 0.0 or h + TWO_PI == TWO_PI:
        raise StepError("step size underflows")
    if psi0.frame.dim != A.dim:
        raise ShapeError(f"state of dim {psi0.frame.dim} vs connection of dim {A.dim}")
    const, samples = _alpha_generator(A, steps, base_index)
    diagonal = const and not np.any(samples - np.diag(np.diag(samples)))
    if method == "auto":
        method = "exact" if diagonal else "rk4"
    psi = psi0.coeffs.astype(complex)
    if method == "exact":
        if not const:
            raise GridError("exact transport needs an alpha-independent generator")
        if diagonal:
            final = np.exp(-TWO_PI * np.diag(samples)) * psi
        else:
            final = expm(-TWO_PI * samples) @ psi
    elif method == "rk4":
        if const and diagonal:
            d = -np.diag(samples)
            gen = lambda k, v: d * v  # noqa: E731
        elif const:
            m = -samples
            gen = lambda k, v: m @ v  # noqa: E731
        else:
            gen = lambda k, v: -(samples[k % (2 * steps)] @ v)  # noqa: E731
        for s in range(steps):
            k0 = 2 * s
            k1 = gen(k0, psi)
            k2 = gen(k0 + 1, psi + 0.5 * h * k1)
            k3 = gen(k0 + 1, psi + 0.5 * h * k2)
            k4 = gen(k0 + 2, psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        final = psi
        if not np.all(np.isfinite(final)):
            raise StepError("transport diverged")
    else:
        raise ValueError(f"unknown method {method!r}")
    initial = psi0.coeffs
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.where(initial != 0, final / np.where(initial != 0, initial, 1), np.nan + 1j * np.nan)
    return TransportResult(psi0, psi0.with_coeffs(final), phase, steps, method)


def transport_loop(A: ConnectionForm, path: Sequence[tuple], psi0: FibreVector) -> FibreVector:
    """Transport along a path of neighbouring grid nodes.

    Each hop moves one index along one axis (wrapping on periodic axes); the
    hop propagator is ``exp(-h A_d)`` with ``A_d`` averaged over the two ends.
    """
    grid = A.grid
    psi = psi0.coeffs.astype(complex)
    for a, b in zip(path[:-1], path[1:]):
        moved = [i for i in range(3) if a[i] != b[i]]
        if len(moved) != 1:
            raise GridError(f"hop {a} -> {b} is not along a single axis")
        axis = moved[0]
        d = DIRECTIONS[axis]
        n = grid.shape[axis]
        step = b[axis] - a[axis]
        if grid.periodic(d) and abs(step) == n - 1:
            step = -int(math.copysign(1, step))
        if abs(step) != 1:
            raise GridError(f"hop {a} -> {b} skips grid nodes")
        comp = A.component(d, full=True)
        gen = 0.5 * (comp[tuple(a)] + comp[tuple(b)])
        psi = expm(-step * grid.spacing(d) * gen) @ psi
    return psi0.with_coeffs(psi)
