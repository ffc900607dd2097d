"""Finite-dimensional fibre primitives and the associated-bundle calculus.

A state in the fibre is always stored together with the frame (global
trivialisation) it is expressed in.  Frames carry the quadrature weight that
turns the plain coefficient sum into the continuum inner product:

* ``Momentum(nmax)``: modes ``n = -nmax..nmax``, weight 1 (the l2 sum).
* ``PositionCircle(npoints, alpha)``: samples at ``theta_j = 2 pi j / M``,
  weight ``1/M`` (the ``dtheta / 2 pi`` measure).
* ``PositionLine(npoints, span, domain)``: a centred uniform grid in ``q``
  (or in the conjugate variable ``p``), weight ``dq`` (or ``dp``).

Elements of the associated bundle ``(P x H) / G`` are modelled by
:class:`BundleElement`; since the principal bundle is trivial every class has
a representative with identity group part, which :func:`canonicalize` returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import FrameMismatch, ShapeError

TWO_PI = 2.0 * math.pi

#: default tolerance for unitarity tests, see :func:`is_unitary`
UNITARY_TOL = 1e-10

__all__ = [
    "Momentum",
    "PositionCircle",
    "PositionLine",
    "Frame",
    "FibreVector",
    "TransitionUnitary",
    "BasePoint",
    "BundleElement",
    "inner_product",
    "norm",
    "is_unitary",
    "canonicalize",
    "orbit_equivalent",
    "act",
    "basis_vector",
    "UNITARY_TOL",
]


def wrap_angle(angle: float) -> float:
    """Reduce an angle to ``[0, 2 pi)``."""
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a value just below 0 can round up to exactly 2 pi
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class Momentum:
    """Truncated angular-momentum frame, modes ``-nmax..nmax``."""

    nmax: int

    def __post_init__(self):
        if int(self.nmax) != self.nmax or self.nmax < 0:
            raise ShapeError(f"nmax must be a non-negative integer, got {self.nmax!r}")
        object.__setattr__(self, "nmax", int(self.nmax))

    @property
    def dim(self) -> int:
        return 2 * self.nmax + 1

    @property
    def weight(self) -> float:
        return 1.0

    @property
    def labels(self) -> np.ndarray:
        return np.arange(-self.nmax, self.nmax + 1)


@dataclass(frozen=True)
class PositionCircle:
    """Samples of a (possibly twisted) wavefunction on ``[0, 2 pi)``.

    ``alpha`` is the twist of the boundary condition
    ``psi(theta + 2 pi) = exp(i alpha) psi(theta)``, stored modulo ``2 pi``.
    """

    npoints: int
    alpha: float = 0.0

    def __post_init__(self):
        if int(self.npoints) != self.npoints or self.npoints < 1:
            raise ShapeError(f"npoints must be a positive integer, got {self.npoints!r}")
        object.__setattr__(self, "npoints", int(self.npoints))
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))

    @property
    def dim(self) -> int:
        return self.npoints

    @property
    def weight(self) -> float:
        return 1.0 / self.npoints

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.npoints) / self.npoints


@dataclass(frozen=True)
class PositionLine:
    """Uniform grid on the line.

    The position grid is ``q_j = -span + j dq`` with ``dq = 2 span / M``.
    ``domain="p"`` selects the conjugate momentum grid
    ``p_k = (k - M/2) dp`` with ``dp = 2 pi / (M dq)``, so that
    ``dq * dp * M = 2 pi``.
    """

    npoints: int
    span: float
    domain: str = "q"

    def __post_init__(self):
        if int(self.npoints) != self.npoints or self.npoints < 1:
            raise ShapeError(f"npoints must be a positive integer, got {self.npoints!r}")
        if not self.span > 0:
            raise ShapeError(f"span must be positive, got {self.span!r}")
        if self.domain not in ("q", "p"):
            raise ShapeError(f"domain must be 'q' or 'p', got {self.domain!r}")
        object.__setattr__(self, "npoints", int(self.npoints))
        object.__setattr__(self, "span", float(self.span))

    @property
    def dim(self) -> int:
        return self.npoints

    @property
    def dq(self) -> float:
        return 2.0 * self.span / self.npoints

    @property
    def dp(self) -> float:
        return TWO_PI / (self.npoints * self.dq)

    @property
    def weight(self) -> float:
        return self.dq if self.domain == "q" else self.dp

    @property
    def coords(self) -> np.ndarray:
        offset = np.arange(self.npoints) - self.npoints / 2.0
        return offset * (self.dq if self.domain == "q" else self.dp)

    def conjugate(self) -> "PositionLine":
        return PositionLine(self.npoints, self.span, "p" if self.domain == "q" else "q")


Frame = Union[Momentum, PositionCircle, PositionLine]


@dataclass(frozen=True, eq=False)
class FibreVector:
    """Coefficients of a fibre state in a declared frame."""

    frame: Frame
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.shape[0] != self.frame.dim:
            raise ShapeError(
                f"{self.frame!r} has dimension {self.frame.dim}, got {c.shape[0]} coefficients"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return self.coeffs.shape[0]

    def __repr__(self):
        return f"FibreVector({self.frame!r}, dim={len(self)})"

    def with_coeffs(self, coeffs) -> "FibreVector":
        return FibreVector(self.frame, coeffs)

    def scaled(self, factor: complex) -> "FibreVector":
        return FibreVector(self.frame, factor * self.coeffs)


def basis_vector(frame: Frame, index: int) -> FibreVector:
    """Unit coefficient vector.  For ``Momentum`` frames ``index`` is the mode label."""
    coeffs = np.zeros(frame.dim, dtype=complex)
    if isinstance(frame, Momentum):
        if abs(index) > frame.nmax:
            raise ShapeError(f"mode {index} outside [-{frame.nmax}, {frame.nmax}]")
        coeffs[index + frame.nmax] = 1.0
    else:
        coeffs[index] = 1.0
    return FibreVector(frame, coeffs)


def inner_product(u: FibreVector, v: FibreVector) -> complex:
    """Quadrature inner product, conjugate-linear in ``u``."""
    if u.frame != v.frame:
        raise FrameMismatch(f"cannot pair {u.frame!r} with {v.frame!r}")
    return complex(u.frame.weight * np.vdot(u.coeffs, v.coeffs))


def norm(v: FibreVector) -> float:
    return math.sqrt(v.frame.weight) * float(np.linalg.norm(v.coeffs))


def is_unitary(matrix, tol: float = UNITARY_TOL) -> bool:
    """True iff ``max |U^dagger U - I| <= tol``."""
    u = np.asarray(matrix)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {u.shape}")
    defect = u.conj().T @ u - np.eye(u.shape[0])
    return bool(np.max(np.abs(defect), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class TransitionUnitary:
    """Fibrewise unitary relating two trivialisations.

    ``matrix`` acts on quadrature-weighted coordinates ``sqrt(w) * coeffs``, so
    that it is unitary as a plain matrix.  Use :meth:`apply` to map raw frame
    coefficients.
    """

    source: Frame
    target: Frame
    matrix: np.ndarray
    tol: float = field(default=UNITARY_TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.target.dim, self.source.dim):
            raise ShapeError(
                f"matrix shape {m.shape} does not map dim {self.source.dim} to {self.target.dim}"
            )
        if not is_unitary(m, self.tol):
            raise ShapeError("transition matrix is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def apply(self, v: FibreVector) -> FibreVector:
        if v.frame != self.source:
            raise FrameMismatch(f"transition expects {self.source!r}, got {v.frame!r}")
        scale = math.sqrt(self.source.weight / self.target.weight)
        return FibreVector(self.target, scale * (self.matrix @ v.coeffs))

    def inverse(self) -> "TransitionUnitary":
        return TransitionUnitary(self.target, self.source, self.matrix.conj().T, self.tol)

    def __matmul__(self, other: "TransitionUnitary") -> "TransitionUnitary":
        # self after other
        if other.target != self.source:
            raise FrameMismatch(f"cannot compose: {other.target!r} != {self.source!r}")
        return TransitionUnitary(other.source, self.target, self.matrix @ other.matrix, self.tol)


@dataclass(frozen=True)
class BasePoint:
    """Point of the phase-space base, optionally extended by the twist ``alpha``."""

    theta: float = 0.0
    L: float = 0.0
    alpha: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        object.__setattr__(self, "L", float(self.L))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", wrap_angle(self.alpha))


@dataclass(frozen=True, eq=False)
class BundleElement:
    """Representative ``((m, h), psi)`` of a class in ``(P x H) / G``."""

    base: BasePoint
    group: np.ndarray
    fibre: FibreVector

    def __post_init__(self):
        g = np.array(self.group, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ShapeError(f"group element must be square, got shape {g.shape}")
        if g.shape[0] != len(self.fibre):
            raise ShapeError(
                f"group element of size {g.shape[0]} cannot act on fibre of dim {len(self.fibre)}"
            )
        if not is_unitary(g):
            raise ShapeError("group element is not unitary")
        g.flags.writeable = False
        object.__setattr__(self, "group", g)

    @classmethod
    def trivial(cls, base: BasePoint, fibre: FibreVector) -> "BundleElement":
        return cls(base, np.eye(len(fibre), dtype=complex), fibre)


def act(g, element: BundleElement) -> BundleElement:
    """Left action of ``G`` on ``P x H``: ``g . ((m, h), psi) = ((m, h g^-1), g psi)``."""
    g = np.asarray(g, dtype=complex)
    if g.shape != element.group.shape:
        raise ShapeError(f"group element shape {g.shape} != {element.group.shape}")
    return BundleElement(
        element.base,
        element.group @ g.conj().T,
        element.fibre.with_coeffs(g @ element.fibre.coeffs),
    )


def canonicalize(element: BundleElement) -> tuple[BasePoint, FibreVector]:
    """Return ``(m, h psi)``, the data of the representative ``((m, id), h psi)``."""
    if element.group.shape[0] != len(element.fibre):
        raise ShapeError("group and fibre dimensions differ")
    return element.base, element.fibre.with_coeffs(element.group @ element.fibre.coeffs)


def orbit_equivalent(a: BundleElement, b: BundleElement, tol: float = 1e-12) -> bool:
    """Test whether two representatives name the same point of the bundle."""
    if len(a.fibre) != len(b.fibre):
        raise ShapeError(f"dimensions differ: {len(a.fibre)} vs {len(b.fibre)}")
    if a.base != b.base:
        return False
    _, va = canonicalize(a)
    _, vb = canonicalize(b)
    return norm(va.with_coeffs(va.coeffs - vb.coeffs)) <= tol if va.frame == vb.frame else False
