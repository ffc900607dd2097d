"""Position/momentum dualities as fibrewise unitaries.

Conventions: circle synthesis uses ``exp(+i n theta)`` and analysis the
``1/2pi`` normalisation; the line transform uses ``exp(+i q p) / sqrt(2 pi)``
from momentum to position.  Twisted frames use the shifted modes
``exp(i (n + phi) theta)`` with ``phi = alpha / 2 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AliasError, FrameMismatch, GridError
from .hilbert import (
    TWO_PI,
    FibreVector,
    Frame,
    Momentum,
    PositionCircle,
    PositionLine,
    TransitionUnitary,
)

__all__ = [
    "TwistParam",
    "LineGrid",
    "synthesis",
    "analysis",
    "shifted_synthesis",
    "shifted_analysis",
    "shifted_fourier_matrix",
    "transition_unitary",
    "line_fourier",
    "twist_defect",
    "ShiftedFourierFamily",
]


@dataclass(frozen=True)
class TwistParam:
    """Twist angle ``alpha`` and its fraction ``phi = alpha / 2 pi``.

    ``alpha`` is kept as given, not reduced: the mode labelling of the
    shifted basis depends on the lift of ``alpha``, and the spectral checks
    compare ``alpha`` with ``alpha + 2 pi``.  :meth:`normalized` reduces it.
    """

    alpha: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError(f"twist must be finite, got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def phi(self) -> float:
        return self.alpha / TWO_PI

    def normalized(self) -> "TwistParam":
        return TwistParam(PositionCircle(1, self.alpha).alpha)


def _twist(twist) -> TwistParam:
    return twist if isinstance(twist, TwistParam) else TwistParam(float(twist))


@dataclass(frozen=True)
class LineGrid:
    """Paired uniform grids in ``q`` and ``p`` with ``dq * dp * M = 2 pi``."""

    npoints: int
    span: float

    @property
    def q_frame(self) -> PositionLine:
        return PositionLine(self.npoints, self.span, "q")

    @property
    def p_frame(self) -> PositionLine:
        return PositionLine(self.npoints, self.span, "p")

    @property
    def dq(self) -> float:
        return self.q_frame.dq

    @property
    def dp(self) -> float:
        return self.q_frame.dp

    @property
    def q(self) -> np.ndarray:
        return self.q_frame.coords

    @property
    def p(self) -> np.ndarray:
        return self.p_frame.coords


def _check_band(nmax: int, npoints: int):
    if npoints < 2 * nmax + 1:
        raise AliasError(f"{npoints} samples cannot resolve modes -{nmax}..{nmax}")


def shifted_fourier_matrix(nmax: int, npoints: int, alpha: float = 0.0) -> np.ndarray:
    """Unweighted synthesis matrix ``S[j, n] = exp(i (n + phi) theta_j)``."""
    phi = _twist(alpha).phi
    theta = TWO_PI * np.arange(npoints) / npoints
    n = np.arange(-nmax, nmax + 1)
    return np.exp(1j * np.outer(theta, n + phi))


def _fft_synthesis(c: np.ndarray, nmax: int, npoints: int) -> np.ndarray:
    buf = np.zeros(npoints, dtype=complex)
    buf[np.arange(-nmax, nmax + 1) % npoints] = c
    return npoints * np.fft.ifft(buf)


def _fft_analysis(psi: np.ndarray, nmax: int) -> np.ndarray:
    npoints = psi.shape[0]
    return np.fft.fft(psi)[np.arange(-nmax, nmax + 1) % npoints] / npoints


def synthesis(c: FibreVector, npoints: int, method: str = "fft") -> FibreVector:
    """``psi_j = sum_n c_n exp(i n theta_j)`` on an ``npoints`` grid."""
    return shifted_synthesis(c, TwistParam(0.0), npoints, method)


def analysis(psi: FibreVector, nmax: int, method: str = "fft") -> FibreVector:
    """``c_n = (1/M) sum_j psi_j exp(-i n theta_j)``."""
    if not isinstance(psi.frame, PositionCircle):
        raise FrameMismatch(f"analysis expects a circle frame, got {psi.frame!r}")
    return shifted_analysis(psi, nmax, method, twist=TwistParam(0.0))


def shifted_synthesis(
    c: FibreVector, twist, npoints: int, method: str = "fft"
) -> FibreVector:
    """Apply the shifted Fourier transform ``F_alpha`` to momentum coefficients.

    Parameters
    ----------
    c : FibreVector
        Coefficients in a ``Momentum(N)`` frame.
    twist : TwistParam or float
        Twist angle ``alpha`` (radians).
    npoints : int
        Number of samples ``M``; must satisfy ``M >= 2N + 1``.
    method : {"fft", "direct"}
        ``"direct"`` multiplies by the dense synthesis matrix.

    Returns
    -------
    FibreVector
        Samples ``psi_j = sum_n c_n exp(i (n + phi) theta_j)`` in the frame
        ``PositionCircle(M, alpha)``.
    """
    if not isinstance(c.frame, Momentum):
        raise FrameMismatch(f"synthesis expects a Momentum frame, got {c.frame!r}")
    tw = _twist(twist)
    nmax = c.frame.nmax
    _check_band(nmax, npoints)
    target = PositionCircle(npoints, tw.alpha)
    if method == "direct":
        return FibreVector(target, shifted_fourier_matrix(nmax, npoints, tw.alpha) @ c.coeffs)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    psi = _fft_synthesis(c.coeffs, nmax, npoints)
    if tw.phi != 0.0:
        psi = np.exp(1j * tw.phi * target.theta) * psi
    return FibreVector(target, psi)


def shifted_analysis(
    psi: FibreVector, nmax: int, method: str = "fft", twist=None
) -> FibreVector:
    """Left inverse of :func:`shifted_synthesis`.

    The twist is read from the input frame unless ``twist`` is given (which
    lets callers use an unreduced lift of ``alpha``).
    """
    if not isinstance(psi.frame, PositionCircle):
        raise FrameMismatch(f"analysis expects a circle frame, got {psi.frame!r}")
    tw = TwistParam(psi.frame.alpha) if twist is None else _twist(twist)
    npoints = psi.frame.npoints
    _check_band(nmax, npoints)
    target = Momentum(nmax)
    if method == "direct":
        s = shifted_fourier_matrix(nmax, npoints, tw.alpha)
        return FibreVector(target, s.conj().T @ psi.coeffs / npoints)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    samples = psi.coeffs
    if tw.phi != 0.0:
        samples = np.exp(-1j * tw.phi * psi.frame.theta) * samples
    return FibreVector(target, _fft_analysis(samples, nmax))


def _line_kernel(grid: LineGrid, sign: int) -> np.ndarray:
    # weighted kernel, unitary as a plain matrix: exp(+-i q_j p_k) / sqrt(M)
    return np.exp(sign * 1j * np.outer(grid.q, grid.p)) / math.sqrt(grid.npoints)


def _circle_matrix(m: Momentum, pos: PositionCircle) -> np.ndarray:
    if pos.npoints != m.dim:
        raise FrameMismatch(
            f"{pos!r} and {m!r} differ in truncation; a unitary needs M = 2N + 1"
        )
    return shifted_fourier_matrix(m.nmax, pos.npoints, pos.alpha) / math.sqrt(pos.npoints)


def transition_unitary(source: Frame, target: Frame) -> TransitionUnitary:
    """Matrix of the change of trivialisation ``source -> target``.

    Supported pairs: identical frames (identity), ``Momentum(N)`` and
    ``PositionCircle(2N+1, alpha)`` in either direction, two circle frames of
    equal odd size with different twists (through the momentum frame), and the
    ``q`` and ``p`` grids of one :class:`LineGrid`.
    """
    if source == target:
        return TransitionUnitary(source, target, np.eye(source.dim, dtype=complex))
    if isinstance(source, Momentum) and isinstance(target, PositionCircle):
        return TransitionUnitary(source, target, _circle_matrix(source, target))
    if isinstance(source, PositionCircle) and isinstance(target, Momentum):
        return TransitionUnitary(source, target, _circle_matrix(target, source).conj().T)
    if isinstance(source, PositionCircle) and isinstance(target, PositionCircle):
        if source.npoints != target.npoints or source.npoints % 2 == 0:
            raise FrameMismatch(f"no circle transition between {source!r} and {target!r}")
        mid = Momentum((source.npoints - 1) // 2)
        return transition_unitary(mid, target) @ transition_unitary(source, mid)
    if isinstance(source, PositionLine) and isinstance(target, PositionLine):
        if source.npoints != target.npoints or source.span != target.span:
            raise FrameMismatch(f"line grids differ: {source!r} vs {target!r}")
        grid = LineGrid(source.npoints, source.span)
        sign = 1 if source.domain == "p" else -1
        kernel = _line_kernel(grid, sign)
        return TransitionUnitary(source, target, kernel if sign > 0 else kernel.T)
    raise FrameMismatch(f"no transition between {source!r} and {target!r}")


def line_fourier(psi: FibreVector, direction: str = "p->q") -> FibreVector:
    """Discretised continuous Fourier transform on the line.

    ``p->q``: ``psi(q_j) = dp / sqrt(2 pi) * sum_k exp(i q_j p_k) psi~(p_k)``;
    ``q->p`` uses ``dq`` and the kernel ``exp(-i q p)``.
    """
    frame = psi.frame
    if not isinstance(frame, PositionLine):
        raise GridError(f"line_fourier expects a line grid, got {frame!r}")
    wanted = {"p->q": "p", "q->p": "q"}.get(direction)
    if wanted is None:
        raise ValueError(f"direction must be 'p->q' or 'q->p', got {direction!r}")
    if frame.domain != wanted:
        raise GridError(f"direction {direction} needs a {wanted}-grid input, got {frame!r}")
    grid = LineGrid(frame.npoints, frame.span)
    if direction == "p->q":
        kernel = np.exp(1j * np.outer(grid.q, grid.p))
        out = grid.dp / math.sqrt(TWO_PI) * (kernel @ psi.coeffs)
    else:
        kernel = np.exp(-1j * np.outer(grid.p, grid.q))
        out = grid.dq / math.sqrt(TWO_PI) * (kernel @ psi.coeffs)
    return FibreVector(frame.conjugate(), out)


def twist_defect(c: FibreVector, twist, ntest: int = 64) -> float:
    """Largest violation of ``psi(theta + 2 pi) = exp(i alpha) psi(theta)``.

    ``psi`` is evaluated from its shifted-mode expansion at ``theta`` and at
    ``theta + 2 pi`` independently, on ``ntest`` points of ``[0, 2 pi)``.
    """
    if not isinstance(c.frame, Momentum):
        raise FrameMismatch(f"twist_defect expects a Momentum frame, got {c.frame!r}")
    tw = _twist(twist)
    k = c.frame.labels + tw.phi
    theta = TWO_PI * np.arange(ntest) / ntest
    here = np.exp(1j * np.outer(theta, k)) @ c.coeffs
    there = np.exp(1j * np.outer(theta + TWO_PI, k)) @ c.coeffs
    return float(np.max(np.abs(there - np.exp(1j * tw.alpha) * here), initial=0.0))


class ShiftedFourierFamily:
    """The transition family ``alpha -> F_alpha`` over the twist circle.

    Maps ``Momentum(nmax)`` to ``PositionCircle(2 nmax + 1, alpha)``.  Calling
    the family at a base point ``(theta_base, L, alpha)`` returns the weighted
    unitary matrix; :meth:`derivative` gives its exact partial derivatives,
    ``d F_alpha / d alpha = diag(i theta_j / 2 pi) F_alpha``.
    """

    def __init__(self, nmax: int):
        self.source = Momentum(nmax)
        self.npoints = self.source.dim
        self.theta = TWO_PI * np.arange(self.npoints) / self.npoints

    def frame(self, alpha: float) -> PositionCircle:
        return PositionCircle(self.npoints, alpha)

    def matrix(self, alpha: float) -> np.ndarray:
        # not reduced modulo 2 pi: the family is smooth in the lift of alpha
        return shifted_fourier_matrix(self.source.nmax, self.npoints, alpha) / math.sqrt(self.npoints)

    def __call__(self, theta: float, L: float, alpha: float) -> np.ndarray:
        return self.matrix(alpha)

    def derivative(self, theta: float, L: float, alpha: float, direction: str) -> np.ndarray:
        if direction != "alpha":
            return np.zeros((self.npoints, self.npoints), dtype=complex)
        return (1j * self.theta / TWO_PI)[:, None] * self.matrix(alpha)
