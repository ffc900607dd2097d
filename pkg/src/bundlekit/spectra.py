"""Twisted-ring spectra: closed forms and a shifted-mode eigensolver."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .duality import TwistParam, _twist
from .errors import AliasError, HermiticityError, RealityError, ShapeError
from .hilbert import FibreVector, Momentum

__all__ = [
    "PhysicalParams",
    "PotentialSpec",
    "SpectrumResult",
    "angular_momentum_eigenvalues",
    "free_energies",
    "build_hamiltonian",
    "solve_eigen",
    "spectral_flow",
]


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "radius"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")

    @property
    def kinetic_scale(self) -> float:
        """Prefactor ``hbar^2 / (2 m R^2)`` of ``(n + phi)^2``."""
        return self.hbar**2 / (2.0 * self.mass * self.radius**2)


class PotentialSpec:
    """A real potential ``V(theta)``, given by samples or by Fourier coefficients.

    Samples are taken on the uniform grid ``theta_j = 2 pi j / M``.  Fourier
    coefficients follow ``V(theta) = sum_k V_k exp(i k theta)`` and must obey
    ``V_{-k} = conj(V_k)``.
    """

    def __init__(self, samples=None, coeffs: Optional[Mapping[int, complex]] = None, tol: float = 1e-12):
        if (samples is None) == (coeffs is None):
            raise ValueError("give exactly one of samples or coeffs")
        self.samples = None
        self.coeffs = None
        if samples is not None:
            s = np.asarray(samples)
            if s.ndim != 1 or s.size == 0:
                raise ShapeError("potential samples must be a non-empty 1-d sequence")
            if np.iscomplexobj(s):
                if np.max(np.abs(s.imag)) > tol * max(1.0, np.max(np.abs(s))):
                    raise RealityError("sampled potential has non-zero imaginary part")
                s = s.real
            self.samples = s.astype(float)
        else:
            cleaned = {int(k): complex(v) for k, v in coeffs.items()}
            scale = max([1.0] + [abs(v) for v in cleaned.values()])
            for k, v in cleaned.items():
                partner = cleaned.get(-k, 0.0)
                if abs(partner - v.conjugate()) > tol * scale:
                    raise RealityError(f"coefficients of k={k} and k={-k} are not conjugate")
            self.coeffs = cleaned

    @classmethod
    def cosine(cls, amplitude: float, k: int = 1) -> "PotentialSpec":
        """``V = amplitude * cos(k theta)``."""
        return cls(coeffs={k: amplitude / 2.0, -k: amplitude / 2.0})

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(coeffs={})

    @classmethod
    def from_file(cls, path) -> "PotentialSpec":
        """Read a potential file.

        Plain text holds one real sample per line; JSON holds
        ``{"coeffs": [[k, re, im], ...]}``.
        """
        with open(path) as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            data = json.loads(text)
            rows = data["coeffs"]
            return cls(coeffs={int(k): complex(re, im) for k, re, im in rows})
        values = [float(line) for line in text.split("\n") if line.strip() and not line.startswith("#")]
        return cls(samples=values)

    def fourier(self, kmax: int) -> np.ndarray:
        """Coefficients ``V_k`` for ``k = -kmax..kmax``."""
        if self.samples is not None:
            npoints = self.samples.shape[0]
            if npoints < 2 * kmax + 1:
                raise AliasError(f"{npoints} potential samples cannot resolve |k| <= {kmax}")
            ks = np.arange(-kmax, kmax + 1)
            return np.fft.fft(self.samples)[ks % npoints] / npoints
        return np.array([self.coeffs.get(k, 0.0) for k in range(-kmax, kmax + 1)], dtype=complex)

    def __call__(self, theta) -> np.ndarray:
        """Evaluate on arbitrary angles (trigonometric interpolation for samples)."""
        theta = np.asarray(theta, dtype=float)
        if self.coeffs is not None:
            items = self.coeffs.items()
        else:
            npoints = self.samples.shape[0]
            kmax = (npoints - 1) // 2
            items = zip(range(-kmax, kmax + 1), self.fourier(kmax))
        total = np.zeros(theta.shape, dtype=complex)
        for k, v in items:
            total += v * np.exp(1j * k * theta)
        return total.real


@dataclass
class SpectrumResult:
    labels: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None  # columns, in the Momentum frame

    def __len__(self):
        return len(self.eigenvalues)

    def sorted(self) -> "SpectrumResult":
        """Ascending order, ties broken by ascending label."""
        order = np.lexsort((self.labels, self.eigenvalues))
        vecs = None if self.eigenvectors is None else self.eigenvectors[:, order]
        return SpectrumResult(self.labels[order], self.eigenvalues[order], vecs)

    def state(self, i: int) -> FibreVector:
        if self.eigenvectors is None:
            raise ValueError("eigenvectors were not computed")
        nmax = (self.eigenvectors.shape[0] - 1) // 2
        return FibreVector(Momentum(nmax), self.eigenvectors[:, i])


def angular_momentum_eigenvalues(nmax: int, twist=TwistParam(), params: PhysicalParams = PhysicalParams()) -> SpectrumResult:
    labels = np.arange(-nmax, nmax + 1)
    return SpectrumResult(labels, params.hbar * (labels + _twist(twist).phi))


def free_energies(nmax: int, twist=TwistParam(), params: PhysicalParams = PhysicalParams()) -> SpectrumResult:
    labels = np.arange(-nmax, nmax + 1)
    return SpectrumResult(labels, params.kinetic_scale * (labels + _twist(twist).phi) ** 2)


def build_hamiltonian(
    nmax: int,
    twist=TwistParam(),
    params: PhysicalParams = PhysicalParams(),
    potential: Optional[PotentialSpec] = None,
) -> np.ndarray:
    """Hamiltonian in the shifted-mode basis ``exp(i (n + phi) theta)``.

    ``H[n, n'] = hbar^2 (n + phi)^2 / (2 m R^2) delta_{n n'} + V_{n - n'}``.
    Sampled potentials need at least ``4 nmax + 1`` samples.
    """
    kinetic = free_energies(nmax, twist, params).eigenvalues
    h = np.diag(kinetic).astype(complex)
    if potential is not None:
        vk = potential.fourier(2 * nmax)
        n = np.arange(-nmax, nmax + 1)
        h += vk[(n[:, None] - n[None, :]) + 2 * nmax]
    return h


def _default_labels(dim: int) -> np.ndarray:
    if dim % 2:
        return np.arange(-(dim // 2), dim // 2 + 1)
    return np.arange(dim)


def solve_eigen(h, labels: Optional[Sequence[int]] = None, tol: float = 1e-10) -> SpectrumResult:
    """Diagonalise a Hermitian matrix.

    Eigenvalues come out ascending.  Each eigenvector is labelled by its
    dominant basis component (mode ``n`` for odd-sized matrices built on
    ``-N..N``); degenerate eigenvalues are ordered by that label.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > tol:
        raise HermiticityError("matrix is not Hermitian")
    dim = h.shape[0]
    basis_labels = _default_labels(dim) if labels is None else np.asarray(labels)
    values, vectors = np.linalg.eigh(h)
    dominant = basis_labels[np.argmax(np.abs(vectors), axis=0)]
    # eigh is ascending already; re-sort only to order labels inside near-degenerate clusters
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    keys = np.round(values / (1e-12 * scale)) if dim else values
    order = np.lexsort((dominant, keys))
    return SpectrumResult(dominant[order], values[order], vectors[:, order])


def _one_spectrum(args):
    nmax, alpha, params, potential = args
    return solve_eigen(build_hamiltonian(nmax, TwistParam(alpha), params, potential))


def spectral_flow(
    nmax: int,
    alphas: Sequence[float],
    params: PhysicalParams = PhysicalParams(),
    potential: Optional[PotentialSpec] = None,
    workers: Optional[int] = None,
) -> list[SpectrumResult]:
    """Spectra along a sweep of twists, in input order."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("need at least one twist sample")
    jobs = [(nmax, a, params, potential) for a in alphas]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one_spectrum, jobs))
    return [_one_spectrum(j) for j in jobs]
