import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bundlekit import (
    AliasError,
    HermiticityError,
    Momentum,
    PhysicalParams,
    PositionCircle,
    PotentialSpec,
    RealityError,
    TwistParam,
    angular_momentum_eigenvalues,
    build_hamiltonian,
    free_energies,
    solve_eigen,
    spectral_flow,
    transition_unitary,
)
from oracles import fd_twisted_eigenvalues

TWO_PI = 2 * math.pi


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        PhysicalParams(mass=0.0)
    assert PhysicalParams(hbar=2.0, mass=0.5, radius=2.0).kinetic_scale == 1.0


class TestAngularMomentum:
    def test_periodic(self):
        res = angular_momentum_eigenvalues(1, TwistParam(0.0), PhysicalParams())
        assert list(res.eigenvalues) == [-1.0, 0.0, 1.0]
        assert list(res.labels) == [-1, 0, 1]

    def test_half_twist(self):
        res = angular_momentum_eigenvalues(2, TwistParam(math.pi))
        assert res.eigenvalues[list(res.labels).index(0)] == 0.5

    def test_full_twist_shifts_labels(self):
        a = angular_momentum_eigenvalues(40, TwistParam(0.0)).eigenvalues
        b = angular_momentum_eigenvalues(40, TwistParam(TWO_PI)).eigenvalues
        np.testing.assert_allclose(b[:-1], a[1:], atol=1e-14)

    def test_hbar_scaling(self):
        res = angular_momentum_eigenvalues(1, TwistParam(math.pi / 2), PhysicalParams(hbar=3.0))
        np.testing.assert_allclose(res.eigenvalues, 3.0 * (np.arange(-1, 2) + 0.25))


class TestFreeEnergies:
    def test_values(self):
        res = free_energies(3, TwistParam(0.0))
        assert res.eigenvalues[list(res.labels).index(2)] == 2.0
        res = free_energies(3, TwistParam(math.pi))
        assert res.eigenvalues[list(res.labels).index(0)] == 0.125

    def test_parity_at_zero_twist(self):
        e = free_energies(10, TwistParam(0.0)).eigenvalues
        np.testing.assert_array_equal(e, e[::-1])

    def test_units(self):
        p = PhysicalParams(hbar=2.0, mass=3.0, radius=0.5)
        e = free_energies(2, TwistParam(1.0), p).eigenvalues
        n = np.arange(-2, 3)
        np.testing.assert_allclose(e, 4.0 / (2 * 3.0 * 0.25) * (n + 1.0 / TWO_PI) ** 2)


class TestPotential:
    def test_cosine_coefficients(self):
        np.testing.assert_allclose(PotentialSpec.cosine(2.0).fourier(2), [0, 1, 0, 1, 0])

    def test_sampled_matches_coefficients(self):
        theta = TWO_PI * np.arange(33) / 33
        sampled = PotentialSpec(samples=0.7 * np.cos(theta) + 0.2 * np.sin(3 * theta) + 1.5)
        exact = {0: 1.5, 1: 0.35, -1: 0.35, 3: 0.1 / 1j, -3: -0.1 / 1j}
        np.testing.assert_allclose(sampled.fourier(16), PotentialSpec(coeffs=exact).fourier(16), atol=1e-14)

    def test_reality_checks(self):
        with pytest.raises(RealityError):
            PotentialSpec(coeffs={1: 1.0, -1: 2.0})
        with pytest.raises(RealityError):
            PotentialSpec(samples=[1.0, 1j, 0.0])

    def test_alias_guard(self):
        with pytest.raises(AliasError):
            build_hamiltonian(4, potential=PotentialSpec(samples=np.ones(16)))

    def test_evaluate(self):
        theta = np.linspace(0, 6, 13)
        np.testing.assert_allclose(PotentialSpec.cosine(1.0)(theta), np.cos(theta), atol=1e-15)
        grid = TWO_PI * np.arange(9) / 9
        np.testing.assert_allclose(PotentialSpec(samples=np.cos(grid))(theta), np.cos(theta), atol=1e-14)

    def test_files(self, tmp_path):
        text = tmp_path / "v.txt"
        text.write_text("\n".join(str(x) for x in np.cos(TWO_PI * np.arange(17) / 17)) + "\n")
        js = tmp_path / "v.json"
        js.write_text(json.dumps({"coeffs": [[1, 0.5, 0.0], [-1, 0.5, 0.0]]}))
        a = PotentialSpec.from_file(text).fourier(4)
        b = PotentialSpec.from_file(js).fourier(4)
        np.testing.assert_allclose(a, b, atol=1e-15)


class TestHamiltonian:
    def test_free_is_diagonal(self):
        h = build_hamiltonian(5, TwistParam(0.4))
        np.testing.assert_array_equal(h, np.diag(free_energies(5, TwistParam(0.4)).eigenvalues))

    def test_cosine_couples_neighbours(self):
        v = 0.3
        h = build_hamiltonian(4, TwistParam(1.0), potential=PotentialSpec.cosine(2 * v))
        off = h - np.diag(np.diag(h))
        expected = v * (np.eye(9, k=1) + np.eye(9, k=-1))
        np.testing.assert_allclose(off, expected, atol=1e-15)

    def test_sampled_potential_is_hermitian(self):
        rng = np.random.default_rng(3)
        h = build_hamiltonian(10, TwistParam(2.0), potential=PotentialSpec(samples=rng.standard_normal(64)))
        assert np.max(np.abs(h - h.conj().T)) <= 1e-13


class TestSolveEigen:
    def test_diagonal(self):
        res = solve_eigen(np.diag([3.0, -1.0, 2.0]))
        assert list(res.eigenvalues) == [-1.0, 2.0, 3.0]
        assert list(res.labels) == [0, 1, -1]

    def test_even_size_labels(self):
        assert list(solve_eigen(np.diag([2.0, 1.0])).labels) == [1, 0]

    def test_rejects_non_hermitian(self):
        with pytest.raises(HermiticityError):
            solve_eigen(np.array([[0, 1], [0, 0]]))

    def test_free_case_closed_form(self):
        res = solve_eigen(build_hamiltonian(16, TwistParam(0.7)))
        np.testing.assert_allclose(res.eigenvalues, np.sort(free_energies(16, TwistParam(0.7)).eigenvalues), atol=1e-10)

    def test_residual_and_orthonormality(self):
        h = build_hamiltonian(20, TwistParam(2.1), potential=PotentialSpec.cosine(3.0, 2))
        res = solve_eigen(h)
        vecs = res.eigenvectors
        assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(41))) <= 1e-10
        scale = np.linalg.norm(h, 2)
        for i, e in enumerate(res.eigenvalues):
            assert np.linalg.norm(h @ vecs[:, i] - e * vecs[:, i]) <= 1e-9 * scale
        assert res.state(0).frame == Momentum(20)

    def test_degeneracy_broken_by_label(self):
        res = solve_eigen(build_hamiltonian(6, TwistParam(math.pi)))
        assert abs(res.eigenvalues[0] - res.eigenvalues[1]) <= 1e-12
        assert list(res.labels[:4]) == [-1, 0, -2, 1]

    @pytest.mark.parametrize("alpha", [0.0, 0.7, math.pi])
    def test_cosine_against_finite_differences(self, alpha):
        spectral = solve_eigen(build_hamiltonian(32, TwistParam(alpha), potential=PotentialSpec.cosine(1.0))).eigenvalues[:10]
        fd = fd_twisted_eigenvalues(lambda t: np.cos(t), alpha)
        assert np.max(np.abs(spectral - fd)) <= 1e-5

    @settings(max_examples=15, deadline=None)
    @given(alpha=st.floats(0, TWO_PI), nmax=st.integers(1, 24), amp=st.floats(-2, 2), seed=st.integers(0, 1000))
    def test_frame_independence(self, alpha, nmax, amp, seed):
        rng = np.random.default_rng(seed)
        pot = PotentialSpec(samples=amp * rng.standard_normal(4 * nmax + 1))
        h = build_hamiltonian(nmax, TwistParam(alpha), potential=pot)
        u = transition_unitary(PositionCircle(2 * nmax + 1, alpha), Momentum(nmax)).matrix
        e1 = solve_eigen(h).eigenvalues
        e2 = solve_eigen(u.conj().T @ h @ u, tol=1e-9).eigenvalues
        assert np.max(np.abs(e1 - e2)) <= 1e-9


class TestSpectralFlow:
    def test_full_turn_interior(self):
        n = 12
        a, b = spectral_flow(n, [0.0, TWO_PI])
        # ascending spectra of the two windows share all but their top levels
        assert np.max(np.abs(a.eigenvalues[: 2 * n - 1] - b.eigenvalues[: 2 * n - 1])) <= 1e-12

    def test_singleton(self):
        assert len(spectral_flow(3, [1.0])) == 1

    def test_half_twist_degeneracy(self):
        (res,) = spectral_flow(8, [math.pi])
        assert abs(res.eigenvalues[0] - res.eigenvalues[1]) <= 1e-12
        assert sorted(res.labels[:2]) == [-1, 0]

    def test_empty(self):
        with pytest.raises(ValueError):
            spectral_flow(3, [])

    def test_parallel_order_is_input_order(self):
        alphas = list(np.linspace(0, TWO_PI, 9))
        serial = spectral_flow(6, alphas, potential=PotentialSpec.cosine(0.5))
        parallel = spectral_flow(6, alphas, potential=PotentialSpec.cosine(0.5), workers=4)
        for s, p in zip(serial, parallel):
            np.testing.assert_array_equal(s.eigenvalues, p.eigenvalues)

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(0, TWO_PI), nmax=st.integers(2, 40))
    def test_free_periodicity_in_twist(self, alpha, nmax):
        a = free_energies(nmax, TwistParam(alpha)).eigenvalues
        b = free_energies(nmax, TwistParam(alpha + TWO_PI)).eigenvalues
        # drop the extreme labels: n -> n + 1 leaves the window there
        np.testing.assert_allclose(np.sort(b[1:-1]), np.sort(a[2:]), atol=1e-12, rtol=0)
