import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bundlekit import (
    AliasError,
    FibreVector,
    FrameMismatch,
    GridError,
    LineGrid,
    Momentum,
    PositionCircle,
    PositionLine,
    TwistParam,
    analysis,
    basis_vector,
    inner_product,
    is_unitary,
    line_fourier,
    shifted_analysis,
    shifted_synthesis,
    synthesis,
    transition_unitary,
    twist_defect,
)
from oracles import naive_shifted_analysis, naive_shifted_synthesis

TWO_PI = 2 * math.pi


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def test_twist_param():
    tw = TwistParam(math.pi)
    assert tw.phi == 0.5
    assert TwistParam(TWO_PI + 1.0).normalized().alpha == pytest.approx(1.0)


class TestSynthesis:
    def test_constant_mode(self):
        psi = synthesis(basis_vector(Momentum(0), 0), 8)
        np.testing.assert_allclose(psi.coeffs, np.ones(8), atol=1e-15)
        assert psi.frame == PositionCircle(8, 0.0)

    def test_single_plane_wave(self):
        psi = synthesis(basis_vector(Momentum(1), 1), 4)
        np.testing.assert_allclose(psi.coeffs, [1, 1j, -1, -1j], atol=1e-15)

    @pytest.mark.parametrize("method", ["fft", "direct"])
    def test_matches_naive_sum(self, rng, method):
        c = FibreVector(Momentum(16), cvec(rng, 33))
        fast = synthesis(c, 64, method=method)
        np.testing.assert_allclose(fast.coeffs, naive_shifted_synthesis(c.coeffs, 16, 64), rtol=0, atol=1e-12)

    def test_alias_guard(self):
        with pytest.raises(AliasError):
            synthesis(basis_vector(Momentum(4), 0), 8)

    def test_wrong_frame(self):
        with pytest.raises(FrameMismatch):
            synthesis(basis_vector(PositionCircle(4), 0), 8)


class TestAnalysis:
    def test_constant(self):
        c = analysis(FibreVector(PositionCircle(9), np.ones(9)), 3)
        np.testing.assert_allclose(c.coeffs, basis_vector(Momentum(3), 0).coeffs, atol=1e-15)

    def test_mode_two(self):
        theta = PositionCircle(16).theta
        c = analysis(FibreVector(PositionCircle(16), np.exp(2j * theta)), 3)
        np.testing.assert_allclose(c.coeffs, basis_vector(Momentum(3), 2).coeffs, atol=1e-15)

    def test_round_trip(self, rng):
        c = FibreVector(Momentum(16), cvec(rng, 33))
        np.testing.assert_allclose(analysis(synthesis(c, 64), 16).coeffs, c.coeffs, atol=1e-12)

    @pytest.mark.parametrize("method", ["fft", "direct"])
    def test_matches_naive_sum(self, rng, method):
        psi = FibreVector(PositionCircle(40, 2.2), cvec(rng, 40))
        c = shifted_analysis(psi, 12, method=method)
        np.testing.assert_allclose(c.coeffs, naive_shifted_analysis(psi.coeffs, 12, 2.2), atol=1e-12)

    def test_alias_guard(self):
        with pytest.raises(AliasError):
            analysis(FibreVector(PositionCircle(8), np.ones(8)), 4)


class TestShifted:
    def test_untwisted_limit(self, rng):
        c = FibreVector(Momentum(5), cvec(rng, 11))
        np.testing.assert_array_equal(shifted_synthesis(c, 0.0, 11).coeffs, synthesis(c, 11).coeffs)

    def test_half_twist_at_pi(self):
        # theta = pi is grid point 2 of 4; exp(i (0 + 1/2) pi) = i
        psi = shifted_synthesis(basis_vector(Momentum(0), 0), math.pi, 4)
        assert abs(psi.coeffs[2] - 1j) <= 1e-15
        assert psi.frame.alpha == math.pi

    @pytest.mark.parametrize("method", ["fft", "direct"])
    def test_matches_naive_sum(self, rng, method):
        c = FibreVector(Momentum(20), cvec(rng, 41))
        psi = shifted_synthesis(c, 1.3, 64, method=method)
        np.testing.assert_allclose(psi.coeffs, naive_shifted_synthesis(c.coeffs, 20, 64, 1.3), atol=1e-12)

    def test_shifted_mode_analyses_to_delta(self):
        frame = PositionCircle(12, 0.8)
        phi = 0.8 / TWO_PI
        psi = FibreVector(frame, np.exp(1j * (1 + phi) * frame.theta))
        np.testing.assert_allclose(shifted_analysis(psi, 5).coeffs, basis_vector(Momentum(5), 1).coeffs, atol=1e-15)

    def test_untwisted_analysis(self, rng):
        psi = FibreVector(PositionCircle(21), cvec(rng, 21))
        np.testing.assert_array_equal(shifted_analysis(psi, 10).coeffs, analysis(psi, 10).coeffs)

    def test_factorisation(self, rng):
        c = FibreVector(Momentum(30), cvec(rng, 61))
        alpha = 2.5
        theta = PositionCircle(90).theta
        expected = np.exp(1j * alpha / TWO_PI * theta) * synthesis(c, 90).coeffs
        np.testing.assert_allclose(shifted_synthesis(c, alpha, 90).coeffs, expected, atol=1e-13)

    def test_unreduced_twist_via_explicit_lift(self, rng):
        c = FibreVector(Momentum(6), cvec(rng, 13))
        lifted = TWO_PI + 0.5
        psi = shifted_synthesis(c, lifted, 13)
        assert psi.frame.alpha == pytest.approx(0.5)
        np.testing.assert_allclose(shifted_analysis(psi, 6, twist=lifted).coeffs, c.coeffs, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(
        nmax=st.integers(0, 128),
        extra=st.integers(0, 256),
        alpha=st.floats(0, TWO_PI, exclude_max=True),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_parseval_and_round_trip(self, nmax, extra, alpha, seed):
        r = np.random.default_rng(seed)
        npoints = min(2 * nmax + 1 + extra, max(4 * nmax, 2 * nmax + 1))
        c, d = (FibreVector(Momentum(nmax), cvec(r, 2 * nmax + 1)) for _ in range(2))
        fc, fd = shifted_synthesis(c, alpha, npoints), shifted_synthesis(d, alpha, npoints)
        assert abs(inner_product(fc, fd) - inner_product(c, d)) <= 1e-11
        assert np.max(np.abs(shifted_analysis(fc, nmax).coeffs - c.coeffs)) <= 1e-12


class TestTransitionUnitary:
    def test_momentum_identity(self):
        u = transition_unitary(Momentum(3), Momentum(3))
        np.testing.assert_array_equal(u.matrix, np.eye(7))

    def test_square_circle_transition_is_unitary(self):
        u = transition_unitary(Momentum(8), PositionCircle(17, 0.0)).matrix
        assert np.max(np.abs(u.conj().T @ u - np.eye(17))) <= 1e-10

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 4.0])
    def test_round_trip_through_momentum(self, alpha):
        pos = PositionCircle(17, alpha)
        loop = transition_unitary(Momentum(8), pos) @ transition_unitary(pos, Momentum(8))
        assert np.max(np.abs(loop.matrix - np.eye(17))) <= 1e-10

    def test_twist_to_twist(self, rng):
        a, b = PositionCircle(11, 0.3), PositionCircle(11, 2.0)
        c = FibreVector(Momentum(5), cvec(rng, 11))
        moved = transition_unitary(a, b).apply(shifted_synthesis(c, 0.3, 11))
        np.testing.assert_allclose(moved.coeffs, shifted_synthesis(c, 2.0, 11).coeffs, atol=1e-12)

    def test_line_pair(self):
        grid = LineGrid(64, 5.0)
        u = transition_unitary(grid.p_frame, grid.q_frame)
        assert is_unitary(u.matrix)
        loop = u.inverse() @ u
        assert np.max(np.abs(loop.matrix - np.eye(64))) <= 1e-10

    @pytest.mark.parametrize(
        "source, target",
        [
            (Momentum(8), PositionCircle(20)),
            (Momentum(2), Momentum(3)),
            (PositionCircle(10, 0.0), PositionCircle(10, 1.0)),
            (PositionLine(8, 1.0), PositionLine(8, 2.0, "p")),
            (Momentum(2), PositionLine(5, 1.0)),
        ],
    )
    def test_incompatible(self, source, target):
        with pytest.raises(FrameMismatch):
            transition_unitary(source, target)


class TestLineFourier:
    grid = LineGrid(256, 12.0)

    def test_gaussian_fixed_point(self):
        # (1/sqrt(2 pi)) int exp(i q p) exp(-p^2/2) dp = exp(-q^2/2)
        out = line_fourier(FibreVector(self.grid.p_frame, np.exp(-self.grid.p**2 / 2)), "p->q")
        assert out.frame == self.grid.q_frame
        assert np.max(np.abs(out.coeffs - np.exp(-self.grid.q**2 / 2))) <= 1e-8

    def test_shifted_gaussian_phase(self):
        # exp(-(p - k)^2 / 2) -> exp(i k q) exp(-q^2 / 2)
        k = 1.5
        out = line_fourier(FibreVector(self.grid.p_frame, np.exp(-(self.grid.p - k) ** 2 / 2)), "p->q")
        expected = np.exp(1j * k * self.grid.q - self.grid.q**2 / 2)
        assert np.max(np.abs(out.coeffs - expected)) <= 1e-8

    def test_round_trip(self, rng):
        psi = FibreVector(self.grid.p_frame, cvec(rng, 256))
        back = line_fourier(line_fourier(psi, "p->q"), "q->p")
        assert np.max(np.abs(back.coeffs - psi.coeffs)) <= 1e-10

    def test_parseval(self, rng):
        psi = FibreVector(self.grid.p_frame, cvec(rng, 256))
        out = line_fourier(psi, "p->q")
        assert abs(inner_product(out, out) - inner_product(psi, psi)) <= 1e-8 * inner_product(psi, psi).real

    def test_zero(self):
        out = line_fourier(FibreVector(self.grid.q_frame, np.zeros(256)), "q->p")
        assert not np.any(out.coeffs)

    def test_matches_transition_apply(self, rng):
        psi = FibreVector(self.grid.q_frame, cvec(rng, 256))
        u = transition_unitary(self.grid.q_frame, self.grid.p_frame)
        np.testing.assert_allclose(u.apply(psi).coeffs, line_fourier(psi, "q->p").coeffs, atol=1e-11)

    def test_grid_mismatch(self):
        with pytest.raises(GridError):
            line_fourier(FibreVector(self.grid.q_frame, np.zeros(256)), "p->q")
        with pytest.raises(GridError):
            line_fourier(basis_vector(Momentum(1), 0))


class TestTwistDefect:
    def test_periodic(self, rng):
        assert twist_defect(FibreVector(Momentum(4), cvec(rng, 9)), 0.0) <= 1e-13

    def test_single_mode(self):
        assert twist_defect(basis_vector(Momentum(0), 0), math.pi / 3) <= 1e-13

    def test_random(self, rng):
        for _ in range(20):
            assert twist_defect(FibreVector(Momentum(8), cvec(rng, 17)), rng.uniform(0, TWO_PI)) <= 1e-12
