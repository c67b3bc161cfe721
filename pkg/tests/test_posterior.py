"""Fourier-series phase posterior: updates, estimators, interval masses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from gkpsim.errors import DegeneratePosteriorError, DomainError
from gkpsim.posterior import PhasePosterior, circular_distance, flat_prior, wrap_angle

TWO_PI = 2 * math.pi


def chain(rounds):
    post = flat_prior()
    for x, phi, *m in rounds:
        post = post.update(x, phi, m[0] if m else 1)
    return post


def density_oracle(rounds):
    """Likelihood product evaluated directly, for quadrature cross-checks."""

    def f(theta):
        val = 1.0
        for x, phi, *m in rounds:
            mult = m[0] if m else 1
            val *= 0.5 * (1.0 + (-1) ** x * math.cos(mult * theta + phi))
        return val

    return f


class TestFlatPrior:
    def test_total_mass(self):
        assert flat_prior().interval_mass(0.0, math.pi) == pytest.approx(1.0, abs=1e-15)
        assert flat_prior().c0 == 1.0

    def test_sharpness_zero(self):
        assert flat_prior().sharpness() == 0.0
        assert flat_prior().holevo_variance() == math.inf

    def test_estimate_undefined(self):
        with pytest.raises(DegeneratePosteriorError):
            flat_prior().estimate_theta()


class TestUpdate:
    def test_single_round_coefficients(self):
        post = flat_prior().update(0, 0.0, 1)
        assert post.c0 == pytest.approx(0.5, abs=1e-15)
        assert post.coefficient(1) == pytest.approx(0.25)
        assert post.coefficient(-1) == pytest.approx(0.25)
        assert post.K == 1

    def test_sharpness_against_quadrature(self):
        post = flat_prior().update(0, 0.0, 1)
        f = density_oracle([(0, 0.0)])
        num = quad(lambda t: math.cos(t) * f(t), -math.pi, math.pi)[0]
        den = quad(f, -math.pi, math.pi)[0]
        assert post.sharpness() == pytest.approx(abs(num / den), abs=1e-12)
        assert post.sharpness() == pytest.approx(0.5, abs=1e-14)
        assert post.holevo_variance() == pytest.approx(3.0, abs=1e-12)

    def test_outcome_one_zeroes_origin(self):
        post = flat_prior().update(1, 0.0, 1)
        assert abs(post.density(0.0)[0]) < 1e-14

    def test_multiplier_grows_bandwidth(self):
        post = flat_prior().update(0, 0.3, 4)
        assert post.K == 4
        f = density_oracle([(0, 0.3, 4)])
        for t in (-2.0, 0.1, 1.7):
            assert post.density(t)[0] * TWO_PI * post.c0 == pytest.approx(f(t), abs=1e-12)

    def test_bad_multiplier(self):
        with pytest.raises(DomainError):
            flat_prior().update(0, 0.0, 0)


class TestOutcomeProbability:
    def test_flat(self):
        assert flat_prior().outcome_probability(1.234, 1) == (0.5, 0.5)

    def test_exact_complement(self):
        post = chain([(0, 0.0), (1, 1.1), (0, 2.3)])
        p0, p1 = post.outcome_probability(0.7, 1)
        assert p0 + p1 == 1.0

    def test_query_opposite_phase(self):
        post = flat_prior().update(0, 0.0, 1)
        p0, p1 = post.outcome_probability(math.pi, 1)
        assert p0 == pytest.approx(0.25, abs=1e-14)
        assert p1 == pytest.approx(0.75, abs=1e-14)

    def test_sharp_posterior_predicts_certainty(self):
        post = chain([(0, 0.0)] * 40)
        p0, _ = post.outcome_probability(0.0, 1)
        assert p0 > 0.98

    def test_mass_conservation(self):
        post = chain([(0, 0.5), (1, 0.1)])
        for x in (0, 1):
            p = post.outcome_probability(0.9, 1)[x]
            updated = post.update(x, 0.9, 1)
            assert updated.c0 == pytest.approx(post.c0 * p, abs=1e-13)


class TestEstimate:
    def test_two_round_estimate(self):
        post = chain([(0, 0.0), (0, math.pi / 2)])
        assert post.estimate_theta() == pytest.approx(-math.pi / 4, abs=1e-14)

    def test_symmetric_estimates(self):
        assert chain([(0, 0.0)]).estimate_theta() == pytest.approx(0.0, abs=1e-15)
        assert chain([(1, 0.0)]).estimate_theta() == pytest.approx(math.pi, abs=1e-12)

    def test_point_mass_limit(self):
        shallow = chain([(0, 0.0), (0, math.pi / 2)] * 30)
        post = chain([(0, 0.0), (0, math.pi / 2)] * 120)
        assert shallow.sharpness() < post.sharpness()
        assert post.sharpness() > 0.99
        assert post.holevo_variance() < 0.02


class TestIntervalMass:
    def test_flat_fraction(self):
        assert flat_prior().interval_mass(0.4, math.pi / 3) == pytest.approx(1 / 3, abs=1e-14)

    def test_full_circle(self):
        post = chain([(0, 0.2), (1, 1.0)])
        assert post.interval_mass(1.0, math.pi) == pytest.approx(1.0, abs=1e-13)

    def test_hand_integral(self):
        post = flat_prior().update(0, 0.0, 1)
        expected = (2 * math.pi / 3 + math.sqrt(3)) / (2 * math.pi)
        assert post.interval_mass(0.0, math.pi / 3) == pytest.approx(expected, abs=1e-14)

    def test_wrap_equals_quadrature(self):
        rounds = [(0, 0.3), (1, 2.0), (0, 5.5)]
        post = chain(rounds)
        f = density_oracle(rounds)
        total = quad(f, -math.pi, math.pi)[0]
        center, half = 3.0, 1.2  # interval wraps past +pi
        a, b = center - half, center + half
        num = quad(f, a, math.pi)[0] + quad(f, -math.pi, b - TWO_PI)[0]
        assert post.interval_mass(center, half) == pytest.approx(num / total, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            flat_prior().interval_mass(0.0, 0.0)
        with pytest.raises(DomainError):
            flat_prior().interval_mass(0.0, 4.0)


class TestErrorRate:
    def test_flat(self):
        assert flat_prior().error_rate(1.0) == pytest.approx(2 / 3, abs=1e-14)

    def test_sharp(self):
        post = chain([(0, 0.0), (0, math.pi / 2)] * 25)
        assert post.error_rate(post.estimate_theta()) < 1e-6

    def test_one_round(self):
        post = flat_prior().update(0, 0.0, 1)
        assert post.error_rate(0.0) == pytest.approx(
            1 - (2 * math.pi / 3 + math.sqrt(3)) / (2 * math.pi), abs=1e-14)


@st.composite
def round_sequences(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    return [
        (draw(st.integers(0, 1)), draw(st.floats(0, TWO_PI - 1e-9)),
         draw(st.integers(1, 3)))
        for _ in range(n)
    ]


class TestInvariants:
    @given(round_sequences())
    @settings(max_examples=60, deadline=None)
    def test_hermitian_and_nonnegative(self, rounds):
        post = chain(rounds)
        assert post.validate(grid_points=512)

    @given(round_sequences())
    @settings(max_examples=60, deadline=None)
    def test_mass_factorizes(self, rounds):
        post = flat_prior()
        mass = 1.0
        for x, phi, m in rounds:
            p = post.outcome_probability(phi, m)[x]
            post = post.update(x, phi, m)
            mass *= p
        assert post.c0 == pytest.approx(mass, abs=1e-13)

    def test_update_order_invariance(self):
        seq = [(0, 0.7), (1, 0.7), (0, 0.7), (1, 0.7)]
        a = chain(seq)
        b = chain(list(reversed(seq)))
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-13

    def test_bandwidth_counts_rounds(self):
        post = chain([(0, 0.1)] * 7)
        assert post.K == 7

    def test_csv_dump(self, tmp_path):
        post = chain([(0, 0.0), (1, 2.0)])
        path = tmp_path / "post.csv"
        post.dump_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        header_i = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
        assert lines[header_i] == "k,re,im"
        assert len(lines) - header_i - 1 == 2 * post.K + 1


class TestAngles:
    @given(st.floats(min_value=-50, max_value=50))
    def test_wrap_range(self, t):
        w = wrap_angle(t)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(t), abs_tol=1e-9)

    def test_distance(self):
        assert circular_distance(3.0, -3.0) == pytest.approx(TWO_PI - 6.0, abs=1e-12)
