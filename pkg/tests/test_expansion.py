"""Shift expansions of sqrt(delta) a and the truncated-Fock oracle."""

import math
from fractions import Fraction

import numpy as np
import pytest

from gkpsim.errors import DomainError, ResourceError
from gkpsim.expansion import (
    CORRECTABLE_QUADRATURE_CUTOFF,
    DisplacementExpansion,
    annihilation_matrix,
    arcsin_series,
    displacement_matrix,
    expand_annihilation,
    expansion_matrix,
    fock_residual_norm,
    sin_power_displacement_coeffs,
    split_correctable,
    uncorrectable_exponent,
)


def coherent_vector(alpha, dim):
    """Fock amplitudes of |alpha>, stable for any dimension."""
    from scipy.special import gammaln

    n = np.arange(dim)
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - gammaln(n + 1) / 2)
    phase = np.exp(1j * n * np.angle(alpha))
    return mag * phase


def arcsin_series_oracle(order):
    """Independent route: binomial series of (1 - x^2)^{-1/2}, integrated."""
    out = []
    binom = Fraction(1)  # C(2n, n) / 4^n accumulated by recurrence
    for n in range((order + 1) // 2):
        out.append(binom / (2 * n + 1))
        binom = binom * (2 * n + 1) / (2 * n + 2)
    return out


class TestArcsinSeries:
    def test_order_one(self):
        assert arcsin_series(1) == [Fraction(1)]

    def test_printed_values(self):
        assert arcsin_series(7) == [
            Fraction(1), Fraction(1, 6), Fraction(3, 40), Fraction(5, 112)]

    def test_order_nine_against_recurrence(self):
        series = arcsin_series(9)
        assert series == arcsin_series_oracle(9)
        assert series[4] == Fraction(35, 1152)

    @pytest.mark.parametrize("bad", [0, 2, 17, -3])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            arcsin_series(bad)


class TestSinPowerCoeffs:
    def test_sin_cubed(self):
        # sin^3 x = (3 sin x - sin 3x)/4: coefficients 3/(8i) at m = 1,
        # -1/(8i) at m = 3 (with conjugate-flip at negative m)
        coeffs = sin_power_displacement_coeffs(3)
        assert coeffs[1] == (Fraction(0), Fraction(-3, 8))
        assert coeffs[3] == (Fraction(0), Fraction(1, 8))
        assert coeffs[-1] == (Fraction(0), Fraction(3, 8))
        assert coeffs[-3] == (Fraction(0), Fraction(-1, 8))

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 7])
    def test_exact_on_sample_points(self, k):
        coeffs = sin_power_displacement_coeffs(k)
        for u in (0.3, 1.1, -2.2):
            total = sum(
                (float(re) + 1j * float(im)) * np.exp(1j * m * u)
                for m, (re, im) in coeffs.items())
            assert total == pytest.approx(math.sin(u) ** k, abs=1e-14)

    def test_binomial_sum_exact(self):
        # sum_m c_m i^m = sin^k(pi/2) = 1 exactly, in rational arithmetic
        for k in (1, 3, 5, 7):
            re_total, im_total = Fraction(0), Fraction(0)
            for m, (rr, im) in sin_power_displacement_coeffs(k).items():
                # (rr + i im) * i^m, with i^m cycling 1, i, -1, -i
                cyc = m % 4
                if cyc == 0:
                    re_total += rr
                    im_total += im
                elif cyc == 1:
                    re_total += -im
                    im_total += rr
                elif cyc == 2:
                    re_total += -rr
                    im_total += -im
                else:
                    re_total += im
                    im_total += -rr
            assert (re_total, im_total) == (Fraction(1), Fraction(0))


class TestExpandAnnihilation:
    def test_term_lattice(self):
        exp = expand_annihilation(0.01, 5)
        step = math.sqrt(0.01) / 2
        for t in exp.terms:
            assert t.step_index % 2 == 1 or t.step_index % 2 == -1
            if t.axis == "p":
                assert t.amplitude == pytest.approx(-t.step_index * step, rel=1e-15)
            else:
                assert t.amplitude == pytest.approx(1j * t.step_index * step, rel=1e-15)
        assert exp.metadata["base_step_quadrature"] == pytest.approx(
            math.sqrt(0.005), rel=1e-15)

    def test_l1_norm_grows_with_order(self):
        norms = [expand_annihilation(0.01, k).l1_norm for k in (1, 3, 5, 7)]
        assert all(a < b for a, b in zip(norms, norms[1:]))

    def test_coherent_state_identity_order1(self):
        # sqrt(delta) a |alpha> = sqrt(delta) alpha |alpha>; the order-1
        # expansion reproduces it to O((delta n)^{3/2})
        delta, alpha = 1e-3, 0.8
        dim = 40
        coh = coherent_vector(alpha, dim)
        exp = expand_annihilation(delta, 1)
        applied = expansion_matrix(exp, dim) @ coh
        target = math.sqrt(delta) * alpha * coh
        err = np.linalg.norm(applied - target)
        scale = (delta * (abs(alpha) ** 2 + 1)) ** 1.5
        assert err < 5 * scale

    def test_error_scaling_with_delta(self):
        alpha, dim = 0.6, 40
        coh = coherent_vector(alpha, dim)

        def err(delta):
            exp = expand_annihilation(delta, 1)
            applied = expansion_matrix(exp, dim) @ coh
            return np.linalg.norm(applied - math.sqrt(delta) * alpha * coh)

        # order-1 residual is O(delta^{3/2}): quartering delta gives ~1/8
        ratio = err(4e-3) / err(1e-3)
        assert ratio == pytest.approx(8.0, rel=0.2)

    def test_order7_bound(self):
        delta, dim = 0.01, 60
        exp = expand_annihilation(delta, 7)
        for alpha in (0.3, 1.0, 0.5 + 0.5j):
            coh = coherent_vector(alpha, dim)
            applied = expansion_matrix(exp, dim) @ coh
            err = np.linalg.norm(applied - math.sqrt(delta) * alpha * coh)
            assert err <= 5 * (delta * (abs(alpha) ** 2 + 1)) ** 4.5


class TestSplitCorrectable:
    def test_threshold_arithmetic(self):
        # step = sqrt(pi/2)/10: indices up to 9 stay correctable
        delta = math.pi / 100
        good, bad = split_correctable(expand_annihilation(delta, 15))
        assert {abs(t.step_index) for t in good.terms} == {1, 3, 5, 7, 9}
        assert {abs(t.step_index) for t in bad.terms} == {11, 13, 15}
        assert good.metadata["cutoff_quadrature"] == pytest.approx(
            CORRECTABLE_QUADRATURE_CUTOFF)
        assert good.metadata["cutoff_amplitude"] == pytest.approx(math.sqrt(math.pi) / 2)

    def test_small_delta_fully_correctable(self):
        good, bad = split_correctable(expand_annihilation(1e-4, 1))
        assert len(bad.terms) == 0
        assert len(good.terms) == len(expand_annihilation(1e-4, 1).terms)


class TestDisplacementMatrix:
    def test_vacuum_element(self):
        alpha = 0.7 - 0.2j
        D = displacement_matrix(alpha, 25)
        assert D[0, 0] == pytest.approx(math.exp(-abs(alpha) ** 2 / 2), rel=1e-12)
        assert D[1, 0] == pytest.approx(alpha * math.exp(-abs(alpha) ** 2 / 2), rel=1e-12)

    def test_unitary_on_inner_block(self):
        D = displacement_matrix(0.4 + 0.3j, 60)
        prod = D.conj().T @ D
        inner = prod[:20, :20]
        assert np.max(np.abs(inner - np.eye(20))) < 1e-10

    def test_composition(self):
        a, b = 0.3, 0.2j
        dim = 60
        lhs = displacement_matrix(a, dim) @ displacement_matrix(b, dim)
        phase = np.exp(1j * np.imag(a * np.conj(b)))
        rhs = phase * displacement_matrix(a + b, dim)
        assert np.max(np.abs(lhs[:20, :20] - rhs[:20, :20])) < 1e-10


class TestFockResidual:
    def test_zero_expansion(self):
        empty = DisplacementExpansion(terms=(), target="sqrt_delta_a",
                                      delta=0.01, order=1)
        n_max = 10
        assert fock_residual_norm(empty, n_max) == pytest.approx(
            math.sqrt(0.01 * n_max), rel=1e-10)

    def test_monotone_in_order(self):
        delta, n_max = 1e-3, 10
        resids = [fock_residual_norm(expand_annihilation(delta, k), n_max)
                  for k in (1, 3, 5, 7)]
        assert all(a > b for a, b in zip(resids, resids[1:]))

    def test_vanishes_with_delta(self):
        n_max = 8
        resids = [fock_residual_norm(expand_annihilation(d, 3), n_max)
                  for d in (1e-2, 1e-3, 1e-4)]
        assert resids[0] > resids[1] > resids[2]
        assert resids[2] < 1e-7

    def test_nmax_bound(self):
        with pytest.raises(ResourceError):
            fock_residual_norm(expand_annihilation(1e-3, 1), 300)


class TestUncorrectableExponent:
    def test_worked_example(self):
        k, expo = uncorrectable_exponent(0.1, 100)
        assert k == pytest.approx(28.0, abs=0.1)
        assert expo == pytest.approx(15.0, abs=0.1)

    def test_beats_two_photon_scaling(self):
        # once k > 2 the exponent 1 + k/2 exceeds the bare P^2 behavior
        k, expo = uncorrectable_exponent(0.5, 20)
        assert k > 2
        assert expo > 2

    def test_monotonic(self):
        k1, _ = uncorrectable_exponent(0.1, 50)
        k2, _ = uncorrectable_exponent(0.1, 100)
        k3, _ = uncorrectable_exponent(0.2, 100)
        assert k2 > k1
        assert k3 < k2

    def test_domain(self):
        with pytest.raises(DomainError):
            uncorrectable_exponent(0.0, 10)
        with pytest.raises(DomainError):
            uncorrectable_exponent(1.0, 10)


class TestAnnihilationMatrix:
    def test_ladder(self):
        a = annihilation_matrix(5)
        vec = np.zeros(5, dtype=complex)
        vec[3] = 1.0
        out = a @ vec
        assert out[2] == pytest.approx(math.sqrt(3))
