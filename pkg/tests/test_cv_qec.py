"""Symplectic propagation, Bloch-Messiah, Steane rounds, phase frames."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from gkpsim.errors import DomainError
from gkpsim import cv_qec as qec
from gkpsim.cv_qec import (
    PhaseFrame,
    ShiftVector,
    SymplecticMap,
    bloch_messiah,
    cnot_symplectic,
    frame_update,
    frame_update_symplectic,
    gate_symplectic,
    mod_star,
    propagate_shifts,
    run_qec_simulation,
    steane_round,
    symplectic_form,
)

SQRT_PI = math.sqrt(math.pi)


def random_symplectic(n_modes, seed, scale=0.6):
    """exp(J S) with S symmetric is symplectic."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2 * n_modes, 2 * n_modes), scale=scale)
    return SymplecticMap(expm(symplectic_form(n_modes) @ (A + A.T) / 2))


class TestCnot:
    def test_symplectic_exact(self):
        S = cnot_symplectic().matrix
        J = symplectic_form(2)
        assert np.array_equal(S.T @ J @ S, J)

    def test_determinant(self):
        assert np.linalg.det(cnot_symplectic().matrix) == pytest.approx(1.0, abs=1e-14)

    def test_column_readoff(self):
        out = propagate_shifts(cnot_symplectic(), ShiftVector.of((1.0, 0.0), (0.0, 0.0)))
        assert np.allclose(out.values, [1.0, 0.0, 1.0, 0.0])

    def test_target_q_shift_unaffected(self):
        out = propagate_shifts(cnot_symplectic(), ShiftVector.of((0.0, 0.0), (0.5, 0.0)))
        assert np.allclose(out.values, [0.0, 0.0, 0.5, 0.0])

    def test_p_backaction(self):
        out = propagate_shifts(cnot_symplectic(), ShiftVector.of((0.0, 0.0), (0.0, 0.7)))
        assert np.allclose(out.values, [0.0, -0.7, 0.0, 0.7])

    def test_non_symplectic_rejected(self):
        with pytest.raises(DomainError):
            SymplecticMap(np.diag([2.0, 2.0]))


class TestBlochMessiah:
    def test_identity(self):
        res = bloch_messiah(SymplecticMap(np.eye(4)))
        assert np.allclose(res.r, 0.0, atol=1e-12)
        assert np.allclose(res.reassembled(), np.eye(4), atol=1e-12)

    def test_single_mode_squeezer(self):
        r = 0.8
        S = SymplecticMap(np.diag([math.exp(r), math.exp(-r)]))
        res = bloch_messiah(S)
        assert res.r[0] == pytest.approx(r, abs=1e-12)
        # passive factors are trivial up to signs
        assert np.allclose(np.abs(res.passive_left.matrix), np.eye(2), atol=1e-12)
        assert np.allclose(res.reassembled(), S.matrix, atol=1e-12)

    def test_cnot_golden_ratio(self):
        S = cnot_symplectic()
        res = bloch_messiah(S)
        golden = (1 + math.sqrt(5)) / 2
        singular = np.linalg.svd(S.matrix, compute_uv=False)
        assert np.allclose(sorted(singular), [1 / golden, 1 / golden, golden, golden],
                           atol=1e-12)
        assert np.allclose(np.exp(res.r), [golden, golden], atol=1e-10)
        # 2 sinh(r) = golden - 1/golden = 1 for the golden ratio
        assert 2 * math.sinh(res.r[0]) == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(res.reassembled() - S.matrix)) < 1e-10

    @pytest.mark.parametrize("seed", [0, 1, 2, 5])
    @pytest.mark.parametrize("n_modes", [1, 2, 3])
    def test_random_symplectics(self, seed, n_modes):
        S = random_symplectic(n_modes, seed)
        res = bloch_messiah(S)
        assert np.max(np.abs(res.reassembled() - S.matrix)) < 1e-10
        J = symplectic_form(n_modes)
        for O in (res.passive_left.matrix, res.passive_right.matrix):
            assert np.max(np.abs(O.T @ O - np.eye(2 * n_modes))) < 1e-10
            assert np.max(np.abs(O.T @ J @ O - J)) < 1e-10
        # squeeze block is diagonal with reciprocal per-mode pairs
        d = np.diag(res.squeeze)
        assert np.allclose(res.squeeze, np.diag(d), atol=1e-12)
        assert np.allclose(d[0::2] * d[1::2], 1.0, atol=1e-10)

    def test_db_reporting(self):
        res = bloch_messiah(cnot_symplectic())
        from gkpsim.metrics import squeeze_db

        expected = squeeze_db(math.exp(-res.r[0]))
        assert np.allclose(res.db, expected, atol=1e-12)


class TestModStar:
    def test_values(self):
        assert mod_star(0.0) == 0.0
        assert mod_star(SQRT_PI / 2) == pytest.approx(SQRT_PI / 2)
        assert mod_star(0.6 * SQRT_PI) == pytest.approx(-0.4 * SQRT_PI)

    @given(st.floats(min_value=-20, max_value=20))
    def test_range_and_congruence(self, x):
        m = float(mod_star(x))
        assert -SQRT_PI / 2 < m <= SQRT_PI / 2 + 1e-12
        k = (x - m) / SQRT_PI
        assert abs(k - round(k)) < 1e-9


class TestSteaneRound:
    def test_small_shift_corrected(self):
        out = steane_round(0.1, 0.0)
        assert out.measured == pytest.approx(0.1)
        assert out.residual == pytest.approx(0.0, abs=1e-15)

    def test_residual_is_minus_ancilla(self):
        out = steane_round(0.2, -0.1)
        assert out.measured == pytest.approx(0.1)
        assert out.residual == pytest.approx(0.1)

    def test_logical_class_flip(self):
        u = SQRT_PI / 2 + 0.01
        out = steane_round(u, 0.0)
        # the correction pushes the state a full X-lattice step away:
        # back on the lattice, but in the flipped logical class
        assert out.residual == pytest.approx(SQRT_PI, abs=1e-12)
        assert abs(mod_star(out.residual)) < 1e-12

    def test_residual_identity_on_grid(self):
        grid = np.linspace(-0.85, 0.85, 100)
        for u in grid:
            for ua in grid:
                if abs(u + ua) < SQRT_PI / 2:
                    assert steane_round(u, ua).residual == pytest.approx(-ua, abs=1e-12)


class TestQecSimulation:
    def test_below_threshold_clean(self):
        for seed in (0, 1, 17):
            res = run_qec_simulation(20000, 0.99 * SQRT_PI / 6, seed)
            assert res.logical_errors == 0
            assert np.max(np.abs(res.residual_u)) <= 0.99 * SQRT_PI / 6 + 1e-12

    def test_zero_bound(self):
        res = run_qec_simulation(1000, 0.0, 3)
        assert res.logical_errors == 0
        assert np.all(res.measured_q == 0.0)

    def test_above_threshold_fails(self):
        res = run_qec_simulation(5000, SQRT_PI / 2, 3)
        assert res.logical_errors > 0

    def test_determinism(self):
        a = run_qec_simulation(2000, 0.2, 42)
        b = run_qec_simulation(2000, 0.2, 42)
        assert np.array_equal(a.measured_q, b.measured_q)
        assert a.logical_errors == b.logical_errors


class TestPhaseFrames:
    def test_identity_gate(self):
        f = PhaseFrame(0.4, -0.9)
        (out,) = frame_update(f, "I", (0,))
        assert out.theta_p == pytest.approx(0.4)
        assert out.theta_q == pytest.approx(-0.9)

    def test_hadamard_swaps(self):
        (out,) = frame_update(PhaseFrame(0.3, 0.5), "H", (0,))
        # q -> p, p -> -q exchanges the stabilizer labels with one sign
        assert out.theta_p == pytest.approx(0.5)
        assert out.theta_q == pytest.approx(-0.3)
        (ident,) = frame_update(PhaseFrame(0.0, 0.0), "H", (0,))
        assert (ident.theta_p, ident.theta_q) == (0.0, 0.0)

    def test_cnot_label_flow(self):
        ctrl = PhaseFrame(0.3, 0.5)
        targ = PhaseFrame(-0.2, 0.7)
        new_c, new_t = frame_update([ctrl, targ], "CNOT", (0, 1))
        # conjugating the frame displacement through q_t -> q_c + q_t,
        # p_c -> p_c - p_t: the target theta_q gains the control theta_q,
        # the control theta_p gains (with the conjugation sign) theta_p
        assert new_t.theta_q == pytest.approx(0.7 + 0.5)
        assert new_c.theta_q == pytest.approx(0.5)
        assert new_t.theta_p == pytest.approx(-0.2)
        assert new_c.theta_p == pytest.approx(0.3 - (-0.2))

    def test_composition(self):
        frames = [PhaseFrame(0.2, -0.4), PhaseFrame(1.0, 0.3)]
        g1 = gate_symplectic("CNOT", (0, 1), 2)
        g2 = gate_symplectic("H", (1,), 2)
        step = frame_update_symplectic(frame_update_symplectic(frames, g1), g2)
        combined = frame_update_symplectic(frames, g2.compose(g1))
        for a, b in zip(step, combined):
            assert a.theta_p == pytest.approx(b.theta_p, abs=1e-12)
            assert a.theta_q == pytest.approx(b.theta_q, abs=1e-12)

    def test_s_gate(self):
        (out,) = frame_update(PhaseFrame(0.0, 0.6), "S", (0,))
        # q unchanged, p -> p - q: theta_p picks up theta_q
        assert out.theta_q == pytest.approx(0.6)
        assert out.theta_p == pytest.approx(0.6)


class TestShiftVector:
    def test_accessors(self):
        e = ShiftVector.of((0.1, -0.2), (0.3, 0.4))
        assert e.n_modes == 2
        assert e.u(0) == 0.1
        assert e.v(1) == 0.4

    def test_dimension_checks(self):
        with pytest.raises(DomainError):
            ShiftVector(np.array([1.0, 2.0, 3.0]))
        with pytest.raises(DomainError):
            propagate_shifts(cnot_symplectic(), ShiftVector.of((1.0, 0.0)))
