"""Physical output states of unit-multiplier phase-estimation runs.

An M-round run with feedback phases phi_k and outcomes x_k produces the
lattice superposition sum_j c_j D(sqrt(2 pi) (j - M/2)) |sq.vac> whose
weights are the elementary symmetric polynomials of the round factors
z_k = (-1)^{x_k} e^{i phi_k}.  The unconditional centering displacement
is folded into center_offset = -M/2.
"""

import math
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .metrics import squeezed_vac_photons
from .posterior import wrap_angle
from .protocols import Trajectory, enumerate_outcomes, normalize_protocol
from .states import LatticeSuperposition

__all__ = [
    "SynthesisResult",
    "StandardPhotonCount",
    "coefficients_from_trajectory",
    "coefficients_from_rounds",
    "prepared_state",
    "average_photons_over_theta",
    "standard_pe_photon_count",
]

SQRT_PI = math.sqrt(math.pi)


class SynthesisResult(NamedTuple):
    state: LatticeSuperposition
    theta_hat: float
    correction_v: float


def coefficients_from_rounds(outcomes, phis):
    """c_j = e_j(z_1..z_M) by iterative polynomial multiplication, O(M^2)."""
    coeffs = np.array([1.0 + 0.0j])
    for x, phi in zip(outcomes, phis):
        z = (-1.0) ** x * np.exp(1j * phi)
        coeffs = np.convolve(coeffs, np.array([1.0, z]))
    return coeffs


def coefficients_from_trajectory(traj: Trajectory):
    """Lattice weights c_0..c_M of the measured state."""
    if any(r.multiplier != 1 for r in traj.rounds):
        raise DomainError("state synthesis supports unit-multiplier rounds only")
    return coefficients_from_rounds(
        [r.outcome for r in traj.rounds], [r.phi for r in traj.rounds])


def prepared_state(traj: Trajectory, delta) -> SynthesisResult:
    """The measured state as a lattice superposition, with its phase label.

    shift_v = theta_hat / (2 sqrt(pi)) expresses the state in the shifted
    basis consistent with the estimated stabilizer eigenvalue
    e^{i theta_hat}; correction_v records the displacement that maps it
    back to the zero-phase code space.
    """
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must be in (0, 1], got {delta}")
    weights = coefficients_from_trajectory(traj)
    M = len(traj.rounds)
    v = traj.theta_hat / (2.0 * SQRT_PI)
    state = LatticeSuperposition(
        delta=delta, spacing=math.sqrt(2.0 * math.pi), weights=weights,
        center_offset=-M / 2.0, shift_v=v)
    return SynthesisResult(state=state, theta_hat=wrap_angle(traj.theta_hat),
                           correction_v=v)


def _photon_mean_from_coeffs(coeffs, delta, M):
    """Orthogonal-peak photon mean of the (uncorrected) measured state."""
    j = np.arange(coeffs.size, dtype=float)
    norm = np.sum(np.abs(coeffs) ** 2)
    disp = 2.0 * math.pi * np.sum((j - M / 2.0) ** 2 * np.abs(coeffs) ** 2) / norm
    return squeezed_vac_photons(delta) + disp


def average_photons_over_theta(protocol, M, delta):
    """Outcome-probability-weighted mean photon number and its spread.

    Exact enumeration: mean = sum_x P(x) n(x) and the between-outcome
    standard deviation sqrt(sum_x P(x) (n(x) - mean)^2); photon numbers
    refer to the measured (uncorrected) states.
    """
    protocol = normalize_protocol(protocol)
    if protocol == "standard":
        raise DomainError("use standard_pe_photon_count for multiplier rounds")
    records = enumerate_outcomes(protocol, M)
    probs = np.array([r.probability for r in records])
    means = np.zeros(len(records))
    for i, rec in enumerate(records):
        half = M // 2
        if protocol == "nonadaptive" and M > 0:
            phis = [0.0] * half + [math.pi / 2.0] * half
        else:
            phis = _adaptive_phis_for_history(rec.history)
        coeffs = coefficients_from_rounds([int(b) for b in rec.history], phis)
        means[i] = _photon_mean_from_coeffs(coeffs, delta, M)
    mean = float(np.sum(probs * means))
    std = float(math.sqrt(np.sum(probs * (means - mean) ** 2)))
    return mean, std


def _adaptive_phis_for_history(history):
    from .posterior import flat_prior
    from .protocols import optimize_feedback_phase

    post = flat_prior()
    phis = []
    for b in history:
        phi = optimize_feedback_phase(post)
        phis.append(phi)
        post = post.update(int(b), phi)
    return phis


class StandardPhotonCount(NamedTuple):
    exact: float
    leading: float


def standard_pe_photon_count(M, delta) -> StandardPhotonCount:
    """Photon cost of M rounds of standard phase estimation.

    exact: 2 pi (2^{2M-2}/3 + 2^{M-1}/2 + 1/6) + n_sq;
    leading: 2 pi 2^{2M}/12 + n_sq.
    """
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    nsq = squeezed_vac_photons(delta)
    bracket = 2.0 * math.pi * (2.0 ** (2 * M - 2) / 3.0 + 2.0 ** (M - 1) / 2.0 + 1.0 / 6.0)
    leading = 2.0 * math.pi * 4.0**M / 12.0
    return StandardPhotonCount(exact=bracket + nsq, leading=leading + nsq)
