"""Symplectic shift-error propagation and Steane-style CV error correction.

States are tracked only through their per-mode quadrature shifts
(u = q-offset, v = p-offset); that is exactly the level at which the
repeated-correction threshold argument operates.  Linear-optics gates
become 2n x 2n symplectic maps on (q_1, p_1, ..., q_n, p_n), shift
vectors transform as e' = S e, and stabilizer phase labels ride along as
(theta_p, theta_q) frames instead of physical corrective displacements.
Homodyne readout is ideal; measurement noise is folded into the ancilla
shift bound.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import polar

from .errors import DomainError
from .metrics import squeeze_db
from .posterior import wrap_angle

__all__ = [
    "ShiftVector",
    "SymplecticMap",
    "PhaseFrame",
    "symplectic_form",
    "cnot_symplectic",
    "hadamard_symplectic",
    "sgate_symplectic",
    "gate_symplectic",
    "bloch_messiah",
    "BlochMessiahResult",
    "propagate_shifts",
    "mod_star",
    "steane_round",
    "run_qec_simulation",
    "frame_update",
    "frame_update_symplectic",
]

SQRT_PI = math.sqrt(math.pi)
_SYMPLECTIC_TOL = 1e-12


def symplectic_form(n_modes):
    """Block-diagonal J for the interleaved ordering (q_1, p_1, ...)."""
    j2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    J = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        J[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = j2
    return J


@dataclass(frozen=True)
class ShiftVector:
    """Per-mode quadrature offsets (u_i, v_i) as a flat (q, p, ...) vector."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.size % 2 != 0:
            raise DomainError("shift vector needs an even number of entries")
        if not np.all(np.isfinite(vals)):
            raise DomainError("shift entries must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, *pairs):
        return cls(np.array([x for uv in pairs for x in uv], dtype=float))

    @property
    def n_modes(self):
        return self.values.size // 2

    def u(self, mode=0):
        return float(self.values[2 * mode])

    def v(self, mode=0):
        return float(self.values[2 * mode + 1])


@dataclass(frozen=True)
class SymplecticMap:
    matrix: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.matrix, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2 != 0:
            raise DomainError("symplectic matrix must be square of even dimension")
        J = symplectic_form(S.shape[0] // 2)
        err = np.max(np.abs(S.T @ J @ S - J))
        if err > _SYMPLECTIC_TOL:
            raise DomainError(f"matrix is not symplectic (S^T J S - J = {err:.3g})")
        object.__setattr__(self, "matrix", S)

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def compose(self, other):
        """Map applying `other` first, then self."""
        return SymplecticMap(self.matrix @ other.matrix)


def cnot_symplectic() -> SymplecticMap:
    """q_c -> q_c, p_c -> p_c - p_t, q_t -> q_c + q_t, p_t -> p_t."""
    return SymplecticMap(np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, -1.0],
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))


def hadamard_symplectic() -> SymplecticMap:
    """Quarter-period phase delay: q -> p, p -> -q."""
    return SymplecticMap(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def sgate_symplectic() -> SymplecticMap:
    """Shear q -> q, p -> p - q."""
    return SymplecticMap(np.array([[1.0, 0.0], [-1.0, 1.0]]))


def gate_symplectic(gate, modes, n_modes) -> SymplecticMap:
    """Embed a named gate acting on `modes` into an n-mode identity map."""
    gate = gate.upper()
    S = np.eye(2 * n_modes)
    if gate == "CNOT":
        if len(modes) != 2 or modes[0] == modes[1]:
            raise DomainError("CNOT needs two distinct mode indices")
        c, t = modes
        small = cnot_symplectic().matrix
        idx = [2 * c, 2 * c + 1, 2 * t, 2 * t + 1]
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                S[ia, ib] = small[a, b]
    elif gate in ("H", "S", "I"):
        if len(modes) != 1:
            raise DomainError(f"{gate} acts on exactly one mode")
        (m,) = modes
        small = {"H": hadamard_symplectic().matrix,
                 "S": sgate_symplectic().matrix,
                 "I": np.eye(2)}[gate]
        S[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = small
    else:
        raise DomainError(f"unknown gate {gate!r}")
    return SymplecticMap(S)


def propagate_shifts(S: SymplecticMap, e: ShiftVector) -> ShiftVector:
    """Shifts transform under the linear quadrature map: e' = S e."""
    if e.values.size != S.matrix.shape[0]:
        raise DomainError("shift vector dimension does not match the map")
    return ShiftVector(S.matrix @ e.values)


# -- Bloch-Messiah ------------------------------------------------------


class BlochMessiahResult(NamedTuple):
    passive_left: SymplecticMap
    squeeze: np.ndarray
    passive_right: SymplecticMap
    r: np.ndarray
    db: np.ndarray

    def reassembled(self):
        return self.passive_left.matrix @ self.squeeze @ self.passive_right.matrix


def _interleave_permutation(n):
    """P with x_qqpp = P @ x_interleaved."""
    P = np.zeros((2 * n, 2 * n))
    for i in range(n):
        P[i, 2 * i] = 1.0
        P[n + i, 2 * i + 1] = 1.0
    return P


def bloch_messiah(S: SymplecticMap, tol=1e-9) -> BlochMessiahResult:
    """S = O1 . diag(e^{r_1}, e^{-r_1}, ...) . O2 with O_i passive.

    Polar-decompose S = W P; the positive factor P is a symmetric
    symplectic whose eigenvalues pair as (lambda, 1/lambda) with
    eigenvectors mapped into each other by the symplectic form, which
    yields an orthogonal-symplectic eigenbasis K and P = K D K^T.
    Squeeze strengths are reported both as r = ln(lambda) and in dB
    (10 log10 cosh^2 r).
    """
    n = S.n_modes
    perm = _interleave_permutation(n)
    Sq = perm @ S.matrix @ perm.T
    omega = perm @ symplectic_form(n) @ perm.T  # [[0, I], [-I, 0]]

    W, P = polar(Sq, side="right")
    lam, vecs = np.linalg.eigh(P)

    plus_idx = [i for i in range(2 * n) if lam[i] > 1.0 + tol]
    ones_idx = [i for i in range(2 * n) if abs(lam[i] - 1.0) <= tol]
    order = np.argsort([-lam[i] for i in plus_idx])
    V = [vecs[:, plus_idx[i]] for i in order]
    lams = [lam[plus_idx[i]] for i in order]

    # pair up the unit eigenspace: each chosen v brings its partner -omega v
    basis = [vecs[:, i] for i in ones_idx]
    chosen = []
    while len(V) + len(chosen) < n:
        span = []
        for v in chosen:
            span.extend([v, -omega @ v])
        best, best_norm = None, 0.0
        for b in basis:
            res = b.copy()
            for s in span:
                res -= (s @ res) * s
            nn = np.linalg.norm(res)
            if nn > best_norm:
                best, best_norm = res, nn
        if best is None or best_norm < 1e-12:
            raise DomainError("failed to pair the unit eigenspace")
        chosen.append(best / best_norm)
        lams.append(1.0)
    V.extend(chosen)

    Vm = np.column_stack(V) if V else np.zeros((2 * n, 0))
    K = np.hstack([Vm, -omega @ Vm])
    lams = np.array(lams)
    D = np.diag(np.concatenate([lams, 1.0 / lams]))

    O1 = perm.T @ (W @ K) @ perm
    O2 = perm.T @ K.T @ perm
    Dm = perm.T @ D @ perm
    r = np.log(lams)
    db = np.array([squeeze_db(math.exp(-abs(ri))) for ri in r])
    return BlochMessiahResult(
        passive_left=SymplecticMap(O1), squeeze=Dm,
        passive_right=SymplecticMap(O2), r=r, db=db)


# -- Steane correction ---------------------------------------------------


def mod_star(x):
    """Centered remainder in (-sqrt(pi)/2, sqrt(pi)/2], boundary to +."""
    return x - SQRT_PI * np.ceil(x / SQRT_PI - 0.5)


class SteaneOutcome(NamedTuple):
    residual: float
    measured: float


def steane_round(u_data, u_ancilla) -> SteaneOutcome:
    """One shift-correction stage: measure u_data + u_ancilla modulo the
    code lattice and displace back by the minimal amount.

    Serves both quadratures: pass (u, u_ancilla) for the q round against
    the |+> ancilla, (v, v_ancilla) for the mirror p round against |0>.
    The residual equals -u_ancilla exactly while |u_data + u_ancilla| <
    sqrt(pi)/2.
    """
    measured = u_data + u_ancilla
    correction = -float(mod_star(measured))
    return SteaneOutcome(residual=u_data + correction, measured=measured)


class QecSimResult(NamedTuple):
    rounds: int
    logical_errors: int
    measured_q: np.ndarray
    measured_p: np.ndarray
    residual_u: np.ndarray
    residual_v: np.ndarray
    logical_flag: np.ndarray


def run_qec_simulation(rounds, shift_bound, seed) -> QecSimResult:
    """Alternating q/p Steane rounds with i.i.d. uniform(-b, b) shifts.

    Each round injects a fresh in-circuit shift on the data in both
    quadratures and corrects with a fresh ancilla; a logical error is
    counted whenever the accumulated data shift reaches sqrt(pi)/2 in
    magnitude before correction.  For b < sqrt(pi)/6 the three-shift
    bound keeps every round correctable.
    """
    if shift_bound < 0:
        raise DomainError(f"shift bound must be >= 0, got {shift_bound}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    b = float(shift_bound)
    draws = rng.uniform(-b, b, size=(rounds, 4)) if b > 0 else np.zeros((rounds, 4))
    init = rng.uniform(-b, b, size=2) if b > 0 else np.zeros(2)
    u, v = float(init[0]), float(init[1])
    meas_q = np.zeros(rounds)
    meas_p = np.zeros(rounds)
    res_u = np.zeros(rounds)
    res_v = np.zeros(rounds)
    flags = np.zeros(rounds, dtype=np.int64)
    threshold = SQRT_PI / 2.0
    errors = 0
    for i in range(rounds):
        u_err, u_anc, v_err, v_anc = draws[i]
        u += u_err
        flagged = abs(u) >= threshold
        out = steane_round(u, u_anc)
        u = out.residual
        meas_q[i] = out.measured
        v += v_err
        flagged = flagged or abs(v) >= threshold
        out = steane_round(v, v_anc)
        v = out.residual
        meas_p[i] = out.measured
        res_u[i] = u
        res_v[i] = v
        if flagged:
            errors += 1
            flags[i] = 1
    return QecSimResult(rounds=rounds, logical_errors=errors, measured_q=meas_q,
                        measured_p=meas_p, residual_u=res_u, residual_v=res_v,
                        logical_flag=flags)


# -- phase frames --------------------------------------------------------


@dataclass(frozen=True)
class PhaseFrame:
    """Stabilizer eigenvalue labels (theta_p, theta_q) of one mode."""

    theta_p: float = 0.0
    theta_q: float = 0.0

    def __post_init__(self):
        for t in (self.theta_p, self.theta_q):
            if not -math.pi < t <= math.pi + 1e-15:
                raise DomainError("frame angles must lie in (-pi, pi]")


def _frames_to_shift(frames) -> ShiftVector:
    # a frame (theta_p, theta_q) labels the state shifted by
    # (dq, dp) = (theta_q, -theta_p) / (2 sqrt(pi))
    vals = []
    for f in frames:
        vals.extend([f.theta_q / (2.0 * SQRT_PI), -f.theta_p / (2.0 * SQRT_PI)])
    return ShiftVector(np.array(vals))


def _shift_to_frames(e: ShiftVector):
    frames = []
    for i in range(e.n_modes):
        theta_q = wrap_angle(2.0 * SQRT_PI * e.u(i))
        theta_p = wrap_angle(-2.0 * SQRT_PI * e.v(i))
        frames.append(PhaseFrame(theta_p=theta_p, theta_q=theta_q))
    return frames


def frame_update_symplectic(frames, S: SymplecticMap):
    """Conjugate the frame displacement through an arbitrary symplectic map."""
    frames = [frames] if isinstance(frames, PhaseFrame) else list(frames)
    if len(frames) != S.n_modes:
        raise DomainError("frame count does not match the map")
    return _shift_to_frames(propagate_shifts(S, _frames_to_shift(frames)))


def frame_update(frames, gate, modes=(0,)):
    """New frames after a named Clifford gate (H, S, I, or CNOT)."""
    frames = [frames] if isinstance(frames, PhaseFrame) else list(frames)
    S = gate_symplectic(gate, tuple(modes), len(frames))
    return frame_update_symplectic(frames, S)
