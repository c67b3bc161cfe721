"""Phase-estimation protocols for the stabilizer eigenphase.

Three schemes are provided:

* nonadaptive (``pe``): unit-multiplier rounds, feedback phase 0 for the
  first half and pi/2 for the second half;
* adaptive (``ape``): unit-multiplier rounds, each feedback phase chosen
  to maximize the expected posterior sharpness, precomputed per outcome
  history in a lookup table;
* standard (``spe``): multipliers 2^k, k = M-1..0, with the semiclassical
  Fourier-transform phase recursion phi' = phi/2 - pi*x/2 and a rounded
  bitstring estimate.

Sampling uses the counter-based Philox generator (numpy's Philox4x32-10)
so trajectories are reproducible across platforms for a fixed seed.
"""

import cmath
import math
from dataclasses import dataclass, field
from math import comb
from typing import List, NamedTuple, Optional

import numpy as np

from .errors import DegeneratePosteriorError, DomainError, ResourceError
from .posterior import PhasePosterior, flat_prior, wrap_angle

__all__ = [
    "RoundRecord",
    "Trajectory",
    "FeedbackTable",
    "OutcomeRecord",
    "SurveyResult",
    "HistogramResult",
    "normalize_protocol",
    "optimize_feedback_phase",
    "build_feedback_table",
    "nonadaptive_schedule",
    "estimate_theta_simple",
    "sample_trajectory",
    "sample_estimates",
    "enumerate_outcomes",
    "deviation_survey",
    "chernoff_check",
    "standard_pe_run",
    "error_histogram",
]

_TWO_PI = 2.0 * math.pi
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GRID_N = 512

MAX_TABLE_DEPTH = 24
MAX_ADAPTIVE_ENUM = 16
MAX_STANDARD_ENUM = 12

_ALIASES = {
    "pe": "nonadaptive", "nonadaptive": "nonadaptive",
    "ape": "adaptive", "adaptive": "adaptive",
    "spe": "standard", "standard": "standard",
}


def normalize_protocol(name):
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise DomainError(f"unknown protocol {name!r}") from None


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True)
class RoundRecord:
    multiplier: int
    phi: float
    outcome: int

    def __post_init__(self):
        if self.multiplier < 1:
            raise DomainError(f"multiplier must be >= 1, got {self.multiplier}")


@dataclass(frozen=True)
class Trajectory:
    rounds: tuple
    theta_hat: float
    protocol: str

    @property
    def history(self):
        return "".join(str(r.outcome) for r in self.rounds)


class FeedbackTable:
    """Optimal feedback phases indexed by outcome history.

    Level l holds 2^l phases, one per length-l history; the index of a
    history is its most-significant-bit-first integer value.
    """

    def __init__(self, depth, levels):
        self.depth = depth
        self.levels = levels

    @property
    def n_entries(self):
        return sum(arr.size for arr in self.levels)

    def phi(self, history=""):
        level = len(history)
        if level >= self.depth:
            raise DomainError(f"history longer than table depth {self.depth}")
        idx = int(history, 2) if history else 0
        return float(self.levels[level][idx])

    def rows(self):
        for level, arr in enumerate(self.levels):
            for idx in range(arr.size):
                bits = format(idx, f"0{level}b") if level else ""
                yield bits, float(arr[idx])

    def dump_csv(self, path):
        from .output import write_csv

        write_csv(path, ["history_bits", "phi_radians"], list(self.rows()),
                  meta={"kind": "feedback_table", "depth": self.depth})

    @classmethod
    def from_csv(cls, path):
        rows = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("history_bits"):
                    continue
                bits, phi = line.split(",")
                rows[bits] = float(phi)
        depth = max(len(b) for b in rows) + 1
        levels = [np.zeros(2**l) for l in range(depth)]
        for bits, phi in rows.items():
            levels[len(bits)][int(bits, 2) if bits else 0] = phi
        return cls(depth, levels)


def optimize_feedback_phase(post: PhasePosterior) -> float:
    """Feedback phase maximizing the expected updated sharpness.

    The objective is sum_x |c'_{-1}(x)| = |A + B(phi)| + |A - B(phi)| with
    A = c_{-1}/2 and B(phi) = (e^{i phi} c_{-2} + e^{-i phi} c_0)/4.
    Scanned on a 512-point grid, then refined by golden section to below
    1e-6 rad; ties (the objective is pi-periodic) break toward the
    smallest phase, and the grid point is kept when refinement does not
    strictly improve the objective (covers the flat-prior case, phi = 0).
    """
    a_half = post.coefficient(-1) / 2.0
    c_m2 = post.coefficient(-2)
    c_0 = complex(post.c0)

    def objective(phi):
        b = (cmath.exp(1j * phi) * c_m2 + cmath.exp(-1j * phi) * c_0) / 4.0
        return abs(a_half + b) + abs(a_half - b)

    phis = np.arange(_GRID_N) * (_TWO_PI / _GRID_N)
    e = np.exp(1j * phis)
    b = (e * c_m2 + np.conj(e) * c_0) / 4.0
    vals = np.abs(a_half + b) + np.abs(a_half - b)
    best = float(vals.max())
    candidates = np.nonzero(vals >= best - 1e-12 * max(1.0, best))[0]
    i = int(candidates[0])

    h = _TWO_PI / _GRID_N
    lo, hi = phis[i] - h, phis[i] + h
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > 1e-7:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = objective(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = objective(x1)
    mid = 0.5 * (lo + hi)
    if objective(mid) > vals[i]:
        return mid % _TWO_PI
    return float(phis[i]) % _TWO_PI


def build_feedback_table(depth) -> FeedbackTable:
    """Depth-first construction of the adaptive lookup table (2^M - 1 entries)."""
    if not 1 <= depth <= MAX_TABLE_DEPTH:
        raise ResourceError(
            f"table depth must be in [1, {MAX_TABLE_DEPTH}], got {depth}")
    levels = [np.zeros(2**l) for l in range(depth)]

    def descend(post, level, idx):
        phi = optimize_feedback_phase(post)
        levels[level][idx] = phi
        if level + 1 < depth:
            for x in (0, 1):
                descend(post.update(x, phi), level + 1, 2 * idx + x)

    descend(flat_prior(), 0, 0)
    return FeedbackTable(depth, levels)


def nonadaptive_schedule(M):
    """M/2 rounds at phi = 0 followed by M/2 rounds at phi = pi/2."""
    if M % 2 != 0 or M < 2:
        raise DomainError(f"nonadaptive schedule needs even M >= 2, got {M}")
    half = M // 2
    return [(1, 0.0)] * half + [(1, math.pi / 2.0)] * half


def estimate_theta_simple(traj: Trajectory) -> float:
    """arg(2 P0~ - 1 - i (2 P(pi/2)~ - 1)) from per-block outcome-0 frequencies."""
    halves = {0.0: [], math.pi / 2.0: []}
    for r in traj.rounds:
        if r.multiplier != 1 or r.phi not in halves:
            raise DomainError("trajectory did not use the nonadaptive schedule")
        halves[r.phi].append(r.outcome)
    p0 = np.mean([1 - x for x in halves[0.0]])
    p90 = np.mean([1 - x for x in halves[math.pi / 2.0]])
    re, im = 2.0 * p0 - 1.0, -(2.0 * p90 - 1.0)
    if re == 0.0 and im == 0.0:
        raise DegeneratePosteriorError("simple estimate undefined: both terms zero")
    return wrap_angle(math.atan2(im, re))


# -- single-trajectory sampling ----------------------------------------


def sample_trajectory(protocol, M, rng_seed, true_theta=None, table=None):
    """One seeded trajectory; outcome bits from the true-phase likelihood
    when `true_theta` is given, otherwise from the flat-prior predictive."""
    protocol = normalize_protocol(protocol)
    if protocol == "standard":
        return standard_pe_run(M, M, true_theta, rng_seed)
    if protocol == "adaptive":
        if table is None or table.depth < M:
            raise DomainError(f"adaptive sampling needs a feedback table of depth >= {M}")
        phases = None
    else:
        phases = nonadaptive_schedule(M)
    rng = _rng(rng_seed)
    post = flat_prior()
    rounds = []
    history = ""
    for r in range(M):
        if protocol == "adaptive":
            phi = table.phi(history)
        else:
            phi = phases[r][1]
        if true_theta is None:
            p0, _ = post.outcome_probability(phi, 1)
        else:
            p0 = 0.5 * (1.0 + math.cos(true_theta + phi))
        x = 0 if rng.random() < p0 else 1
        post = post.update(x, phi, 1)
        rounds.append(RoundRecord(1, phi, x))
        history += str(x)
    return Trajectory(tuple(rounds), post.estimate_theta(), protocol)


def standard_pe_run(M_total, M_tilde, true_theta, seed):
    """Standard phase estimation: multipliers 2^k, k = M-1..0, Fourier phases.

    The final bitstring value v = sum_j x_j 2^{j-1} is rounded half-up to
    its M~ most significant bits (with wraparound); theta~ = 2 pi
    x_round / 2^M~, shifted by -2 pi when the ratio exceeds 1/2 (the
    boundary ratio 1/2 maps to +pi).
    """
    if not 1 <= M_tilde <= M_total:
        raise DomainError(f"need 1 <= M_tilde <= M_total, got {M_tilde}, {M_total}")
    if true_theta is None:
        raise DomainError("standard phase estimation requires a true phase")
    rng = _rng(seed)
    rounds = []
    phi = 0.0
    value = 0
    for j in range(M_total):
        m = 2 ** (M_total - 1 - j)
        p0 = 0.5 * (1.0 + math.cos(m * true_theta + phi))
        x = 0 if rng.random() < p0 else 1
        rounds.append(RoundRecord(m, phi % _TWO_PI, x))
        value += x << j
        phi = phi / 2.0 - math.pi * x / 2.0
    theta = _standard_theta_from_value(value, M_total, M_tilde)
    return Trajectory(tuple(rounds), theta, "standard")


def _standard_theta_from_value(value, M_total, M_tilde):
    shift = M_total - M_tilde
    rounded = ((value + (1 << shift >> 1)) >> shift) % (1 << M_tilde) if shift else value
    ratio = rounded / float(1 << M_tilde)
    if ratio <= 0.5:
        return _TWO_PI * ratio
    return _TWO_PI * ratio - _TWO_PI


# -- vectorized batch sampling -----------------------------------------


def sample_estimates(protocol, M, n_samples, seed, true_theta=None, table=None,
                     chunk=32768):
    """(histories, theta_hats) for n seeded trajectories, vectorized.

    `true_theta` may be None (flat-prior predictive sampling), a scalar,
    or an array of per-sample phases.  Histories are returned as
    MSB-first integers.  Used by the survey/histogram machinery; results
    agree with repeated `sample_trajectory` in distribution (the stream
    layout differs).
    """
    protocol = normalize_protocol(protocol)
    if protocol == "adaptive" and (table is None or table.depth < M):
        raise DomainError(f"adaptive sampling needs a feedback table of depth >= {M}")
    if protocol == "standard" and true_theta is None:
        raise DomainError("standard phase estimation requires a true phase")
    rng = _rng(seed)
    theta_arr = None
    if true_theta is not None:
        theta_arr = np.broadcast_to(np.asarray(true_theta, dtype=float), (n_samples,))
    hist = np.zeros(n_samples, dtype=np.int64)
    thetas = np.zeros(n_samples)
    for start in range(0, n_samples, chunk):
        sl = slice(start, min(start + chunk, n_samples))
        t = None if theta_arr is None else theta_arr[sl]
        if protocol == "standard":
            h, th = _chunk_standard(M, sl.stop - sl.start, rng, t)
        else:
            h, th = _chunk_unit_rounds(protocol, M, sl.stop - sl.start, rng, t, table)
        hist[sl] = h
        thetas[sl] = th
    return hist, thetas


def _chunk_unit_rounds(protocol, M, n, rng, theta, table):
    sched = nonadaptive_schedule(M) if protocol == "nonadaptive" else None
    coeffs = np.ones((n, 1), dtype=complex)
    K = 0
    hist = np.zeros(n, dtype=np.int64)
    for r in range(M):
        if protocol == "nonadaptive":
            phi = np.full(n, sched[r][1])
        else:
            phi = table.levels[r][hist]
        if theta is None:
            if K == 0:
                p0 = np.full(n, 0.5)
            else:
                c0 = coeffs[:, K].real
                cross = 0.5 * (np.exp(1j * phi) * coeffs[:, K - 1]).real
                p0 = (0.5 * c0 + cross) / c0
        else:
            p0 = 0.5 * (1.0 + np.cos(theta + phi))
        x = (rng.random(n) >= p0).astype(np.int64)
        sign = 1.0 - 2.0 * x
        phase = np.exp(1j * phi)
        dim = coeffs.shape[1]
        new = np.zeros((n, dim + 2), dtype=complex)
        new[:, 1 : 1 + dim] = 0.5 * coeffs
        new[:, 2 : 2 + dim] += (0.25 * sign * phase)[:, None] * coeffs
        new[:, 0:dim] += (0.25 * sign * np.conj(phase))[:, None] * coeffs
        coeffs = new
        K += 1
        hist = 2 * hist + x
    return hist, np.angle(coeffs[:, K - 1])


def _chunk_standard(M, n, rng, theta):
    phi = np.zeros(n)
    value = np.zeros(n, dtype=np.int64)
    hist = np.zeros(n, dtype=np.int64)
    for j in range(M):
        m = 2 ** (M - 1 - j)
        p0 = 0.5 * (1.0 + np.cos(m * theta + phi))
        x = (rng.random(n) >= p0).astype(np.int64)
        hist = 2 * hist + x
        value += x << j
        phi = phi / 2.0 - math.pi * x / 2.0
    ratio = value / float(1 << M)
    th = np.where(ratio <= 0.5, _TWO_PI * ratio, _TWO_PI * ratio - _TWO_PI)
    return hist, th


# -- exact outcome enumeration -----------------------------------------


class OutcomeRecord(NamedTuple):
    history: str
    probability: float
    multiplicity: int
    posterior: PhasePosterior
    theta_hat: float


def _chain(history_phis):
    post = flat_prior()
    for x, phi, m in history_phis:
        post = post.update(x, phi, m)
    return post


def _estimate_or_zero(post):
    # balanced nonadaptive outcome classes leave only even harmonics
    # (c_{-1} = 0, circular mean undefined); enumeration assigns those
    # the fixed estimate 0, matching arg(0) = 0 in the sampling path
    try:
        return post.estimate_theta()
    except DegeneratePosteriorError:
        return 0.0


def enumerate_outcomes(protocol, M) -> List[OutcomeRecord]:
    """Exact flat-prior outcome probabilities for all measurement records.

    Nonadaptive output is collapsed to the (M/2+1)^2 weight classes
    (updates at a fixed phase commute, so every history in a class has
    the same posterior, estimate, and synthesized state); the returned
    probability includes the class multiplicity.  Classes whose
    circular-mean estimate is undefined carry theta_hat = 0.
    """
    protocol = normalize_protocol(protocol)
    if M == 0:
        return [OutcomeRecord("", 1.0, 1, flat_prior(), 0.0)]
    if protocol == "nonadaptive":
        if M % 2 != 0:
            raise DomainError(f"nonadaptive enumeration needs even M, got {M}")
        half = M // 2
        records = []
        for w0 in range(half + 1):
            for w1 in range(half + 1):
                bits = ("1" * w0 + "0" * (half - w0)) + ("1" * w1 + "0" * (half - w1))
                chain = [(int(b), 0.0 if i < half else math.pi / 2.0, 1)
                         for i, b in enumerate(bits)]
                post = _chain(chain)
                mult = comb(half, w0) * comb(half, w1)
                records.append(OutcomeRecord(
                    bits, mult * post.c0, mult, post, _estimate_or_zero(post)))
        return records
    if protocol == "adaptive":
        if M > MAX_ADAPTIVE_ENUM:
            raise ResourceError(f"adaptive enumeration bounded at M <= {MAX_ADAPTIVE_ENUM}")
        records = []

        def descend(post, bits):
            if len(bits) == M:
                records.append(OutcomeRecord(bits, post.c0, 1, post,
                                             _estimate_or_zero(post)))
                return
            phi = optimize_feedback_phase(post)
            for x in (0, 1):
                descend(post.update(x, phi), bits + str(x))

        descend(flat_prior(), "")
        return records
    # standard
    if M > MAX_STANDARD_ENUM:
        raise ResourceError(f"standard enumeration bounded at M <= {MAX_STANDARD_ENUM}")
    records = []

    def descend_std(post, bits, phi, value):
        j = len(bits)
        if j == M:
            theta = _standard_theta_from_value(value, M, M)
            records.append(OutcomeRecord(bits, post.c0, 1, post, theta))
            return
        m = 2 ** (M - 1 - j)
        for x in (0, 1):
            descend_std(post.update(x, phi % _TWO_PI, m), bits + str(x),
                        phi / 2.0 - math.pi * x / 2.0, value + (x << j))

    descend_std(flat_prior(), "", 0.0, 0)
    return records


# -- figure-class analyses ---------------------------------------------


class SurveyResult(NamedTuple):
    epsilon: np.ndarray
    survival: np.ndarray
    n_samples: int

    def survival_at(self, eps):
        i = int(np.argmin(np.abs(self.epsilon - eps)))
        return float(self.survival[i])


#: epsilon grid for deviation surveys; contains pi/3 exactly (index 200)
SURVEY_EPS_GRID = np.linspace(0.0, math.pi, 601)


def deviation_survey(protocol, M, n_samples, seed, table=None) -> SurveyResult:
    """Survival curve P(|theta_hat - theta| > eps) over uniform true phases."""
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    protocol = normalize_protocol(protocol)
    rng = _rng((seed, 0xA5))
    thetas = rng.uniform(-math.pi, math.pi, size=n_samples)
    if protocol == "adaptive" and table is None:
        table = build_feedback_table(M)
    _, est = sample_estimates(protocol, M, n_samples, (seed, 0x5A), true_theta=thetas,
                              table=table)
    dev = np.abs(np.remainder(est - thetas + math.pi, _TWO_PI) - math.pi)
    dev.sort()
    counts = np.searchsorted(dev, SURVEY_EPS_GRID, side="right")
    return SurveyResult(SURVEY_EPS_GRID.copy(), 1.0 - counts / n_samples, n_samples)


def chernoff_check(M, n_samples, f=None, seed=0):
    """(empirical, bound) for Prob(dtheta >= (pi/3) sqrt(f/M)), nonadaptive.

    The analytic bound is 4 exp(-3 f / 16) for any f <= M.
    """
    if f is None:
        f = M
    if f > M:
        raise DomainError(f"need f <= M, got f={f}, M={M}")
    rng = _rng((seed, 0xC4))
    thetas = rng.uniform(-math.pi, math.pi, size=n_samples)
    _, est = sample_estimates("nonadaptive", M, n_samples, (seed, 0x4C),
                              true_theta=thetas)
    dev = np.abs(np.remainder(est - thetas + math.pi, _TWO_PI) - math.pi)
    threshold = (math.pi / 3.0) * math.sqrt(f / M)
    return float(np.mean(dev >= threshold)), 4.0 * math.exp(-3.0 * f / 16.0)


class HistogramResult(NamedTuple):
    bin_left: np.ndarray
    probability: np.ndarray
    overflow: float
    bin_width: float
    threshold: float
    below_threshold: float


def error_histogram(protocol, M, bin_width=0.002, threshold=0.01):
    """Exact distribution of the posterior shift-error rate over outcomes.

    Bins of `bin_width` cover [0, 0.1); outcomes with error rate >= 10%
    fall into the overflow bin.  `below_threshold` is the total
    probability of outcomes with error rate strictly below `threshold`,
    accumulated from the raw rates, not the binned ones.
    """
    if bin_width <= 0:
        raise DomainError("bin width must be positive")
    records = enumerate_outcomes(protocol, M)
    n_bins = int(round(0.1 / bin_width))
    probs = np.zeros(n_bins)
    overflow = 0.0
    below = 0.0
    for rec in records:
        err = rec.posterior.error_rate(rec.theta_hat)
        if err < threshold:
            below += rec.probability
        if err >= 0.1:
            overflow += rec.probability
        else:
            probs[min(int(err / bin_width), n_bins - 1)] += rec.probability
    return HistogramResult(
        bin_left=np.arange(n_bins) * bin_width, probability=probs,
        overflow=overflow, bin_width=bin_width, threshold=threshold,
        below_threshold=below)
