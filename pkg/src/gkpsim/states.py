"""Oscillator states as lattice superpositions of displaced squeezed Gaussians.

Units and conventions
---------------------
Quadratures q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2), [q, p] = i.
A displacement amplitude alpha relates to quadrature offsets through
q = sqrt(2) Re(alpha), p = sqrt(2) Im(alpha); lattice spacings are given
in amplitude units (sqrt(2*pi) between codeword peaks, i.e. 2*sqrt(pi)
in q).  The squeezing parameter Delta = e^{-r} sets the position-space
density variance Delta^2/2 of each Gaussian peak.

Residual shifts are applied as e^{-i u p} e^{-i v q}: u translates the
peaks in q, v multiplies the position wavefunction by e^{-i v q}
(equivalently translates the momentum wavefunction to p + v).

Adjacent codeword peaks overlap as exp(-pi/Delta^2), e.g. ~8e-35 for
Delta = 0.2 (tiny but kept: norms and moments here always use the exact
Gaussian Gram matrix, with the orthogonal-peak value reported alongside
for comparison with back-of-envelope estimates that put such overlaps
at the 1e-13 level).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

from .errors import DomainError

__all__ = [
    "SqueezedVacuum",
    "LatticeSuperposition",
    "PhotonStats",
    "overlap_displaced",
    "approx_codeword",
    "squeezed_vacuum_state",
    "shift_error_rate",
    "logical_x_error_rate",
    "photon_number_variance",
    "wigner_grid",
    "export_wavefunction_csv",
    "export_wigner_csv",
]

SQRT_PI = math.sqrt(math.pi)
_TAIL_SIGMAS = 8.0  # Gaussian tails are below double precision past 8 sigma


@dataclass(frozen=True)
class SqueezedVacuum:
    """A squeezed vacuum state with parameter Delta = e^{-r}.

    `quadrature` names the squeezed quadrature; the position-space
    density of a q-squeezed state is a Gaussian of variance Delta^2/2.
    """

    delta: float
    quadrature: str = "q"

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must be in (0, 1], got {self.delta}")
        if self.quadrature not in ("q", "p"):
            raise DomainError(f"quadrature must be 'q' or 'p', got {self.quadrature}")


def overlap_displaced(state: SqueezedVacuum, d: float) -> float:
    """Overlap <sq.vac| T_d |sq.vac> for a pure position translation by d.

    Equals exp(-d^2 / (4 Delta^2)); real by convention for q-translations
    of a q-squeezed vacuum.
    """
    return math.exp(-(d * d) / (4.0 * state.delta**2))


def _peak_gaussian(delta, x):
    """Normalized peak amplitude g_Delta(x) = (pi Delta^2)^{-1/4} e^{-x^2/(2 Delta^2)}."""
    return (math.pi * delta**2) ** (-0.25) * np.exp(-(x * x) / (2.0 * delta**2))


@dataclass(frozen=True)
class LatticeSuperposition:
    """Complex-weighted displaced squeezed Gaussians on a 1-D lattice.

    Peak j (j = 0..M) sits at q_j = sqrt(2)*spacing*(j + center_offset)
    + shift_u with weight ``weights[j]``; the wavefunction additionally
    carries the phase e^{-i shift_v q}.  Weights are stored raw; unit
    normalization (via the exact Gaussian Gram matrix) is applied when
    evaluating.
    """

    delta: float
    spacing: float
    weights: np.ndarray
    center_offset: float = 0.0
    shift_u: float = 0.0
    shift_v: float = 0.0
    _norm_sq: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must be in (0, 1], got {self.delta}")
        w = np.atleast_1d(np.asarray(self.weights, dtype=complex))
        if w.size == 0 or not np.any(w != 0):
            raise DomainError("at least one weight must be nonzero")
        object.__setattr__(self, "weights", w)
        n2 = float(np.real(np.conj(w) @ (self._gram() @ w)))
        if not (np.isfinite(n2) and n2 > 0.0):
            raise DomainError(f"squared norm must be finite and positive, got {n2}")
        object.__setattr__(self, "_norm_sq", n2)

    # -- geometry -----------------------------------------------------

    @property
    def peak_positions(self):
        j = np.arange(self.weights.size)
        return math.sqrt(2.0) * self.spacing * (j + self.center_offset) + self.shift_u

    @property
    def norm_sq(self):
        """Exact squared norm of the raw weight superposition."""
        return self._norm_sq

    def _gram(self):
        q = (
            math.sqrt(2.0)
            * self.spacing
            * (np.arange(np.atleast_1d(self.weights).size) + self.center_offset)
        )
        d = q[:, None] - q[None, :]
        return np.exp(-(d * d) / (4.0 * self.delta**2))

    def shifted(self, u=0.0, v=0.0):
        """New state with e^{-i u p} e^{-i v q} applied on top of existing shifts."""
        return LatticeSuperposition(
            delta=self.delta,
            spacing=self.spacing,
            weights=self.weights,
            center_offset=self.center_offset,
            shift_u=self.shift_u + u,
            shift_v=self.shift_v + v,
        )

    # -- wavefunctions ------------------------------------------------

    def wavefunction_q(self, q):
        """Normalized position-space amplitude at q (scalar or array)."""
        q = np.asarray(q, dtype=float)
        qj = self.peak_positions
        amp = np.tensordot(
            self.weights, _peak_gaussian(self.delta, q[..., None] - qj), ([0], [-1])
        )
        phase = np.exp(-1j * self.shift_v * q)
        return amp * phase / math.sqrt(self._norm_sq)

    def wavefunction_p(self, p):
        """Normalized momentum-space amplitude, closed-form Fourier transform.

        Each displaced narrow Gaussian maps to the broad Gaussian
        g_{1/Delta}(p + v) modulated by the phase e^{-i (p+v) q_j}.
        """
        p = np.asarray(p, dtype=float)
        y = p + self.shift_v
        qj = self.peak_positions
        comb = np.tensordot(
            self.weights, np.exp(-1j * y[..., None] * qj), ([0], [-1])
        )
        return _peak_gaussian(1.0 / self.delta, y) * comb / math.sqrt(self._norm_sq)

    def _dq_window(self):
        qj = self.peak_positions
        return qj.min() - _TAIL_SIGMAS * self.delta, qj.max() + _TAIL_SIGMAS * self.delta

    def _wigner_support(self, q):
        """Merged x-intervals where Psi*(q+x) Psi(q-x) is non-negligible:
        around x = (q_j - q_k)/2 for peak pairs with (q_j + q_k)/2 near q."""
        qj = self.peak_positions
        half = 10.0 * self.delta
        centers = sorted(set(
            0.5 * (qj[j] - qj[k])
            for j in range(qj.size) for k in range(qj.size)
            if abs(qj[j] + qj[k] - 2.0 * q) <= 2.0 * half))
        if not centers:
            return []
        intervals = [[centers[0] - half, centers[0] + half]]
        for c in centers[1:]:
            if c - half <= intervals[-1][1]:
                intervals[-1][1] = c + half
            else:
                intervals.append([c - half, c + half])
        return intervals

    def wigner(self, p, q, tol=1e-12):
        """W(p, q) = (1/pi) int e^{2ipx} Psi*(q+x) Psi(q-x) dx.

        Adaptive quadrature over the Gaussian support intervals.  The
        imaginary part of the integrand is odd in x and vanishes
        identically; only the real part is evaluated.
        """
        intervals = self._wigner_support(q)
        if not intervals:
            return 0.0

        def integrand(x):
            val = np.conj(self.wavefunction_q(q + x)) * self.wavefunction_q(q - x)
            return (np.exp(2j * p * x) * val).real

        res = 0.0
        for a, b in intervals:
            res += quad(integrand, a, b, limit=300, epsabs=tol, epsrel=tol)[0]
        return res / math.pi

    # -- photon statistics --------------------------------------------

    def photon_stats(self):
        """Mean photon number: orthogonal-peak value plus exact correction.

        ``mean`` follows the orthogonal-peak approximation
        sinh^2(ln Delta) + sum_j |alpha_j c_j|^2 / sum_j |c_j|^2 with
        alpha_j = spacing*(j + center_offset); ``correction`` is the
        difference to the exact Gaussian-overlap value (which also
        accounts for the u, v shifts).  The exact value is authoritative.
        """
        w = self.weights
        alpha = self.spacing * (np.arange(w.size) + self.center_offset)
        n_orth = float(np.sum(np.abs(alpha * w) ** 2) / np.sum(np.abs(w) ** 2))
        approx = math.sinh(math.log(self.delta)) ** 2 + n_orth
        return PhotonStats(mean=approx, correction=self._exact_mean_photons() - approx)

    def _exact_mean_photons(self):
        """<a^dag a> from closed-form Gaussian moment integrals."""
        w = self.weights
        qj = self.peak_positions
        d = qj[:, None] - qj[None, :]
        m = 0.5 * (qj[:, None] + qj[None, :])
        A = np.exp(-(d * d) / (4.0 * self.delta**2))
        W = np.conj(w)[:, None] * w[None, :]
        N = self._norm_sq
        v = self.shift_v
        q2 = np.real(np.sum(W * A * (m * m + self.delta**2 / 2.0)))
        # <p^2> of h e^{-ivq}: |h'|^2 + v^2 |h|^2 - 2 v Im(h' h*)
        C = A * (self.delta**2 / 2.0 - d * d / 4.0) / self.delta**4
        p2 = np.real(np.sum(W * C)) + v * v * N
        B = (d / (2.0 * self.delta**2)) * A  # int g'(q - q_j) g(q - q_k) dq
        cross = np.sum((w[:, None] * np.conj(w)[None, :]) * B)
        p2 -= 2.0 * v * float(np.imag(cross))
        return (q2 + p2) / (2.0 * N) - 0.5


class PhotonStats(NamedTuple):
    mean: float
    correction: float

    @property
    def exact(self):
        return self.mean + self.correction


def squeezed_vacuum_state(delta):
    """The squeezed vacuum as a single-peak lattice superposition."""
    return LatticeSuperposition(delta=delta, spacing=0.0, weights=np.array([1.0 + 0j]))


def approx_codeword(delta, bit, envelope_count: Optional[int] = None):
    """Gaussian-weighted comb of displaced squeezed vacua for logical 0 or 1.

    Peaks sit at even (bit 0) or odd (bit 1) multiples of sqrt(pi) in q
    with envelope weight exp(-Delta^2 q_peak^2 / 2); the comb is
    truncated once the envelope weight drops below 1e-12 when
    `envelope_count` is not given.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"codeword delta must be in (0, 1), got {delta}")
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit}")
    if envelope_count is None:
        # envelope exp(-2 pi Delta^2 s^2) < 1e-12 beyond the last peak
        envelope_count = int(math.ceil(math.sqrt(math.log(1e12) / (2.0 * math.pi * delta**2))))
    t_max = int(envelope_count)
    if t_max < 1:
        raise DomainError("envelope_count must be >= 1")
    if bit == 0:
        s = np.arange(-t_max, t_max + 1, dtype=float)  # peaks at 2 s sqrt(pi)
        offset = -float(t_max)
    else:
        s = np.arange(-t_max, t_max, dtype=float) + 0.5  # peaks at (2t+1) sqrt(pi)
        offset = -float(t_max) + 0.5
    weights = np.exp(-2.0 * math.pi * delta**2 * s**2).astype(complex)
    return LatticeSuperposition(
        delta=delta, spacing=math.sqrt(2.0 * math.pi), weights=weights,
        center_offset=offset,
    )


from functools import lru_cache


@lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def wigner_grid(state, ps, qs, nodes_per_cycle=4):
    """W on the grid qs x ps via fixed Gauss-Legendre panels.

    Same support decomposition as :meth:`LatticeSuperposition.wigner`,
    with merged intervals chopped into panels of at most 16 peak widths;
    the per-panel node count resolves both the Gaussian bumps and the
    fastest e^{2ipx} oscillation over the `ps` range, keeping the rule
    spectrally accurate.  Rows follow qs, columns ps.
    """
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    pmax = float(np.max(np.abs(ps))) if ps.size else 0.0
    chop = 16.0 * state.delta
    out = np.zeros((qs.size, ps.size))
    for iq, q in enumerate(qs):
        xs_all = []
        ws_all = []
        for a, b in state._wigner_support(q):
            n_panels = max(1, int(math.ceil((b - a) / chop)))
            edges = np.linspace(a, b, n_panels + 1)
            width = edges[1] - edges[0]
            cycles = width * pmax / math.pi
            n = 24 + int(math.ceil(nodes_per_cycle * cycles)) + int(
                math.ceil(9.0 * width / state.delta))
            x0, w0 = _leggauss(n)
            for lo, hi in zip(edges[:-1], edges[1:]):
                xs_all.append(0.5 * (hi - lo) * x0 + 0.5 * (lo + hi))
                ws_all.append(0.5 * (hi - lo) * w0)
        if not xs_all:
            continue
        xs = np.concatenate(xs_all)
        ws = np.concatenate(ws_all)
        f = ws * np.conj(state.wavefunction_q(q + xs)) * state.wavefunction_q(q - xs)
        out[iq] = (np.exp(2j * np.outer(ps, xs)) @ f).real / math.pi
    return out


# -- folded shift-error mass ------------------------------------------


def shift_error_rate(state, cutoff, quadrature="q", period=SQRT_PI):
    """Mass of the folded marginal outside +-cutoff in the centered cell.

    The marginal density (|Psi(q)|^2 or |Psi~(p)|^2) is folded modulo
    `period` into the centered cell (-period/2, period/2]; returned is
    the probability outside +-cutoff.  The default period sqrt(pi)
    measures shifts relative to the stabilizer lattice; period
    2*sqrt(pi) with cutoff sqrt(pi)/2 gives the logical-X rate.
    """
    if not 0.0 < cutoff <= period / 2.0:
        raise DomainError(f"cutoff must be in (0, {period / 2}], got {cutoff}")
    if quadrature == "q":
        return _q_gap_mass(state, cutoff, period)
    if quadrature == "p":
        return _p_gap_mass(state, cutoff, period)
    raise DomainError(f"quadrature must be 'q' or 'p', got {quadrature}")


def logical_x_error_rate(state):
    """Probability that perfect correction lands on the wrong codeword."""
    return shift_error_rate(state, SQRT_PI / 2.0, quadrature="q", period=2.0 * SQRT_PI)


def _gap_intervals(cutoff, period, lo, hi):
    """Complement of the union of [n*period - cutoff, n*period + cutoff]
    over (lo, hi), plus the two unbounded tails."""
    if period / 2.0 - cutoff <= 0.0:
        return []
    n_lo = int(math.floor(lo / period)) - 1
    n_hi = int(math.ceil(hi / period)) + 1
    gaps = [(-np.inf, n_lo * period - cutoff)]
    for n in range(n_lo, n_hi + 1):
        gaps.append((n * period + cutoff, (n + 1) * period - cutoff))
    gaps.append(((n_hi + 1) * period + cutoff, np.inf))
    return gaps


def _q_gap_mass(state, cutoff, period):
    """Exact (erf closed form) mass of |Psi(q)|^2 over the excluded gaps.

    Accumulated directly (never as 1 minus the retained mass) so rates
    far below the epsilon of 1 come out faithfully.
    """
    w = state.weights
    qj = state.peak_positions
    delta = state.delta
    d = qj[:, None] - qj[None, :]
    m = 0.5 * (qj[:, None] + qj[None, :])
    G = np.real(np.conj(w)[:, None] * w[None, :]) * np.exp(-(d * d) / (4.0 * delta**2))
    lo, hi = state._dq_window()
    total = 0.0
    for a, b in _gap_intervals(cutoff, period, lo, hi):
        total += float(np.sum(G * 0.5 * (erf((b - m) / delta) - erf((a - m) / delta))))
    return max(total / state.norm_sq, 0.0)


def _p_gap_mass(state, cutoff, period):
    """Quadrature of |Psi~(p)|^2 over the excluded gaps."""
    half_support = 14.0 / state.delta  # broad-Gaussian tails < 1e-42 beyond
    lo = -state.shift_v - half_support
    hi = -state.shift_v + half_support
    density = lambda p: float(np.abs(state.wavefunction_p(p)) ** 2)
    total = 0.0
    for a, b in _gap_intervals(cutoff, period, lo, hi):
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        val, _ = quad(density, a, b, limit=300, epsabs=1e-13, epsrel=1e-10)
        total += val
    return max(total, 0.0)


# -- photon-number variance (quadrature-based) ------------------------


def _wavefunction_derivatives(state, q):
    """(Psi, Psi', Psi'') at q from the analytic Gaussian derivatives."""
    q = np.asarray(q, dtype=float)
    qj = state.peak_positions
    delta2 = state.delta**2
    x = q[..., None] - qj
    g = _peak_gaussian(state.delta, x)
    h = np.tensordot(state.weights, g, ([0], [-1]))
    h1 = np.tensordot(state.weights, -(x / delta2) * g, ([0], [-1]))
    h2 = np.tensordot(state.weights, (x * x / delta2**2 - 1.0 / delta2) * g, ([0], [-1]))
    v = state.shift_v
    phase = np.exp(-1j * v * q) / math.sqrt(state.norm_sq)
    psi = h * phase
    psi1 = (h1 - 1j * v * h) * phase
    psi2 = (h2 - 2j * v * h1 - v * v * h) * phase
    return psi, psi1, psi2


def photon_number_variance(state):
    """Exact Var(n) by quadrature of the fourth-order quadrature moments.

    n = (q^2 + p^2 - 1)/2, so <n^2> needs <q^4>, <p^4> = int |Psi''|^2 and
    <q^2 p^2 + p^2 q^2> = -2 Re int q^2 Psi* Psi''.  For approximate
    codewords this is close to the leading-order estimate 1/(2 Delta^2)
    of the source analysis; the exact value reported here is larger at
    finite Delta.
    """
    a, b = state._dq_window()
    pts = [float(t) for t in state.peak_positions if a < t < b]

    def integrate(f):
        return quad(f, a, b, points=pts or None, limit=50 * (len(pts) + 8),
                    epsabs=1e-11)[0]

    def moment(kind, q):
        psi, psi1, psi2 = _wavefunction_derivatives(state, np.array([q]))
        if kind == "q4":
            return (q**4) * float(np.abs(psi[0]) ** 2)
        if kind == "p4":
            return float(np.abs(psi2[0]) ** 2)
        if kind == "qp":
            return -2.0 * (q**2) * float((np.conj(psi[0]) * psi2[0]).real)
        if kind == "q2":
            return q * q * float(np.abs(psi[0]) ** 2)
        return float(np.abs(psi1[0]) ** 2)

    q4, p4, qp, q2, p2 = (
        integrate(lambda q, k=k: moment(k, q)) for k in ("q4", "p4", "qp", "q2", "p2"))
    n_mean = state.photon_stats().exact
    n2 = 0.25 * (q4 + p4 + qp - 2.0 * q2 - 2.0 * p2 + 1.0)
    return n2 - n_mean**2


# -- CSV export -------------------------------------------------------


def export_wavefunction_csv(state, qs, path, meta=None):
    """Write (q, re, im) rows of the position wavefunction."""
    from .output import write_csv

    psi = state.wavefunction_q(np.asarray(qs, dtype=float))
    rows = [(q, a.real, a.imag) for q, a in zip(np.asarray(qs), psi)]
    write_csv(path, ["q", "re", "im"], rows, meta=meta or {"kind": "wavefunction"})


def export_wigner_csv(state, qs, ps, path, meta=None):
    """Write (q, p, w) rows of the Wigner function on the grid qs x ps."""
    from .output import write_csv

    grid = wigner_grid(state, ps, qs)
    rows = []
    for iq, q in enumerate(qs):
        for ip, p in enumerate(ps):
            rows.append((q, p, grid[iq, ip]))
    write_csv(path, ["q", "p", "w"], rows, meta=meta or {"kind": "wigner"})
