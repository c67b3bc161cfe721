"""Expansion of weak mode operators into discrete phase-space shifts.

sqrt(delta)*a = p*sqrt(delta/2) + i*q*sqrt(delta/2) is rewritten through
x = arcsin(sin x) as a series of odd sine powers, and each sin^k is
expanded into displacement operators (binomial identity).  Shifts come
out as integer multiples of the base step: sqrt(delta/2) as a quadrature
offset, equivalently sqrt(delta)/2 in displacement-amplitude units; the
factor sqrt(2) between the two is carried explicitly in term metadata.

A dense truncated-Fock oracle (displacement matrix elements in the
associated-Laguerre closed form) validates the expansion against its
target on a bounded photon-number block.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DomainError, ResourceError

__all__ = [
    "ExpansionTerm",
    "DisplacementExpansion",
    "arcsin_series",
    "sin_power_displacement_coeffs",
    "expand_annihilation",
    "split_correctable",
    "displacement_matrix",
    "annihilation_matrix",
    "fock_residual_norm",
    "uncorrectable_exponent",
]

MAX_ARCSIN_ORDER = 15
MAX_FOCK_NMAX = 200
CORRECTABLE_QUADRATURE_CUTOFF = math.sqrt(math.pi / 2.0)


def arcsin_series(order) -> List[Fraction]:
    """Coefficients of x, x^3, ..., x^order in arcsin(x), exact rationals.

    The x^{2n+1} coefficient is C(2n, n) / (4^n (2n + 1)):
    1, 1/6, 3/40, 5/112, 35/1152, ...
    """
    if order < 1 or order % 2 == 0:
        raise DomainError(f"order must be a positive odd integer, got {order}")
    if order > MAX_ARCSIN_ORDER:
        raise DomainError(f"order bounded at {MAX_ARCSIN_ORDER}, got {order}")
    out = []
    for n in range((order + 1) // 2):
        out.append(Fraction(math.comb(2 * n, n), 4**n * (2 * n + 1)))
    return out


def sin_power_displacement_coeffs(k) -> Dict[int, Tuple[Fraction, Fraction]]:
    """Exact coefficients c_m of sin^k(u) = sum_m c_m e^{i m u}.

    Returned as m -> (re, im) rational pairs, m = -k..k in steps of 2;
    c_m = (2i)^{-k} (-1)^{(k-m)/2} C(k, (k+m)/2).
    """
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    # (2i)^{-k} = 2^{-k} * i^{-k}; i^{-k} cycles 1, -i, -1, i
    i_pow = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(-1)),
             (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(1))][k % 4]
    scale = Fraction(1, 2**k)
    out = {}
    for j in range(k + 1):
        m = 2 * j - k
        mag = Fraction(math.comb(k, j) * (-1) ** (k - j))
        re = scale * mag * i_pow[0]
        im = scale * mag * i_pow[1]
        out[m] = (re, im)
    return out


@dataclass(frozen=True)
class ExpansionTerm:
    """One displacement D(amplitude) with its complex weight.

    `axis` records which quadrature the underlying sine acted on ('p'
    sines displace along the real amplitude axis, 'q' sines along the
    imaginary axis); `step_index` is the integer multiple of the base
    step; `quadrature_shift` is the shift magnitude in quadrature units.
    """

    axis: str
    step_index: int
    amplitude: complex
    coeff: complex

    @property
    def quadrature_shift(self):
        return math.sqrt(2.0) * abs(self.amplitude)


@dataclass(frozen=True)
class DisplacementExpansion:
    terms: tuple
    target: str
    delta: float
    order: int
    metadata: dict = field(default_factory=dict)

    @property
    def l1_norm(self):
        return float(sum(abs(t.coeff) for t in self.terms))

    def __iter__(self):
        return iter(self.terms)


def expand_annihilation(delta, order) -> DisplacementExpansion:
    """sqrt(delta)*a as a finite combination of displacement operators.

    Both quadrature parts are expanded through the arcsin series up to
    the given odd sine power; sine powers are rewritten exactly into
    displacements at integer multiples of the base step.
    """
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    coeffs = arcsin_series(order)
    step_amp = math.sqrt(delta) / 2.0  # = sqrt(delta/2) / sqrt(2)
    acc: Dict[Tuple[str, int], complex] = {}
    # sqrt(delta) a = sqrt(delta/2) (q + i p): the q sine series enters
    # with real weight and the p series carries the factor i
    for n, a_k in enumerate(coeffs):
        k = 2 * n + 1
        sines = sin_power_displacement_coeffs(k)
        for m, (re, im) in sines.items():
            c = float(a_k) * complex(float(re), float(im))
            # sin^k(q sqrt(delta/2)): e^{i m sqrt(delta/2) q} = D(i m step_amp)
            key = ("q", m)
            acc[key] = acc.get(key, 0.0) + c
            # i * sin^k(p sqrt(delta/2)): e^{i m sqrt(delta/2) p} = D(-m step_amp)
            key = ("p", m)
            acc[key] = acc.get(key, 0.0) + 1j * c
    terms = []
    for (axis, m) in sorted(acc):
        amp = -m * step_amp if axis == "p" else 1j * m * step_amp
        terms.append(ExpansionTerm(axis=axis, step_index=m, amplitude=amp,
                                   coeff=acc[(axis, m)]))
    meta = {
        "base_step_quadrature": math.sqrt(delta / 2.0),
        "base_step_amplitude": step_amp,
        "amplitude_to_quadrature": math.sqrt(2.0),
    }
    return DisplacementExpansion(terms=tuple(terms), target="sqrt_delta_a",
                                 delta=delta, order=order, metadata=meta)


def split_correctable(exp: DisplacementExpansion):
    """Partition terms at the shift-error cutoff.

    A term is correctable when its net quadrature shift |m| sqrt(delta/2)
    is strictly below sqrt(pi/2) (equivalently |amplitude| < sqrt(pi)/2);
    the boundary and both unit conventions are recorded in the metadata
    of each part.
    """
    cut_quad = CORRECTABLE_QUADRATURE_CUTOFF
    meta = dict(exp.metadata)
    meta.update({
        "cutoff_quadrature": cut_quad,
        "cutoff_amplitude": cut_quad / math.sqrt(2.0),
    })
    good, bad = [], []
    for t in exp.terms:
        (good if t.quadrature_shift < cut_quad else bad).append(t)
    mk = lambda ts: DisplacementExpansion(
        terms=tuple(ts), target=exp.target, delta=exp.delta, order=exp.order,
        metadata=meta)
    return mk(good), mk(bad)


# -- truncated-Fock oracle ---------------------------------------------


def displacement_matrix(alpha, dim):
    """Dense D(alpha) on the first `dim` Fock levels (Cahill-Glauber form).

    D_mn = sqrt(n!/m!) alpha^{m-n} e^{-|alpha|^2/2} L_n^{(m-n)}(|alpha|^2)
    for m >= n, and D_mn = conj(D_nm(-alpha)) below the diagonal.
    """
    n = np.arange(dim)
    M, N = np.meshgrid(n, n, indexing="ij")
    lo, d = np.minimum(M, N), np.abs(M - N)
    x = abs(alpha) ** 2
    lag = eval_genlaguerre(lo, d, x)
    logpref = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1))
    mag = np.exp(logpref - x / 2.0)
    upper = alpha**d            # m > n: alpha^{m-n}
    lower = (-np.conj(alpha)) ** d  # m < n
    amp = np.where(M >= N, upper, lower)
    return amp * mag * lag


def annihilation_matrix(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def expansion_matrix(exp: DisplacementExpansion, dim):
    """Dense Fock-space matrix of the displacement combination."""
    out = np.zeros((dim, dim), dtype=complex)
    for t in exp.terms:
        out += t.coeff * displacement_matrix(t.amplitude, dim)
    return out


def target_matrix(exp: DisplacementExpansion, dim):
    if exp.target == "sqrt_delta_a":
        return math.sqrt(exp.delta) * annihilation_matrix(dim)
    raise DomainError(f"unknown expansion target {exp.target!r}")


def fock_residual_norm(exp: DisplacementExpansion, n_max, margin=40):
    """Spectral norm of (expansion - target) acting on the n <= n_max block.

    Matrices are built with `margin` extra levels (>= 40) so truncation
    edge effects stay below the returned value; the norm is the largest
    singular value of the column block n <= n_max.
    """
    if n_max > MAX_FOCK_NMAX:
        raise ResourceError(f"n_max bounded at {MAX_FOCK_NMAX}, got {n_max}")
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    dim = n_max + max(40, margin)
    resid = expansion_matrix(exp, dim) - target_matrix(exp, dim)
    block = resid[:, : n_max + 1]
    return float(np.linalg.svd(block, compute_uv=False)[0])


def uncorrectable_exponent(P, n_max):
    """(k, exponent): cutoff order k = sqrt(pi n_max / P) / 2 and the
    resulting uncorrectable-probability exponent 1 + k/2 in P^{1+k/2}."""
    if not 0.0 < P < 1.0:
        raise DomainError(f"loss probability must be in (0, 1), got {P}")
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    k = 0.5 * math.sqrt(math.pi * n_max / P)
    return k, 1.0 + k / 2.0
