"""Exact Bayesian posterior over a stabilizer eigenphase.

The unnormalized density over theta in (-pi, pi] is held as a finite
Fourier series f(theta) = sum_k c_k e^{i k theta}, k = -K..K.  A
measurement round with multiplier m, feedback phase phi and outcome bit
x multiplies f by the likelihood (1 + (-1)^x cos(m theta + phi))/2,
which maps exactly onto the coefficient update

    c'_k = c_k/2 + (-1)^x/4 (e^{i phi} c_{k-m} + e^{-i phi} c_{k+m})

and grows the bandwidth K by m.  Everything downstream (outcome
probabilities, sharpness, circular-mean estimate, interval masses) is
read off the coefficients in closed form; no density grid is involved
except in :meth:`PhasePosterior.validate`.
"""

import cmath
import math

import numpy as np

from .errors import DegeneratePosteriorError, DomainError

__all__ = [
    "PhasePosterior",
    "flat_prior",
    "wrap_angle",
    "circular_distance",
]

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Reduce an angle to the principal interval (-pi, pi]."""
    w = math.fmod(theta, _TWO_PI)
    if w > math.pi:
        w -= _TWO_PI
    elif w <= -math.pi:
        w += _TWO_PI
    return w


def circular_distance(a, b):
    """Shortest angular distance |a - b| on the circle, in [0, pi]."""
    return abs(wrap_angle(a - b))


class PhasePosterior:
    """Unnormalized phase density as Hermitian-symmetric Fourier coefficients.

    Value type: updates return new instances, instances are never
    mutated after construction.
    """

    __slots__ = ("coeffs", "K")

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 != 1:
            raise DomainError("coefficient array must be 1-D with odd length")
        self.coeffs = coeffs
        self.K = coeffs.size // 2
        if not self.coeffs[self.K].real > 0.0:
            raise DomainError("zeroth coefficient must be positive (nonzero mass)")

    def coefficient(self, k):
        """c_k, zero outside the current bandwidth."""
        i = k + self.K
        if 0 <= i < self.coeffs.size:
            return complex(self.coeffs[i])
        return 0.0 + 0.0j

    @property
    def c0(self):
        return float(self.coeffs[self.K].real)

    def update(self, outcome, phi, m=1):
        """Posterior after one round of outcome `outcome` at phase `phi`.

        `m` is the round multiplier (1 for repeated/adaptive rounds,
        a power of two for standard phase estimation).
        """
        if m < 1 or int(m) != m:
            raise DomainError(f"multiplier must be an integer >= 1, got {m}")
        m = int(m)
        K2 = self.K + m
        out = np.zeros(2 * K2 + 1, dtype=complex)
        n = self.coeffs.size
        sign = 1.0 if outcome == 0 else -1.0
        lo = K2 - self.K
        out[lo : lo + n] += 0.5 * self.coeffs
        out[lo + m : lo + m + n] += (sign * 0.25 * cmath.exp(1j * phi)) * self.coeffs
        out[lo - m : lo - m + n] += (sign * 0.25 * cmath.exp(-1j * phi)) * self.coeffs
        return PhasePosterior(out)

    def outcome_probability(self, phi, m=1):
        """(p0, p1) for the next round at phase `phi`, multiplier `m`.

        p1 is computed as the exact complement 1 - p0 so the pair always
        sums to one bitwise.
        """
        if m < 1:
            raise DomainError(f"multiplier must be >= 1, got {m}")
        c0 = self.c0
        cross = 0.5 * (cmath.exp(1j * phi) * self.coefficient(-m)).real
        p0 = (0.5 * c0 + cross) / c0
        return p0, 1.0 - p0

    def sharpness(self):
        """S = |<e^{i theta}>| = |c_{-1}| / c_0, in [0, 1]."""
        return abs(self.coefficient(-1)) / self.c0

    def holevo_variance(self):
        """V = S^{-2} - 1; +inf for a flat (sharpness-zero) posterior."""
        s = self.sharpness()
        if s == 0.0:
            return math.inf
        return 1.0 / (s * s) - 1.0

    def estimate_theta(self):
        """Circular-mean estimate arg <e^{i theta}> = arg c_{-1}."""
        c = self.coefficient(-1)
        if abs(c) <= 1e-300:
            raise DegeneratePosteriorError("circular mean undefined: c_{-1} = 0")
        return wrap_angle(cmath.phase(c))

    def interval_mass(self, center, halfwidth):
        """Normalized probability of circular distance <= halfwidth from center.

        Evaluated analytically from the Fourier antiderivative; since f
        is 2pi-periodic the integral over [center - h, center + h] equals
        the wrap-aware arc mass for any center.
        """
        if not 0.0 < halfwidth <= math.pi:
            raise DomainError(f"halfwidth must be in (0, pi], got {halfwidth}")
        a = center - halfwidth
        b = center + halfwidth
        k = np.arange(1, self.K + 1)
        total = self.c0 * (b - a)
        if self.K > 0:
            ck = self.coeffs[self.K + 1 :]
            # k and -k terms are conjugates; sum of the pair is twice the real part
            total += 2.0 * np.sum(
                (ck * (np.exp(1j * k * b) - np.exp(1j * k * a)) / (1j * k)).real
            )
        return float(total / (_TWO_PI * self.c0))

    def error_rate(self, theta_hat):
        """1 - mass within pi/3 of theta_hat: the sqrt(pi)/6 shift error rate
        of a state whose residual p-shift is set by correcting with theta_hat."""
        return 1.0 - self.interval_mass(theta_hat, math.pi / 3.0)

    def density(self, thetas):
        """Evaluate f on the given angles (normalized to unit circular mass)."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        k = np.arange(-self.K, self.K + 1)
        vals = np.exp(1j * np.outer(thetas, k)) @ self.coeffs
        return vals.real / (_TWO_PI * self.c0)

    def validate(self, grid_points=4096):
        """Check Hermitian symmetry and nonnegativity on a dense grid."""
        flipped = np.conj(self.coeffs[::-1])
        sym = np.max(np.abs(self.coeffs - flipped))
        if sym > 1e-14 * max(1.0, np.max(np.abs(self.coeffs))):
            raise DomainError(f"Hermitian symmetry violated by {sym}")
        grid = np.linspace(-math.pi, math.pi, grid_points, endpoint=False)
        dens = self.density(grid)
        if dens.min() < -1e-12:
            raise DomainError(f"density negative: min {dens.min()}")
        return True

    def dump_csv(self, path):
        """Write the coefficients as CSV rows (k, re(c_k), im(c_k))."""
        from .output import write_csv

        rows = [
            (k, self.coefficient(k).real, self.coefficient(k).imag)
            for k in range(-self.K, self.K + 1)
        ]
        write_csv(path, ["k", "re", "im"], rows, meta={"kind": "posterior"})

    def __repr__(self):
        return f"PhasePosterior(K={self.K}, c0={self.c0:.6g})"


def flat_prior():
    """The flat distribution over (-pi, pi]: c_0 = 1, all else zero."""
    return PhasePosterior(np.array([1.0 + 0.0j]))
