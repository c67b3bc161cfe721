"""Scalar squeezing conversions and error-rate composition.

Conventions: the squeezing parameter is Delta = e^{-r} with r >= 0, and
decibels are reported as amplifier gain, dB = 10*log10(cosh^2 r).  The
alternative convention 10*log10(e^{2r}) is provided as a helper only.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "SqueezeLevel",
    "squeeze_db",
    "delta_from_db",
    "squeeze_db_variance_convention",
    "squeezed_vac_error",
    "squeezed_vac_photons",
    "combine_errors",
]


def _log_cosh(r):
    # ln cosh r = r + log1p((e^{-2r} - 1)/2), stable down to r = 0
    return r + math.log1p(math.expm1(-2.0 * r) / 2.0)


@dataclass(frozen=True)
class SqueezeLevel:
    """A squeezing level in its three equivalent parametrizations."""

    delta: float
    r: float
    db: float

    @classmethod
    def from_delta(cls, delta):
        r = math.log(1.0 / _checked_delta(delta))
        return cls(delta=delta, r=r, db=(20.0 / math.log(10.0)) * _log_cosh(r))


def _checked_delta(delta):
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must be in (0, 1], got {delta}")
    return delta


def squeeze_db(delta):
    """Gain in dB for squeezing parameter Delta, 10*log10(cosh^2 r)."""
    return SqueezeLevel.from_delta(delta).db


def delta_from_db(db):
    """Inverse of :func:`squeeze_db`.

    Inverted through sinh^2 r = 10^{db/10} - 1 with expm1/asinh, which
    stays accurate where acosh(cosh r) would lose half the digits near
    db = 0.
    """
    if db < 0.0:
        raise DomainError(f"db must be >= 0, got {db}")
    r = math.asinh(math.sqrt(math.expm1(db * math.log(10.0) / 10.0)))
    return math.exp(-r)


def squeeze_db_variance_convention(delta):
    """The alternative dB estimate 10*log10(e^{2r}); documentation helper only."""
    _checked_delta(delta)
    return 10.0 * math.log10(1.0 / delta**2)


def squeezed_vac_error(delta):
    """Probability that the squeezed quadrature lies outside +-sqrt(pi)/6.

    This is 1 - Erf(e^r sqrt(pi)/6); the complement Erf(.) is the success
    mass of the shift-error integral over |q| < sqrt(pi)/6.  The source
    material labels the integral itself as an error bound although it
    tends to 1 with increasing squeezing; the decreasing quantity below
    is the one plotted against squeezing.
    """
    _checked_delta(delta)
    return 1.0 - math.erf(math.sqrt(math.pi) / (6.0 * delta))


def squeezed_vac_photons(delta):
    """Mean photon number of the squeezed vacuum, sinh^2(ln(1/Delta))."""
    _checked_delta(delta)
    return math.sinh(math.log(1.0 / delta)) ** 2


def combine_errors(p_err, q_err):
    """Union of two independent error events: p + q - p*q."""
    for x in (p_err, q_err):
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"error rates must be in [0, 1], got {x}")
    return p_err + q_err - p_err * q_err
