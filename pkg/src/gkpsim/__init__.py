"""Simulation of GKP code-state preparation by stabilizer phase estimation.

Subpackage map:

* :mod:`gkpsim.states` -- squeezed/GKP states as Gaussian lattice
  superpositions: wavefunctions, Wigner function, shift-error metrics.
* :mod:`gkpsim.posterior` -- exact Fourier-series Bayesian posterior
  over the stabilizer eigenphase.
* :mod:`gkpsim.protocols` -- repeated, adaptive, and standard phase
  estimation; feedback tables; trajectory sampling and enumeration.
* :mod:`gkpsim.synthesis` -- measurement record to physical state, and
  photon budgets.
* :mod:`gkpsim.metrics` -- squeezing-dB conversions and error algebra.
* :mod:`gkpsim.expansion` -- operators as discrete shift combinations,
  with a truncated-Fock oracle.
* :mod:`gkpsim.cv_qec` -- symplectic shift propagation, Bloch-Messiah,
  Steane-style correction rounds, phase frames.
* :mod:`gkpsim.pulses` -- controlled-displacement drive integrals and
  the evolution factorization oracle.
* :mod:`gkpsim.cli` -- the ``gkpsim`` experiment runner.
"""

from .errors import DegeneratePosteriorError, DomainError, GkpsimError, ResourceError

__version__ = "0.1.0"

__all__ = [
    "GkpsimError",
    "DomainError",
    "ResourceError",
    "DegeneratePosteriorError",
    "__version__",
]
