"""Covert phase sensing with thermal-noise probes.

Models a two-way sensing geometry in which an interrogator hides a weak
thermal (amplified-spontaneous-emission) probe inside background thermal
noise, an adversary taps both directions of the link, and the interrogator
estimates a phase from the returned light with a retained reference beam.

Subpackages
-----------
``gaussian``     covariance-matrix tools and symplectic normal forms
``scenario``     the tapped two-way channel and its Gaussian states
``covertness``   relative-entropy covertness measures and photon budgets
``estimation``   Fisher information, Cramer-Rao bounds, Monte-Carlo checks
``link``         free-space link geometry, thermal background, band sweeps
``fock``         truncated number-basis oracle for small occupancies
``cli``          command-line interface (``covertsense`` entry point)
"""

__version__ = "0.1.0"

from . import covertness, estimation, fock, gaussian, link, scenario  # noqa: F401
from .errors import (  # noqa: F401
    CovertSenseError,
    CutoffError,
    DegenerateCovertnessError,
    DomainError,
    EmptySweepError,
    InfiniteQreError,
    NearFieldError,
    NumericalInstabilityError,
    PhysicalityError,
)
