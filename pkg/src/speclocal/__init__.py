"""Periodic spectral localizers, fuzzy tori and the mapping degree of torus maps.

Submodules
----------
clifford   Clifford generators and the split bases used by the localizers.
lattice    Translation-invariant operators and finite-volume restrictions.
inertia    Matrix inertia, signatures and Pfaffians.
localizer  Even and odd periodic localizers, homotopies and parameter checks.
symmetry   Z2 indices of time-reversal symmetric models.
fuzzy      Fuzzy tori, G-operators and determinant-path windings.
degree     Mapping degrees and lattice Chern numbers.
models     Model Hamiltonians and disorder.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .inertia import half_signature, inertia, pfaffian, pfaffian_sign, signature
from .lattice import FiniteVolumeOperator, TranslationInvariantOperator, periodic_restriction
from .localizer import even_periodic_localizer, odd_periodic_localizer, periodic_localizer
