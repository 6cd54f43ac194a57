"""latspec: exact lattice-simplex counting polynomials and their spectra,
general-position subsets, generating random walks on unit-determinant
integer matrices, and spectral measures of exactly solvable
measure-preserving lattice actions."""

__version__ = "0.1.0"

from .ehrhart import EhrhartPolynomial, Simplex, count_lattice_points, ehrhart_polynomial
from .lattice import Character, Hyperplane, IntMatrix, Irrational, UnimodularMap
from .spectra import PointSet, SearchBudget, Witness, witness_search

__all__ = [
    "Character",
    "EhrhartPolynomial",
    "Hyperplane",
    "IntMatrix",
    "Irrational",
    "PointSet",
    "SearchBudget",
    "Simplex",
    "UnimodularMap",
    "Witness",
    "__version__",
    "count_lattice_points",
    "ehrhart_polynomial",
    "witness_search",
]
