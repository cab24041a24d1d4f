"""
Symplectic leaves of the elliptic Poisson bracket on P^{n-1}.
The usual flow is: curve -> secant equations -> bracket -> classify points.
"""

from .curve import CurveSpec, Divisor, EPoint
from .bundles import DecomposableSum, IndecomposableOdd, IndecomposableOmega, LeafLabel
from .classify import AmbiguousClassification, classify, sample_leaf
from .poisson import PoissonCache, PoissonMatrix, build_cache
from .verify import VerificationReport, run_verification

__version__ = "0.1.0"

# Re-export the entry points so scripts can import from the package root.
__all__ = [
    "CurveSpec",
    "Divisor",
    "EPoint",
    "DecomposableSum",
    "IndecomposableOdd",
    "IndecomposableOmega",
    "LeafLabel",
    "AmbiguousClassification",
    "classify",
    "sample_leaf",
    "PoissonCache",
    "PoissonMatrix",
    "build_cache",
    "VerificationReport",
    "run_verification",
]
