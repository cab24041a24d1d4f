from .points import EPoint, add_points, negate, random_point, reduce, two_torsion
from .divisors import Divisor, gcd, lcm, lin_equiv, random_divisor_with_sum, sum_divisor
from .theta import theta1, theta_char
from .spec import CONVENTION_TAG, CurveSpec

# Curve arithmetic is imported from here by the rest of the package.
__all__ = [
    "EPoint",
    "add_points",
    "negate",
    "random_point",
    "reduce",
    "two_torsion",
    "Divisor",
    "gcd",
    "lcm",
    "lin_equiv",
    "random_divisor_with_sum",
    "sum_divisor",
    "theta1",
    "theta_char",
    "CONVENTION_TAG",
    "CurveSpec",
]
