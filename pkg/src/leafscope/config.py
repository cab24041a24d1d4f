import logging
import os
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToleranceConfig:
    # Point equality on the torus, checked in both real and imaginary parts.
    lattice_tol: float = 1e-10
    # Relative singular-value threshold (s_k / s_1).
    rank_tol: float = 1e-8
    # q-series truncation bound: the sum runs over k in [-theta_terms, theta_terms].
    theta_terms: int = 40
    # Newton convergence for zeros of sections.
    root_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("lattice_tol", "rank_tol", "root_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.theta_terms < 10:
            raise ValueError("theta_terms must be >= 10")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    def to_dict(self) -> dict:
        return {
            "lattice_tol": self.lattice_tol,
            "rank_tol": self.rank_tol,
            "theta_terms": self.theta_terms,
            "root_tol": self.root_tol,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToleranceConfig":
        known = cls().to_dict()
        return cls(**{k: type(known[k])(v) for k, v in data.items() if k in known})


def _thread_cap() -> int:
    raw = os.environ.get("LEAFSCOPE_THREADS")
    if not raw:
        return -1  # joblib: all cores
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        logger.warning("ignoring LEAFSCOPE_THREADS=%r, expected a positive integer; using all cores", raw)
        return -1
    return cap


@dataclass(frozen=True)
class Settings:
    # Grids over the fundamental parallelogram, as points per side.
    curve_grid: int = 64
    x_grid: int = 48
    zero_grid: int = 64

    # Rank decisions: kept and dropped singular values must differ by this factor.
    rank_gap: float = 1e3
    # The syzygy null space must be separated at least this much.
    syzygy_gap: float = 1e6

    # Chordal distance below which a point is taken to lie on E.
    curve_distance_tol: float = 1e-7

    # Oversampling of the multiplication-map fit (samples = factor * n).
    room_oversample: int = 4
    # Interpolation rows per unknown monomial.
    interpolation_oversample: int = 2

    rejection_budget: int = 200
    # How many grid minima are refined before giving up on a level.
    refine_candidates: int = 6

    threads: int = _thread_cap()


# Shared settings instance keeps scripts and library code aligned.
SETTINGS = Settings()
