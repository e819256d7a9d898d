"""Shared domain types: simplex-valued probability vectors and seeded RNG.

A probability vector ("ProbVec") is a 1-D float64 array of length M >= 2
whose entries are nonnegative and sum to one. Library functions assume
their inputs have been through :func:`validate_probvec` (and, where a log
of an entry is taken, :func:`clamp_for_log`); validation happens at I/O
and API boundaries, not inside the numeric kernels.

Class labels are 0-based everywhere inside the library. External formats
(observation files, stream output, label sidecars) use 1-based labels;
conversion happens only at the I/O boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Default tolerance for in-process simplex validation.
SIMPLEX_TOL = 1e-9
# Looser tolerance for classifier outputs arriving via files: real
# pipelines emit rounded probabilities, so renormalize rather than reject.
IO_SIMPLEX_TOL = 1e-6
# Default floor applied before any log of a vector entry is taken.
LOG_FLOOR = 1e-12


class SimplexError(ValueError):
    """Raised when a vector cannot be interpreted as a probability vector."""


@dataclass(frozen=True)
class HyperPriorConstants:
    """Shape/scale pairs of the Gamma hyperpriors on the noise-prior
    hyperparameters: (beta, eta) for the shape kappa, (nu, omega) for the
    scale gamma. All four must be strictly positive."""

    beta: float = 2.0
    eta: float = 1.0
    nu: float = 2.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("beta", "eta", "nu", "omega"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"hyperprior constant {name} must be > 0, got {v}")


def validate_probvec(raw, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate and normalize a raw vector into a probability vector.

    Entries in [-tol, 0) are clamped to zero and the vector is
    renormalized, so tiny rounding noise is absorbed. Entries below -tol,
    a sum further than ``tol`` from one, non-finite values, or fewer than
    two entries are rejected with :class:`SimplexError`.
    """
    x = np.asarray(raw, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise SimplexError(f"probability vector needs >= 2 entries, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise SimplexError("probability vector has non-finite entries")
    if np.any(x < -tol):
        raise SimplexError(f"negative entry beyond tolerance: min={x.min():g}, tol={tol:g}")
    total = float(x.sum())
    if abs(total - 1.0) > tol:
        raise SimplexError(f"entries sum to {total:.12g}, not 1 within tol={tol:g}")
    x = np.where(x < 0.0, 0.0, x)
    return x / x.sum()


def clamp_for_log(x: np.ndarray, floor: float = LOG_FLOOR) -> np.ndarray:
    """Lift zero entries to ``floor`` and renormalize.

    Keeps log(x[m]) finite at the simplex boundary while perturbing
    interior points negligibly; a vector with all entries above the floor
    passes through unchanged (the renormalizer is exactly 1.0).
    """
    if not (0.0 < floor <= 1e-3):
        raise ValueError(f"floor must lie in (0, 1e-3], got {floor}")
    clamped = np.maximum(x, floor)
    return clamped / clamped.sum()


def uniform_prior(n_classes: int) -> np.ndarray:
    """Uniform class prior over ``n_classes`` classes."""
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    return np.full(n_classes, 1.0 / n_classes)


def make_rng(seed: int) -> np.random.Generator:
    """The one deterministic randomness source used by the whole package."""
    return np.random.default_rng(seed)


def label_to_external(label: int) -> int:
    """Internal 0-based class index -> 1-based label used in files/CLI."""
    return int(label) + 1


def label_from_external(label: int, n_classes: int) -> int:
    """1-based file/CLI label -> internal 0-based index, range-checked."""
    idx = int(label) - 1
    if not 0 <= idx < n_classes:
        raise ValueError(f"class label {label} out of range 1..{n_classes}")
    return idx
