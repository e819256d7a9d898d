"""Generative sampling from the noise model, for experiments and oracles.

A scenario fixes the number of classes, the true per-class noise levels,
and either per-class observation counts (inference-style datasets) or an
ordered schedule of (class, count) segments (streams with class
switches). Labels are produced alongside the observations but are only
ever used for scoring; inference never sees them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import make_rng, validate_probvec


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of a synthetic experiment.

    Exactly one of ``counts`` (observations per class, emitted class by
    class) or ``schedule`` (ordered (class, count) segments, 0-based
    classes) must be provided.
    """

    n_classes: int
    thetas: Tuple[float, ...]
    pi: np.ndarray
    counts: Optional[Tuple[int, ...]] = None
    schedule: Optional[Tuple[Tuple[int, int], ...]] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("scenario needs at least 2 classes")
        if len(self.thetas) != self.n_classes:
            raise ValueError("one theta per class required")
        if any(t < 0 for t in self.thetas):
            raise ValueError("thetas must be >= 0")
        object.__setattr__(self, "pi", validate_probvec(self.pi))
        if len(self.pi) != self.n_classes:
            raise ValueError("pi length must equal n_classes")
        if (self.counts is None) == (self.schedule is None):
            raise ValueError("provide exactly one of counts or schedule")
        if self.counts is not None:
            if len(self.counts) != self.n_classes or any(n < 0 for n in self.counts):
                raise ValueError("counts must list one nonnegative count per class")
        else:
            for c, n in self.schedule:
                if not 0 <= c < self.n_classes:
                    raise ValueError(f"schedule class {c} out of range")
                if n < 0:
                    raise ValueError("schedule counts must be >= 0")


def sample_dirichlet(alpha, rng: np.random.Generator) -> np.ndarray:
    """One draw from Dir(alpha) via normalized unit-scale Gamma draws."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be > 0")
    g = rng.gamma(alpha)
    return g / g.sum()


def corner_alpha(n_classes: int, label: int, theta: float) -> np.ndarray:
    """Concentration vector theta * 1_label + 1 of the observation model."""
    alpha = np.ones(n_classes)
    alpha[label] += theta
    return alpha


def generate_scenario(spec: ScenarioSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Draw the scenario's observations and their (withheld) labels.

    Returns ``(obs, labels)`` with obs of shape (N, M) and 0-based integer
    labels of shape (N,). Deterministic in ``spec.seed``.
    """
    rng = make_rng(spec.seed)
    if spec.counts is not None:
        segments = [(c, n) for c, n in enumerate(spec.counts)]
    else:
        segments = list(spec.schedule)
    labels = []
    rows = []
    for c, n in segments:
        alpha = corner_alpha(spec.n_classes, c, spec.thetas[c])
        for _ in range(n):
            rows.append(sample_dirichlet(alpha, rng))
            labels.append(c)
    if rows:
        obs = np.vstack(rows)
    else:
        obs = np.empty((0, spec.n_classes))
    return obs, np.asarray(labels, dtype=np.int64)
