"""Consensus baselines: max-of-mean, voting, and the static-state Bayes
filter (SSBF).

SSBF updates with the raw classifier probabilities divided by the class
prior, so every observation carries equal evidential weight regardless
of how noisy its class actually is; that noise-blindness is what the
hierarchical filter corrects. It runs in log space with the same clamp
floor as the main filter so comparisons isolate modeling differences,
not numerics.

Argmax ties break toward the lowest class index in every method, keeping
error metrics comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "BaselineState",
    "InconsistentPriorError",
    "max_of_mean",
    "vote",
    "vote_counts",
    "ssbf_init",
    "ssbf_step",
    "ssbf_posterior",
]


class InconsistentPriorError(ValueError):
    """An observation put mass on a class the prior says is impossible."""


@dataclass(frozen=True)
class BaselineState:
    """Running SSBF state: unnormalized log posterior and its prior."""

    log_post: np.ndarray
    log_prior: np.ndarray
    pi: np.ndarray
    n_seen: int


def max_of_mean(obs) -> Tuple[np.ndarray, int]:
    """Elementwise mean of the observations and its argmax label."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 1:
        raise ValueError("need a nonempty (N, M) observation array")
    mean = obs.mean(axis=0)
    return mean, int(np.argmax(mean))


def vote_counts(obs) -> np.ndarray:
    """Per-class tally of per-frame argmax votes."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 1:
        raise ValueError("need a nonempty (N, M) observation array")
    counts = np.zeros(obs.shape[1])
    for row in obs:
        counts[int(np.argmax(row))] += 1.0
    return counts


def vote(obs) -> int:
    """Label with the most per-frame argmax votes."""
    return int(np.argmax(vote_counts(obs)))


def ssbf_init(pi: np.ndarray) -> BaselineState:
    """Fresh SSBF state at the class prior."""
    pi = np.asarray(pi, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    return BaselineState(log_post=log_pi.copy(), log_prior=log_pi, pi=pi, n_seen=0)


def ssbf_step(state: BaselineState, x: np.ndarray) -> BaselineState:
    """One prior-divided Bayes update with a clamped observation."""
    x = np.asarray(x, dtype=np.float64)
    bad = (state.pi == 0.0) & (x > 0.0)
    if bad.any():
        raise InconsistentPriorError(
            f"observation puts mass on zero-prior class {int(np.argmax(bad)) + 1}"
        )
    log_post = state.log_post + np.log(x) - state.log_prior
    return BaselineState(
        log_post=log_post - log_post.max(),
        log_prior=state.log_prior,
        pi=state.pi,
        n_seen=state.n_seen + 1,
    )


def ssbf_posterior(state: BaselineState) -> np.ndarray:
    """Normalize the running log posterior into a probability vector."""
    z = state.log_post - state.log_post[np.isfinite(state.log_post)].max()
    p = np.exp(z)
    return p / p.sum()
