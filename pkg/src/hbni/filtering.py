"""Recursive classification filter driven by an inferred noise model.

State is kept as unnormalized log posterior mass per class ("log psi").
Each observation multiplies in the per-class observation densities; the
running maximum is subtracted after every step, which leaves the implied
probability vector unchanged while keeping thousands of updates away
from underflow.

Two usage modes: point-estimate filtering (one theta vector, typically
the posterior median) for streaming, and whole-sample propagation, which
runs the recursion once per retained posterior sample and yields the
distribution of class posteriors induced by noise-parameter uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from .densities import log_dirichlet_obs
from .sampler import NoiseModel, predictive_theta_median

__all__ = [
    "FilterState",
    "DegenerateFilterError",
    "filter_init",
    "filter_step",
    "filter_posterior",
    "filter_distribution",
    "sliding_window_classify",
]


class DegenerateFilterError(RuntimeError):
    """All classes have been driven to zero mass; no posterior exists."""


@dataclass(frozen=True)
class FilterState:
    """Running log psi per class, plus the buffer of recent observations
    when operating in sliding-window mode (window_size set)."""

    log_psi: np.ndarray
    log_prior: np.ndarray
    n_seen: int
    window_size: Optional[int] = None
    window: Tuple[np.ndarray, ...] = ()


def filter_init(pi: np.ndarray, window_size: Optional[int] = None) -> FilterState:
    """Fresh state with log psi at the log prior (zero observations).

    Zero-prior entries are allowed; those classes stay at -inf forever.
    """
    if window_size is not None and window_size < 1:
        raise ValueError("window_size must be >= 1")
    with np.errstate(divide="ignore"):
        log_pi = np.log(np.asarray(pi, dtype=np.float64))
    return FilterState(log_psi=log_pi.copy(), log_prior=log_pi, n_seen=0,
                       window_size=window_size)


def _step_terms(x: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    return np.array([log_dirichlet_obs(x, m, thetas[m]) for m in range(len(thetas))])


def filter_step(state: FilterState, x: np.ndarray, thetas) -> FilterState:
    """Absorb one clamped observation under per-class noise levels
    ``thetas`` (a point estimate or a single posterior sample).

    In sliding-window mode the recursion is recomputed from the prior
    over the last ``window_size`` observations; full-history mode
    accumulates incrementally.
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    if state.window_size is None:
        log_psi = state.log_psi + _step_terms(x, thetas)
    else:
        buf = (state.window + (np.asarray(x, dtype=np.float64),))[-state.window_size:]
        log_psi = state.log_prior.copy()
        for frame in buf:
            log_psi = log_psi + _step_terms(frame, thetas)
        return FilterState(
            log_psi=log_psi - log_psi.max(),
            log_prior=state.log_prior,
            n_seen=state.n_seen + 1,
            window_size=state.window_size,
            window=buf,
        )
    return FilterState(
        log_psi=log_psi - log_psi.max(),
        log_prior=state.log_prior,
        n_seen=state.n_seen + 1,
        window_size=None,
    )


def filter_posterior(state: FilterState) -> np.ndarray:
    """Normalize log psi into a probability vector over classes."""
    finite = np.isfinite(state.log_psi)
    if not finite.any():
        raise DegenerateFilterError("all classes at zero mass; filter is degenerate")
    z = state.log_psi - state.log_psi[finite].max()
    p = np.exp(z)
    return p / p.sum()


def filter_distribution(obs, model: NoiseModel, pi: np.ndarray) -> np.ndarray:
    """Run the recursion once per retained noise-parameter sample.

    Returns an (S, M) array: row s is the normalized class posterior
    after all of ``obs`` under theta-sample s. The spread across rows is
    the classification uncertainty induced by the noise posterior.
    """
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs[None, :]
    m = model.n_classes
    if obs.size and obs.shape[1] != m:
        raise ValueError(f"observation width {obs.shape[1]} != model classes {m}")
    thetas = model.thetas  # (S, M)
    n = obs.shape[0]
    with np.errstate(divide="ignore"):
        log_pi = np.log(np.asarray(pi, dtype=np.float64))
    # Batch form of the recursion: each observation contributes the
    # x-independent term plus theta * log x[m]; both sum over frames.
    base = gammaln(m + thetas) - gammaln(1.0 + thetas)
    t_sum = np.log(obs).sum(axis=0) if n else np.zeros(m)
    log_psi = log_pi[None, :] + n * base + thetas * t_sum[None, :]
    log_psi -= log_psi.max(axis=1, keepdims=True)
    p = np.exp(log_psi)
    return p / p.sum(axis=1, keepdims=True)


def sliding_window_classify(
    stream,
    window_size: int,
    model: NoiseModel,
    pi: np.ndarray,
) -> List[Tuple[np.ndarray, int]]:
    """Filter a stream with the model's median noise levels, recomputing
    over the last ``window_size`` frames at each step.

    Returns one (posterior, label) pair per frame, with argmax ties
    broken toward the lowest class index.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    point = predictive_theta_median(model)
    state = filter_init(pi, window_size=window_size)
    out = []
    for x in stream:
        state = filter_step(state, x, point)
        posterior = filter_posterior(state)
        out.append((posterior, int(np.argmax(posterior))))
    return out
