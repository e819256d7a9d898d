"""Log-density kernels for every distribution in the noise model.

The observation model for a classifier output x given its class c and
noise level theta is Dirichlet with concentration theta stacked on the
class corner: Dir(x; theta * 1_c + 1). Because all but one concentration
equals 1, its log-density collapses to three terms,

    -lgamma(1 + theta) + lgamma(M + theta) + theta * log(x[c]),

which is what :func:`log_dirichlet_obs` evaluates. The generic Dirichlet
density is kept alongside as the reference form the specialized kernel
must agree with.

Gamma densities are parameterized by shape and *scale* (exp(-v/scale)),
and always include their normalizers: the shape/scale values are
themselves sampled upstream, so dropping the v-independent parts would
silently corrupt those moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")


@dataclass(frozen=True)
class HyperParams:
    """Shape ``kappa`` and scale ``gamma_scale`` of the shared Gamma prior
    over per-class noise levels."""

    kappa: float
    gamma_scale: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.gamma_scale > 0):
            raise ValueError("kappa and gamma_scale must be > 0")


def log_dirichlet_obs(x: np.ndarray, c: int, theta: float) -> float:
    """Log-density of Dir(x; theta * 1_c + 1) via the three-term form.

    ``x`` must be a clamped probability vector and ``theta`` nonnegative.
    A non-finite result means x[c] was exactly zero with theta > 0, i.e.
    an unclamped boundary input.
    """
    m = len(x)
    if theta == 0.0:
        # Flat Dirichlet: density is the constant Gamma(M).
        return math.lgamma(m)
    return -math.lgamma(1.0 + theta) + math.lgamma(m + theta) + theta * math.log(x[c])


def log_dirichlet_generic(x: np.ndarray, alpha) -> float:
    """Log-density of the full Dirichlet Dir(x; alpha), via log-Beta.

    Reference implementation used to cross-check the specialized kernel;
    `alpha` entries must all be positive.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or len(alpha) != len(x):
        raise ValueError("alpha must be a vector matching x")
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be > 0")
    out = math.lgamma(float(alpha.sum()))
    for am, xm in zip(alpha, x):
        out -= math.lgamma(am)
        if am != 1.0:  # skip 0 * log(0) at simplex corners
            out += (am - 1.0) * math.log(xm)
    return out


def log_gamma_density(v: float, shape: float, scale: float) -> float:
    """Log of the Gamma(shape, scale) density at v, normalizer included.

    Returns -inf for v <= 0 (the support boundary).
    """
    if v <= 0.0:
        return NEG_INF
    out = -v / scale - shape * math.log(scale) - math.lgamma(shape)
    if shape != 1.0:
        out += (shape - 1.0) * math.log(v)
    return out


def log_categorical(c: int, pi: np.ndarray) -> float:
    """log pi[c]; -inf when the prior assigns the class zero mass."""
    p = pi[c]
    if p <= 0.0:
        return NEG_INF
    return math.log(p)


def log_joint(
    obs,
    labels,
    thetas,
    hp: HyperParams,
    pi: np.ndarray,
    hpc,
) -> float:
    """Full log joint density of observations, labels, noise levels and
    hyperparameters, up to the constant of proportionality in x.

    Sums the categorical and Dirichlet terms over observations, the Gamma
    prior terms over the M per-class noise levels, and the two Gamma
    hyperprior terms. -inf from any component propagates.
    """
    if len(obs) != len(labels):
        raise ValueError(f"{len(obs)} observations but {len(labels)} labels")
    m = len(thetas)
    out = 0.0
    for x, c in zip(obs, labels):
        if len(x) != m:
            raise ValueError("observation width does not match number of classes")
        out += log_categorical(c, pi) + log_dirichlet_obs(x, c, thetas[c])
    for theta in thetas:
        out += log_gamma_density(theta, hp.kappa, hp.gamma_scale)
    out += log_gamma_density(hp.kappa, hpc.beta, hpc.eta)
    out += log_gamma_density(hp.gamma_scale, hpc.nu, hpc.omega)
    return out
