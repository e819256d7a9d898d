"""Metropolis-Hastings inference over latent classes, per-class noise
levels, and their shared Gamma hyperparameters.

Each iteration sweeps component-wise: every latent class label (sticky
categorical proposal, scored by its local categorical + observation
terms), every per-class noise level theta_m (Gaussian step in log space,
scored by the observations currently assigned to that class plus its
Gamma prior term), then the hyperparameters kappa and gamma (log-space
steps, scored by all M Gamma terms plus their hyperpriors).

Log-space proposals target the posterior in the *original* parameter
space, so every such move carries a +log(new) - log(old) change-of-
variables correction in its acceptance ratio.

The per-class observation terms factor as

    count_m * [lgamma(M + theta_m) - lgamma(1 + theta_m)] + theta_m * S_m,

with S_m the sum of log x[i][m] over observations assigned to class m,
so a full sweep costs O(N + M) density evaluations regardless of how
often labels move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import optimize, special

from .core import HyperPriorConstants, make_rng
from .densities import HyperParams, log_gamma_density, log_joint

__all__ = [
    "ChainConfig",
    "NoiseModel",
    "ChainDiagnostics",
    "propose_class",
    "propose_logscale",
    "mh_accept",
    "run_chain",
    "predictive_theta_median",
    "gamma_mixture_median",
    "predictive_theta_mixture_median",
]


@dataclass(frozen=True)
class ChainConfig:
    """All MCMC settings; defaults reproduce the reference chain length
    (8000 iterations, 6000 burn-in, thinning 10 -> 200 retained)."""

    total_iterations: int = 8000
    burn_in: int = 6000
    thinning: int = 10
    class_proposal_stickiness: float = 0.8
    logstep_theta: float = 0.3
    logstep_kappa: float = 0.25
    logstep_gamma: float = 0.25
    init_theta: float = 5.0
    init_kappa: float = 2.0
    init_gamma: float = 2.0
    hyperprior: HyperPriorConstants = field(default_factory=HyperPriorConstants)
    seed: int = 0

    def __post_init__(self):
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")
        if not 0 <= self.burn_in < self.total_iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < total_iterations")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.retained_count < 1:
            raise ValueError("chain would retain no samples; lower burn_in or thinning")
        if not 0.0 < self.class_proposal_stickiness < 1.0:
            raise ValueError("class_proposal_stickiness must lie in (0, 1)")
        for name in ("logstep_theta", "logstep_kappa", "logstep_gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("init_theta", "init_kappa", "init_gamma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def retained_count(self) -> int:
        return (self.total_iterations - self.burn_in) // self.thinning


@dataclass(frozen=True)
class NoiseModel:
    """Posterior samples of (theta_1..theta_M, kappa, gamma) plus the
    class prior they were inferred under. Immutable once produced."""

    n_classes: int
    samples: np.ndarray  # shape (S, M + 2); columns theta_1..theta_M, kappa, gamma
    pi: np.ndarray
    config_echo: Optional[ChainConfig] = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] != self.n_classes + 2:
            raise ValueError(
                f"samples must have shape (S>=1, {self.n_classes + 2}), got {s.shape}"
            )
        if np.any(s[:, : self.n_classes] < 0):
            raise ValueError("theta samples must be >= 0")
        if np.any(s[:, self.n_classes:] <= 0):
            raise ValueError("kappa/gamma samples must be > 0")
        object.__setattr__(self, "samples", s)

    @property
    def thetas(self) -> np.ndarray:
        return self.samples[:, : self.n_classes]

    @property
    def kappas(self) -> np.ndarray:
        return self.samples[:, self.n_classes]

    @property
    def gammas(self) -> np.ndarray:
        return self.samples[:, self.n_classes + 1]

    @classmethod
    def from_point(cls, thetas, pi, kappa: float = 1.0, gamma: float = 1.0) -> "NoiseModel":
        """Degenerate single-sample model from known noise levels; handy
        when the true parameters are supplied exactly."""
        thetas = np.asarray(thetas, dtype=np.float64)
        row = np.concatenate([thetas, [kappa, gamma]])
        return cls(n_classes=len(thetas), samples=row[None, :], pi=np.asarray(pi, float))


@dataclass(frozen=True)
class ChainDiagnostics:
    """Acceptance rates per proposal block and per-parameter trace
    summaries (mean, median, central 90% interval) of retained samples."""

    acceptance: Dict[str, float]
    summaries: Dict[str, Dict[str, float]]


def propose_class(current: int, n_classes: int, stickiness: float, rng) -> int:
    """Sticky categorical proposal: keep the current label with
    probability ``stickiness``, else move uniformly to one of the other
    classes. Symmetric, so it needs no Hastings correction."""
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    if not 0.0 < stickiness < 1.0:
        raise ValueError("stickiness must lie in (0, 1)")
    if rng.random() < stickiness:
        return current
    k = int(rng.integers(0, n_classes - 1))
    return k if k < current else k + 1


def propose_logscale(current: float, step: float, rng) -> float:
    """Gaussian random-walk step of width ``step`` in log space."""
    if current <= 0:
        raise ValueError("current must be > 0")
    if step == 0.0:
        return current
    return math.exp(math.log(current) + step * rng.standard_normal())


def mh_accept(
    log_target_new: float,
    log_target_old: float,
    log_jacobian_correction: float,
    rng,
) -> bool:
    """Standard MH decision: accept with probability
    min(1, exp(new - old + correction)). A -inf new target always
    rejects."""
    if log_target_new == -math.inf:
        return False
    delta = log_target_new - log_target_old + log_jacobian_correction
    if delta >= 0.0:
        return True
    return math.log(rng.random()) < delta


def run_chain(obs, n_classes: int, pi, cfg: ChainConfig) -> Tuple[NoiseModel, ChainDiagnostics]:
    """Run the full component-wise MH chain on clamped observations.

    Labels start uniformly at random; theta/kappa/gamma start at the
    configured init values. Raises ValueError for degenerate setups
    (fewer than 2 classes, empty observations, width mismatch, or a
    non-finite joint density at the initial state).
    """
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 1:
        raise ValueError("need a nonempty (N, M) observation array")
    if obs.shape[1] != n_classes:
        raise ValueError(f"observation width {obs.shape[1]} != n_classes {n_classes}")
    pi = np.asarray(pi, dtype=np.float64)
    n_obs = obs.shape[0]
    m = n_classes
    hpc = cfg.hyperprior
    lgamma, log = math.lgamma, math.log

    rng = make_rng(cfg.seed)
    labels = [int(c) for c in rng.integers(0, m, size=n_obs)]
    thetas = [cfg.init_theta] * m
    kappa = cfg.init_kappa
    gamma = cfg.init_gamma

    init_target = log_joint(obs, labels, thetas, HyperParams(kappa, gamma), pi, hpc)
    if not math.isfinite(init_target):
        raise ValueError(
            "joint density is not finite at the initial state; "
            "check that observations are clamped and the prior covers all classes"
        )

    # log pi with -inf for zero-mass classes (kept proposable but never accepted)
    logpi = [log(p) if p > 0 else -math.inf for p in pi]
    logx = np.log(obs).tolist()

    # Per-class sufficient statistics of the current label assignment.
    counts = [0] * m
    s_log = [0.0] * m
    for i, c in enumerate(labels):
        counts[c] += 1
        s_log[c] += logx[i][c]

    # x-independent part of the per-observation log-density, cached per class
    def obs_base(theta: float) -> float:
        return lgamma(m + theta) - lgamma(1.0 + theta)

    base = [obs_base(t) for t in thetas]

    total = cfg.total_iterations
    stick = cfg.class_proposal_stickiness
    # Pre-drawn class-sweep randomness (same sticky kernel as propose_class,
    # drawn in bulk); scalar draws for the theta/kappa/gamma moves follow.
    u_stay = rng.random((total, n_obs)).tolist()
    picks = rng.integers(0, m - 1, size=(total, n_obs)).tolist()
    u_acc = rng.random((total, n_obs)).tolist()

    retained = np.empty((cfg.retained_count, m + 2))
    n_kept = 0
    acc_class = 0
    acc_theta = 0
    acc_kappa = 0
    acc_gamma = 0

    for t in range(total):
        # -- class sweep ------------------------------------------------
        row_stay, row_pick, row_acc = u_stay[t], picks[t], u_acc[t]
        for i in range(n_obs):
            if row_stay[i] < stick:
                acc_class += 1  # self-proposal, trivially accepted
                continue
            c = labels[i]
            k = row_pick[i]
            cand = k if k < c else k + 1
            lx = logx[i]
            delta = (logpi[cand] + base[cand] + thetas[cand] * lx[cand]) - (
                logpi[c] + base[c] + thetas[c] * lx[c]
            )
            if delta >= 0.0 or log(row_acc[i]) < delta:
                labels[i] = cand
                counts[c] -= 1
                counts[cand] += 1
                s_log[c] -= lx[c]
                s_log[cand] += lx[cand]
                acc_class += 1

        # -- theta sweep ------------------------------------------------
        for j in range(m):
            cur = thetas[j]
            new = propose_logscale(cur, cfg.logstep_theta, rng)
            base_new = obs_base(new)
            lt_new = counts[j] * base_new + new * s_log[j] + log_gamma_density(new, kappa, gamma)
            lt_old = counts[j] * base[j] + cur * s_log[j] + log_gamma_density(cur, kappa, gamma)
            if mh_accept(lt_new, lt_old, log(new) - log(cur), rng):
                thetas[j] = new
                base[j] = base_new
                acc_theta += 1

        # -- hyperparameter moves ----------------------------------------
        new = propose_logscale(kappa, cfg.logstep_kappa, rng)
        lt_new = sum(log_gamma_density(th, new, gamma) for th in thetas)
        lt_new += log_gamma_density(new, hpc.beta, hpc.eta)
        lt_old = sum(log_gamma_density(th, kappa, gamma) for th in thetas)
        lt_old += log_gamma_density(kappa, hpc.beta, hpc.eta)
        if mh_accept(lt_new, lt_old, log(new) - log(kappa), rng):
            kappa = new
            acc_kappa += 1

        new = propose_logscale(gamma, cfg.logstep_gamma, rng)
        lt_new = sum(log_gamma_density(th, kappa, new) for th in thetas)
        lt_new += log_gamma_density(new, hpc.nu, hpc.omega)
        lt_old = sum(log_gamma_density(th, kappa, gamma) for th in thetas)
        lt_old += log_gamma_density(gamma, hpc.nu, hpc.omega)
        if mh_accept(lt_new, lt_old, log(new) - log(gamma), rng):
            gamma = new
            acc_gamma += 1

        # -- retention ---------------------------------------------------
        past_burn = t + 1 - cfg.burn_in
        if past_burn > 0 and past_burn % cfg.thinning == 0:
            retained[n_kept, :m] = thetas
            retained[n_kept, m] = kappa
            retained[n_kept, m + 1] = gamma
            n_kept += 1

    model = NoiseModel(n_classes=m, samples=retained, pi=pi, config_echo=cfg)
    acceptance = {
        "class": acc_class / (total * n_obs),
        "theta": acc_theta / (total * m),
        "kappa": acc_kappa / total,
        "gamma": acc_gamma / total,
    }
    names = [f"theta_{j + 1}" for j in range(m)] + ["kappa", "gamma"]
    summaries = {}
    for col, name in enumerate(names):
        trace = retained[:, col]
        summaries[name] = {
            "mean": float(trace.mean()),
            "median": float(np.median(trace)),
            "q5": float(np.quantile(trace, 0.05)),
            "q95": float(np.quantile(trace, 0.95)),
        }
    return model, ChainDiagnostics(acceptance=acceptance, summaries=summaries)


def predictive_theta_median(model: NoiseModel) -> np.ndarray:
    """Per-class marginal posterior median of theta across retained
    samples; the point estimate used by the streaming filter."""
    return np.median(model.thetas, axis=0)


def gamma_mixture_median(kappas, gammas) -> float:
    """Median of the equal-weight mixture of Gamma(kappa_s, gamma_s)
    distributions; the predictive summary of theta under a collection of
    sampled hyperparameter pairs."""
    kappas = np.asarray(kappas, dtype=np.float64)
    gammas = np.asarray(gammas, dtype=np.float64)
    if kappas.shape != gammas.shape or kappas.size < 1:
        raise ValueError("need matching nonempty kappa/gamma arrays")
    per_medians = special.gammaincinv(kappas, 0.5) * gammas
    lo = float(per_medians.min()) * 0.5
    hi = float(per_medians.max()) * 2.0

    def mixture_cdf_minus_half(x):
        return float(np.mean(special.gammainc(kappas, x / gammas))) - 0.5

    # Component medians bracket the mixture median, but pad defensively.
    while mixture_cdf_minus_half(lo) > 0:
        lo *= 0.5
    while mixture_cdf_minus_half(hi) < 0:
        hi *= 2.0
    return float(optimize.brentq(mixture_cdf_minus_half, lo, hi, xtol=1e-10, rtol=1e-12))


def predictive_theta_mixture_median(model: NoiseModel) -> float:
    """Posterior-predictive median of theta under the model's sampled
    (kappa, gamma) pairs."""
    return gamma_mixture_median(model.kappas, model.gammas)
