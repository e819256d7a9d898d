"""Classification-error comparison of the hierarchical filter against
the consensus baselines on synthetic streams.

Protocol: a noise model is inferred once from the scenario's calibration
set (labels withheld); then, for every stream length N in the grid and
every trial, a fresh true class is drawn from the prior, N observations
are drawn from its noise level, and each method classifies the stream.
Reported error is the fraction of trials whose final label missed the
true class. Trial k of the experiment uses the derived seed
``trials_seed + k`` (k counts across the whole N grid), so trials are
independent and order-insensitive.

Two decision rules are reported for the hierarchical filter: ``hbni``
averages the normalized class posterior over all retained noise-
parameter samples before taking argmax, and ``hbni_point`` filters with
the posterior-median noise levels alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .baselines import max_of_mean, ssbf_init, ssbf_posterior, ssbf_step, vote
from .core import clamp_for_log, make_rng
from .filtering import filter_distribution
from .sampler import ChainConfig, NoiseModel, predictive_theta_median, run_chain
from .serialize import SCHEMA_VERSION, DataFormatError, dumps
from .synth import ScenarioSpec, corner_alpha, generate_scenario, sample_dirichlet

METHODS = ("mom", "vote", "ssbf", "hbni", "hbni_point")

_PROTOCOL = (
    "calibrate once on the scenario's unlabeled counts-based dataset; "
    "per (N, trial): draw true class from pi with seed trials_seed + trial_index "
    "(trial_index counts across the whole N grid), draw N observations from the "
    "true class's noise level, classify with each method, score final label; "
    "hbni = argmax of the sample-averaged class posterior, hbni_point = argmax "
    "under posterior-median noise levels"
)


@dataclass
class TrialReport:
    """Per-method, per-N classification error rates plus the bookkeeping
    needed to reproduce them."""

    n_grid: List[int]
    methods: List[str]
    errors: Dict[str, List[float]]
    trials: int
    seeds: Dict[str, int]
    protocol: str = _PROTOCOL
    wall_clock_s: Optional[Dict[str, float]] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for method, rates in self.errors.items():
            if len(rates) != len(self.n_grid):
                raise ValueError(f"errors[{method}] length != n_grid length")
            if any(not 0.0 <= r <= 1.0 for r in rates):
                raise ValueError(f"errors[{method}] outside [0, 1]")


def report_to_doc(report: TrialReport, with_timings: bool = False) -> dict:
    doc = {
        "version": SCHEMA_VERSION,
        "protocol": report.protocol,
        "trials": report.trials,
        "n_grid": list(report.n_grid),
        "methods": list(report.methods),
        "errors": {m: list(report.errors[m]) for m in report.methods},
        "seeds": dict(report.seeds),
        "wall_clock_s": dict(report.wall_clock_s) if with_timings and report.wall_clock_s else None,
    }
    return doc


def report_from_doc(doc) -> TrialReport:
    try:
        return TrialReport(
            n_grid=[int(n) for n in doc["n_grid"]],
            methods=[str(m) for m in doc["methods"]],
            errors={m: [float(r) for r in rs] for m, rs in doc["errors"].items()},
            trials=int(doc["trials"]),
            seeds={k: int(v) for k, v in doc["seeds"].items()},
            protocol=str(doc["protocol"]),
            wall_clock_s=doc.get("wall_clock_s"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed report document: {exc}") from exc


def report_to_json(report: TrialReport, with_timings: bool = False) -> str:
    return dumps(report_to_doc(report, with_timings=with_timings))


def report_to_csv(report: TrialReport) -> str:
    """Comparison table: one row per N, one error-rate column per method.
    Protocol and seeds ride along as leading comment lines."""
    lines = [f"# trials={report.trials} seeds={report.seeds}", f"# {report.protocol}"]
    lines.append(",".join(["n"] + list(report.methods)))
    for i, n in enumerate(report.n_grid):
        row = [str(n)] + [format(report.errors[m][i], ".6g") for m in report.methods]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def run_comparison(
    spec: ScenarioSpec,
    chain_cfg: ChainConfig,
    trials: int,
    n_grid,
    trials_seed: int,
    collect_labels: bool = False,
) -> Tuple[TrialReport, Optional[Dict[str, np.ndarray]]]:
    """Run the full comparison experiment.

    Returns the report and, when ``collect_labels`` is set, the raw
    per-trial predicted labels per method (shape (len(n_grid), trials))
    plus the true classes under key ``"true"``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(n < 1 for n in n_grid):
        raise ValueError("n_grid must be nonempty with N >= 1")
    if spec.counts is None:
        raise ValueError("comparison scenario must define per-class counts")

    t0 = time.perf_counter()
    calib_obs, _ = generate_scenario(spec)
    calib = np.vstack([clamp_for_log(row) for row in calib_obs])
    t1 = time.perf_counter()
    model, _ = run_chain(calib, spec.n_classes, spec.pi, chain_cfg)
    t2 = time.perf_counter()

    point_model = NoiseModel.from_point(predictive_theta_median(model), spec.pi)
    m = spec.n_classes
    labels: Dict[str, np.ndarray] = {
        name: np.zeros((len(n_grid), trials), dtype=np.int64)
        for name in (*METHODS, "true")
    }
    miss = {name: np.zeros(len(n_grid)) for name in METHODS}

    trial_index = 0
    for gi, n in enumerate(n_grid):
        for k in range(trials):
            rng = make_rng(trials_seed + trial_index)
            trial_index += 1
            true_c = int(rng.choice(m, p=spec.pi))
            alpha = corner_alpha(m, true_c, spec.thetas[true_c])
            obs = np.vstack(
                [clamp_for_log(sample_dirichlet(alpha, rng)) for _ in range(n)]
            )

            _, pred_mom = max_of_mean(obs)
            pred_vote = vote(obs)
            state = ssbf_init(spec.pi)
            for row in obs:
                state = ssbf_step(state, row)
            pred_ssbf = int(np.argmax(ssbf_posterior(state)))
            psi = filter_distribution(obs, model, spec.pi)
            pred_hbni = int(np.argmax(psi.mean(axis=0)))
            pred_point = int(np.argmax(filter_distribution(obs, point_model, spec.pi)[0]))

            preds = {
                "mom": pred_mom,
                "vote": pred_vote,
                "ssbf": pred_ssbf,
                "hbni": pred_hbni,
                "hbni_point": pred_point,
            }
            for name, pred in preds.items():
                miss[name][gi] += pred != true_c
                labels[name][gi, k] = pred
            labels["true"][gi, k] = true_c
    t3 = time.perf_counter()

    report = TrialReport(
        n_grid=n_grid,
        methods=list(METHODS),
        errors={name: list(miss[name] / trials) for name in METHODS},
        trials=trials,
        seeds={
            "scenario": spec.seed,
            "chain": chain_cfg.seed,
            "trials": trials_seed,
        },
        wall_clock_s={
            "simulate_calibration": t1 - t0,
            "infer": t2 - t1,
            "trials": t3 - t2,
        },
    )
    return report, (labels if collect_labels else None)
