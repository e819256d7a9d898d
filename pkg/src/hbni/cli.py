"""Command-line harness: simulate data, infer a noise model, filter
observation streams, and run the method-comparison experiment.

    hbni simulate SCENARIO --out obs.jsonl [--seed N]
    hbni infer OBS --out model.json [--config chain.json] [--seed N]
    hbni filter OBS MODEL [--mode hbni|mom|vote|ssbf] [--window W]
    hbni compare SCENARIO --out report.csv [--config chain.json]
                 [--trials T] [--n-grid SPEC] [--seed N] [--timings]

Exit codes: 0 success, 1 usage/config error, 2 data error. All commands
are deterministic for a fixed seed and config: files and stdout are
byte-identical across reruns; timing diagnostics go to stderr (or into
the compare report only when --timings is passed).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import baselines, filtering, serialize
from .compare import report_to_csv, report_to_json, run_comparison
from .core import clamp_for_log, uniform_prior, validate_probvec
from .sampler import ChainConfig, predictive_theta_median, run_chain
from .synth import generate_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2

MODES = ("hbni", "mom", "vote", "ssbf")


class _ConfigError(Exception):
    pass


class _DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hbni", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset from a scenario file")
    p.add_argument("scenario", help="scenario JSON path")
    p.add_argument("--out", required=True, help="observations output path (JSON lines)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p = sub.add_parser("infer", help="run the MH chain on an observation file")
    p.add_argument("obs", help="observations path (JSON lines)")
    p.add_argument("--out", required=True, help="noise-model output path (JSON)")
    p.add_argument("--config", default=None, help="chain config JSON path")
    p.add_argument("--seed", type=int, default=None, help="override the chain seed")

    p = sub.add_parser("filter", help="filter a stream into per-frame posteriors")
    p.add_argument("obs", help="observations path (JSON lines)")
    p.add_argument("model", help="noise-model path (JSON)")
    p.add_argument("--mode", choices=MODES, default="hbni")
    p.add_argument("--window", type=int, default=None,
                   help="only use the last W frames (default: full history)")

    p = sub.add_parser("compare", help="classification-error comparison across methods")
    p.add_argument("scenario", help="scenario JSON path (calibration + trial generator)")
    p.add_argument("--out", required=True, help="CSV table output path")
    p.add_argument("--config", default=None, help="chain config JSON path")
    p.add_argument("--trials", type=int, default=200, help="trials per N (default 200)")
    p.add_argument("--n-grid", default="1-15",
                   help="stream lengths: 'a-b' range or comma list (default 1-15)")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed for trial streams (default: scenario seed + 1)")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings in the JSON report (non-reproducible)")
    return parser


def _load_scenario(path):
    try:
        return serialize.load_scenario(path)
    except (OSError, ValueError) as exc:
        raise _ConfigError(f"cannot load scenario {path}: {exc}") from exc


def _load_chain_config(path, seed_override) -> ChainConfig:
    try:
        cfg = serialize.config_from_doc(serialize.loads(open(path).read())) if path else ChainConfig()
    except (OSError, ValueError) as exc:
        raise _ConfigError(f"cannot load chain config {path}: {exc}") from exc
    if seed_override is not None:
        cfg = replace(cfg, seed=seed_override)
    return cfg


def _load_prior(config_path, n_classes):
    # optional "pi" entry in the chain config file; uniform otherwise
    if config_path:
        doc = serialize.loads(open(config_path).read())
        if isinstance(doc, dict) and "pi" in doc:
            pi = validate_probvec(doc["pi"])
            if len(pi) != n_classes:
                raise _ConfigError(f"prior width {len(pi)} != observation width {n_classes}")
            return pi
    return uniform_prior(n_classes)


def _read_observations(path) -> np.ndarray:
    try:
        obs = serialize.read_observations(path)
    except (OSError, ValueError) as exc:
        raise _DataError(f"cannot read observations {path}: {exc}") from exc
    return obs


def _parse_n_grid(text):
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            grid = list(range(int(lo), int(hi) + 1))
        else:
            grid = [int(tok) for tok in text.split(",") if tok]
        if not grid or any(n < 1 for n in grid):
            raise ValueError("grid entries must be >= 1")
        return grid
    except ValueError as exc:
        raise _ConfigError(f"bad --n-grid {text!r}: {exc}") from exc


def cmd_simulate(args) -> int:
    spec = _load_scenario(args.scenario)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    obs, labels = generate_scenario(spec)
    serialize.write_observations(args.out, obs)
    serialize.write_labels(args.out + ".labels.json", labels)
    print(f"wrote {len(obs)} observations to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_infer(args) -> int:
    obs = _read_observations(args.obs)
    if obs.size == 0:
        raise _DataError(f"{args.obs}: no observations")
    cfg = _load_chain_config(args.config, args.seed)
    n_classes = obs.shape[1]
    pi = _load_prior(args.config, n_classes)
    distinct = len(np.unique(obs, axis=0))
    if distinct < n_classes:
        print(
            f"warning: only {distinct} distinct frames for {n_classes} classes; "
            "inference may be weakly identified",
            file=sys.stderr,
        )
    clamped = np.vstack([clamp_for_log(row) for row in obs])
    try:
        model, diag = run_chain(clamped, n_classes, pi, cfg)
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc
    serialize.save_model(args.out, model, diag)

    kept = model.samples.shape[0]
    print(f"observations={len(obs)} classes={n_classes} retained_samples={kept}")
    acc = " ".join(f"{k}={v:.4f}" for k, v in diag.acceptance.items())
    print(f"acceptance: {acc}")
    for name, s in diag.summaries.items():
        print(
            f"{name}: median={s['median']:.6g} mean={s['mean']:.6g} "
            f"q5={s['q5']:.6g} q95={s['q95']:.6g}"
        )
    return EXIT_OK


def _windowed(rows, t, window):
    start = 0 if window is None else max(0, t + 1 - window)
    return rows[start: t + 1]


def cmd_filter(args) -> int:
    try:
        model, _ = serialize.load_model(args.model)
    except (OSError, ValueError) as exc:
        raise _DataError(f"cannot load model {args.model}: {exc}") from exc
    obs = _read_observations(args.obs)
    if obs.size == 0:
        return EXIT_OK
    if obs.shape[1] != model.n_classes:
        raise _DataError(
            f"observation width {obs.shape[1]} != model classes {model.n_classes}"
        )
    if args.window is not None and args.window < 1:
        raise _ConfigError("--window must be >= 1")
    clamped = np.vstack([clamp_for_log(row) for row in obs])
    pi = model.pi
    out = sys.stdout

    if args.mode == "hbni":
        point = predictive_theta_median(model)
        state = filtering.filter_init(pi, window_size=args.window)
        for t, row in enumerate(clamped):
            state = filtering.filter_step(state, row, point)
            posterior = filtering.filter_posterior(state)
            out.write(serialize.stream_line(t, posterior, int(np.argmax(posterior)), "hbni") + "\n")
    elif args.mode == "ssbf":
        if args.window is None:
            state = baselines.ssbf_init(pi)
            for t, row in enumerate(clamped):
                state = baselines.ssbf_step(state, row)
                posterior = baselines.ssbf_posterior(state)
                out.write(serialize.stream_line(t, posterior, int(np.argmax(posterior)), "ssbf") + "\n")
        else:
            for t in range(len(clamped)):
                state = baselines.ssbf_init(pi)
                for row in _windowed(clamped, t, args.window):
                    state = baselines.ssbf_step(state, row)
                posterior = baselines.ssbf_posterior(state)
                out.write(serialize.stream_line(t, posterior, int(np.argmax(posterior)), "ssbf") + "\n")
    elif args.mode == "mom":
        for t in range(len(clamped)):
            mean, label = baselines.max_of_mean(_windowed(clamped, t, args.window))
            out.write(serialize.stream_line(t, mean, label, "mom") + "\n")
    else:  # vote
        for t in range(len(clamped)):
            counts = baselines.vote_counts(_windowed(clamped, t, args.window))
            label = int(np.argmax(counts))
            out.write(serialize.stream_line(t, counts / counts.sum(), label, "vote") + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = _load_scenario(args.scenario)
    cfg = _load_chain_config(args.config, None)
    if args.trials < 1:
        raise _ConfigError("--trials must be >= 1")
    n_grid = _parse_n_grid(args.n_grid)
    trials_seed = args.seed if args.seed is not None else spec.seed + 1
    try:
        report, _ = run_comparison(spec, cfg, args.trials, n_grid, trials_seed)
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc
    with open(args.out, "w") as fh:
        fh.write(report_to_csv(report))
    print(report_to_json(report, with_timings=args.timings))
    wc = report.wall_clock_s
    print(
        "timings[s]: " + " ".join(f"{k}={v:.3f}" for k, v in wc.items()),
        file=sys.stderr,
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "infer": cmd_infer,
        "filter": cmd_filter,
        "compare": cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
