"""Versioned JSON schemas and deterministic serialization.

Every JSON document carries a top-level ``"version": 1``. Floats are
emitted with 17 significant digits so parse(serialize(x)) recovers x
bit-for-bit, and key order is fixed by construction, so identical inputs
produce byte-identical files.

Formats
-------
observations   JSON lines, one per frame: {"t": <int>, "probs": [...]}
label sidecar  {"version": 1, "labels": [<1-based int>, ...]}
scenario       {"version": 1, "M", "thetas", "pi", "counts" | "schedule", "seed"}
noise model    {"version": 1, "M", "pi", "samples", "config_echo", "diagnostics"}
stream output  JSON lines: {"t", "posterior", "label", "mode"}

Class labels are 1-based in all of these; conversion to the library's
0-based indices happens here and nowhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    IO_SIMPLEX_TOL,
    HyperPriorConstants,
    label_from_external,
    label_to_external,
    validate_probvec,
)
from .sampler import ChainConfig, ChainDiagnostics, NoiseModel
from .synth import ScenarioSpec

SCHEMA_VERSION = 1


class DataFormatError(ValueError):
    """A data file does not match its schema."""


# ---------------------------------------------------------------------------
# deterministic JSON emission


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = format(x, ".17g")
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _emit(obj, parts: List[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for k, item in enumerate(obj):
            if k:
                parts.append(", ")
            _emit(item, parts)
        parts.append("]")
    elif isinstance(obj, dict):
        parts.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if k:
                parts.append(", ")
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _emit(value, parts)
        parts.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Serialize to JSON with exact float round-tripping and key order
    as constructed."""
    parts: List[str] = []
    _emit(obj, parts)
    return "".join(parts)


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# observation streams and label sidecars


def write_observations(path, obs) -> None:
    obs = np.asarray(obs, dtype=np.float64)
    with open(path, "w") as fh:
        for t, row in enumerate(obs):
            fh.write(dumps({"t": t, "probs": row}) + "\n")


def read_observations(path) -> np.ndarray:
    """Read and validate a JSON-lines observation file.

    Rows are validated with the I/O simplex tolerance (rounded classifier
    outputs are renormalized, not rejected). Returns an (N, M) array.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            doc = loads(line)
            if not isinstance(doc, dict) or "probs" not in doc:
                raise DataFormatError(f"{path}:{lineno}: expected an object with 'probs'")
            try:
                row = validate_probvec(doc["probs"], tol=IO_SIMPLEX_TOL)
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(f"{path}:{lineno}: inconsistent vector width")
            rows.append(row)
    if not rows:
        return np.empty((0, 0))
    return np.vstack(rows)


def write_labels(path, labels) -> None:
    """Write 0-based internal labels as the 1-based sidecar document."""
    doc = {"version": SCHEMA_VERSION, "labels": [label_to_external(c) for c in labels]}
    with open(path, "w") as fh:
        fh.write(dumps(doc) + "\n")


def read_labels(path, n_classes: int) -> np.ndarray:
    doc = loads(open(path).read())
    if not isinstance(doc, dict) or "labels" not in doc:
        raise DataFormatError(f"{path}: expected an object with 'labels'")
    try:
        return np.array(
            [label_from_external(c, n_classes) for c in doc["labels"]], dtype=np.int64
        )
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def stream_line(t: int, posterior: np.ndarray, label: int, mode: str) -> str:
    """One line of filter/baseline stream output (label is 0-based in,
    1-based on the wire)."""
    return dumps(
        {
            "t": int(t),
            "posterior": np.asarray(posterior, dtype=np.float64),
            "label": label_to_external(label),
            "mode": mode,
        }
    )


# ---------------------------------------------------------------------------
# scenario documents


def scenario_to_doc(spec: ScenarioSpec) -> dict:
    doc = {
        "version": SCHEMA_VERSION,
        "M": spec.n_classes,
        "thetas": list(spec.thetas),
        "pi": spec.pi,
    }
    if spec.counts is not None:
        doc["counts"] = list(spec.counts)
    else:
        doc["schedule"] = [
            {"label": label_to_external(c), "count": int(n)} for c, n in spec.schedule
        ]
    doc["seed"] = spec.seed
    return doc


def scenario_from_doc(doc) -> ScenarioSpec:
    try:
        m = int(doc["M"])
        counts = doc.get("counts")
        schedule = doc.get("schedule")
        if schedule is not None:
            schedule = tuple(
                (label_from_external(seg["label"], m), int(seg["count"])) for seg in schedule
            )
        return ScenarioSpec(
            n_classes=m,
            thetas=tuple(float(t) for t in doc["thetas"]),
            pi=np.asarray(doc["pi"], dtype=np.float64),
            counts=tuple(int(n) for n in counts) if counts is not None else None,
            schedule=schedule,
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed scenario document: {exc}") from exc


def save_scenario(path, spec: ScenarioSpec) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(scenario_to_doc(spec)) + "\n")


def load_scenario(path) -> ScenarioSpec:
    return scenario_from_doc(loads(open(path).read()))


# ---------------------------------------------------------------------------
# noise-model documents


def _config_to_doc(cfg: ChainConfig) -> dict:
    doc = {
        "total_iterations": cfg.total_iterations,
        "burn_in": cfg.burn_in,
        "thinning": cfg.thinning,
        "class_proposal_stickiness": cfg.class_proposal_stickiness,
        "logstep_theta": cfg.logstep_theta,
        "logstep_kappa": cfg.logstep_kappa,
        "logstep_gamma": cfg.logstep_gamma,
        "init_theta": cfg.init_theta,
        "init_kappa": cfg.init_kappa,
        "init_gamma": cfg.init_gamma,
        "hyperprior": asdict(cfg.hyperprior),
        "seed": cfg.seed,
    }
    return doc


def config_from_doc(doc) -> ChainConfig:
    if not isinstance(doc, dict):
        raise DataFormatError("chain config must be a JSON object")
    known = {
        "total_iterations": int,
        "burn_in": int,
        "thinning": int,
        "class_proposal_stickiness": float,
        "logstep_theta": float,
        "logstep_kappa": float,
        "logstep_gamma": float,
        "init_theta": float,
        "init_kappa": float,
        "init_gamma": float,
        "seed": int,
    }
    kwargs = {}
    try:
        for key, cast in known.items():
            if key in doc:
                kwargs[key] = cast(doc[key])
        if "hyperprior" in doc:
            kwargs["hyperprior"] = HyperPriorConstants(**{
                k: float(v) for k, v in doc["hyperprior"].items()
            })
        return ChainConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed chain config: {exc}") from exc


def model_to_doc(model: NoiseModel, diagnostics: Optional[ChainDiagnostics] = None) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "M": model.n_classes,
        "pi": model.pi,
        "samples": model.samples,
        "config_echo": _config_to_doc(model.config_echo) if model.config_echo else None,
        "diagnostics": asdict(diagnostics) if diagnostics is not None else None,
    }


def model_from_doc(doc) -> Tuple[NoiseModel, Optional[ChainDiagnostics]]:
    try:
        m = int(doc["M"])
        cfg = config_from_doc(doc["config_echo"]) if doc.get("config_echo") else None
        model = NoiseModel(
            n_classes=m,
            samples=np.asarray(doc["samples"], dtype=np.float64),
            pi=validate_probvec(doc["pi"]),
            config_echo=cfg,
        )
        diag = None
        if doc.get("diagnostics") is not None:
            diag = ChainDiagnostics(
                acceptance=doc["diagnostics"]["acceptance"],
                summaries=doc["diagnostics"]["summaries"],
            )
        return model, diag
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed model document: {exc}") from exc


def save_model(path, model: NoiseModel, diagnostics: Optional[ChainDiagnostics] = None) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model_to_doc(model, diagnostics)) + "\n")


def load_model(path) -> Tuple[NoiseModel, Optional[ChainDiagnostics]]:
    return model_from_doc(loads(open(path).read()))
