"""Model and spiking-model files: versioned JSON with exact-decimal floats.

Floats are written with 17 significant digits, which round-trips any
float64 bit-exactly.  Files are written atomically (temp file + rename),
so a reader never observes a partial document.

Document layout::

    {
      "format_version": 1,
      "spec": {...},
      "params": [{"weights": [[...]], "bias": [...]}, ...],
      "meta": {...}
    }

Separable networks store their per-axis layer stacks flattened in order;
the grouping is recovered from the spec.  Spiking files add per-layer
"theta_pos"/"theta_neg" and top-level "timesteps"/"readout".
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Sequence

import numpy as np

from .network import LayerParams, Model, NetworkSpec

FORMAT_VERSION = 1


class ModelIOError(ValueError):
    """Base class for model file problems."""


class ModelFormatError(ModelIOError):
    """File is not a parsable model document."""


class ModelVersionError(ModelIOError):
    """Document declares an unsupported format version."""


class ModelShapeError(ModelIOError):
    """Declared spec and stored arrays disagree."""


# -- writer -------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ModelFormatError("cannot serialize non-finite float")
    return f"{x:.17g}"


def _emit(obj, parts: list[str]) -> None:
    if isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(k)))
            parts.append(":")
            _emit(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _emit(v, parts)
        parts.append("]")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif obj is None:
        parts.append("null")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), parts)
    else:
        raise ModelFormatError(f"cannot serialize {type(obj).__name__}")


def dumps_document(doc: dict) -> str:
    parts: list[str] = []
    _emit(doc, parts)
    return "".join(parts)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- model documents ----------------------------------------------------


def _flat_layers(model: Model) -> list[LayerParams]:
    if model.spec.kind == "mlp":
        return list(model.params)
    return [layer for stack in model.params for layer in stack]


def _layer_dicts(layers: Sequence[LayerParams]) -> list[dict]:
    return [
        {"weights": layer.weights, "bias": layer.bias}
        for layer in layers
    ]


def save_model(model: Model, path: str) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "params": _layer_dicts(_flat_layers(model)),
        "meta": dict(model.meta),
    }
    _write_atomic(path, dumps_document(doc) + "\n")


def _parse(path: str) -> dict:
    try:
        with open(path, "r") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a parsable model document ({exc})") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"{path}: format version {version!r}, expected {FORMAT_VERSION}")
    return doc


def _read_layer(entry: dict, fan_in: int, fan_out: int, index: int) -> LayerParams:
    if not isinstance(entry, dict) or "weights" not in entry or "bias" not in entry:
        raise ModelFormatError(f"layer {index}: expected weights and bias")
    w = np.asarray(entry["weights"], dtype=np.float64)
    b = np.asarray(entry["bias"], dtype=np.float64)
    if w.shape != (fan_in, fan_out):
        raise ModelShapeError(
            f"layer {index}: weights shape {w.shape} does not match spec ({fan_in}, {fan_out})"
        )
    if b.shape != (fan_out,):
        raise ModelShapeError(
            f"layer {index}: bias shape {b.shape} does not match spec ({fan_out},)"
        )
    return LayerParams(weights=w, bias=b)


def _read_layers(doc: dict, spec: NetworkSpec):
    entries = doc.get("params")
    if not isinstance(entries, list):
        raise ModelFormatError("missing params list")
    per_stack = spec.n_layers
    n_stacks = spec.axes if spec.kind == "separable" else 1
    if len(entries) != per_stack * n_stacks:
        raise ModelShapeError(
            f"expected {per_stack * n_stacks} layers, file holds {len(entries)}"
        )
    widths = spec.layer_widths
    flat = [
        _read_layer(entries[s * per_stack + i], widths[i], widths[i + 1], s * per_stack + i)
        for s in range(n_stacks)
        for i in range(per_stack)
    ]
    if spec.kind == "mlp":
        return flat
    return [flat[s * per_stack : (s + 1) * per_stack] for s in range(n_stacks)]


def load_model(path: str) -> Model:
    doc = _parse(path)
    try:
        spec = NetworkSpec.from_dict(doc["spec"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: bad spec ({exc})") from exc
    params = _read_layers(doc, spec)
    meta = doc.get("meta") or {}
    return Model(spec=spec, params=params, meta=meta)


# -- spiking documents ----------------------------------------------------


def save_snn(snn, path: str) -> None:
    """Serialize a spiking network (plain or separable)."""

    def layer_entry(layer):
        return {
            "weights": layer.weights,
            "bias": layer.bias,
            "theta_pos": layer.theta_pos,
            "theta_neg": layer.theta_neg,
        }

    if hasattr(snn, "subnets"):
        layers = [layer for sub in snn.subnets for layer in sub.layers]
        timesteps = snn.subnets[0].timesteps
        readout = snn.subnets[0].readout
    else:
        layers = list(snn.layers)
        timesteps = snn.timesteps
        readout = snn.readout
    doc = {
        "format_version": FORMAT_VERSION,
        "spec": snn.spec.to_dict(),
        "timesteps": int(timesteps),
        "readout": readout,
        "params": [layer_entry(layer) for layer in layers],
        "meta": dict(getattr(snn, "meta", {}) or {}),
    }
    _write_atomic(path, dumps_document(doc) + "\n")


def load_snn(path: str):
    from .snn import SpikingLayer, SpikingNetwork, SpikingSeparable

    doc = _parse(path)
    try:
        spec = NetworkSpec.from_dict(doc["spec"])
        timesteps = int(doc["timesteps"])
        readout = str(doc["readout"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: bad spiking header ({exc})") from exc
    stacks = _read_layers(doc, spec)
    entries = doc["params"]

    def build(stack, offset):
        layers = []
        for i, lp in enumerate(stack):
            entry = entries[offset + i]
            try:
                tp = float(entry["theta_pos"])
                tn = float(entry["theta_neg"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelFormatError(f"{path}: layer {offset + i} lacks thresholds") from exc
            layers.append(
                SpikingLayer(
                    weights=lp.weights,
                    bias=lp.bias,
                    theta_pos=tp,
                    theta_neg=tn,
                    is_output=(i == len(stack) - 1),
                )
            )
        return SpikingNetwork(spec=spec, layers=layers, timesteps=timesteps, readout=readout)

    meta = doc.get("meta") or {}
    if spec.kind == "mlp":
        net = build(stacks, 0)
        net.meta = meta
        return net
    subnets = [build(stack, s * spec.n_layers) for s, stack in enumerate(stacks)]
    sep = SpikingSeparable(spec=spec, subnets=subnets)
    sep.meta = meta
    return sep
