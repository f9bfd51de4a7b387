"""Network architectures: plain MLPs and separable (per-axis) networks.

A separable network keeps one small MLP per input axis.  Each subnetwork
maps its 1-D coordinate to ``rank * n_out`` features; the field on a grid
is the rank-summed product of the per-axis features,

    out(x_1..x_d)[o] = sum_k  prod_a  m_a(x_a)[k, o],

so a d-dimensional grid costs d cheap 1-D batches plus one contraction
instead of one forward pass per grid point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .jets import JET_ACTIVATIONS, Jet2, jet_affine, jet_batch
from .tensor import Tensor

ACTIVATIONS_NP = {
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
    "sin": np.sin,
}

# First and second derivatives, used by calibration and curvature analysis.
ACTIVATION_D1 = {
    "tanh": lambda z: 1.0 - np.tanh(z) ** 2,
    "relu": lambda z: (z > 0.0).astype(np.float64),
    "sin": np.cos,
}
ACTIVATION_D2 = {
    "tanh": lambda z: -2.0 * np.tanh(z) * (1.0 - np.tanh(z) ** 2),
    "relu": lambda z: np.zeros_like(z),
    "sin": lambda z: -np.sin(z),
}


def _apply_activation(name: str, z):
    if isinstance(z, Tensor):
        if name == "tanh":
            return z.tanh()
        if name == "relu":
            return z.relu()
        if name == "sin":
            return z.sin()
        raise ValueError(f"unsupported activation {name!r}")
    try:
        return ACTIVATIONS_NP[name](z)
    except KeyError:
        raise ValueError(f"unsupported activation {name!r}") from None


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description.

    ``layer_widths`` runs input to output for an MLP.  For a separable
    network it describes one subnetwork (input width 1, final width
    ``rank * n_out``) replicated across ``axes`` input axes.
    """

    kind: str  # "mlp" | "separable"
    layer_widths: tuple[int, ...]
    activation: str = "tanh"
    axes: int = 1
    rank: int = 32
    n_out: int = 1

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if self.kind not in ("mlp", "separable"):
            raise ValueError(f"unknown network kind {self.kind!r}")
        if self.activation not in ACTIVATIONS_NP:
            raise ValueError(f"unsupported activation {self.activation!r}")
        if len(self.layer_widths) < 3:
            raise ValueError("need at least one hidden layer")
        if any(w <= 0 for w in self.layer_widths):
            raise ValueError("zero-width layer")
        if self.kind == "separable":
            if self.axes < 2:
                raise ValueError("separable networks need at least two axes")
            if self.layer_widths[0] != 1:
                raise ValueError("separable subnetworks take one coordinate each")
            if self.layer_widths[-1] != self.rank * self.n_out:
                raise ValueError(
                    f"subnetwork must end in rank*n_out = {self.rank * self.n_out} features, "
                    f"got {self.layer_widths[-1]}"
                )

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def input_dim(self) -> int:
        return self.axes if self.kind == "separable" else self.layer_widths[0]

    @property
    def output_dim(self) -> int:
        return self.n_out if self.kind == "separable" else self.layer_widths[-1]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "layer_widths": list(self.layer_widths),
            "activation": self.activation,
            "axes": self.axes,
            "rank": self.rank,
            "n_out": self.n_out,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        return cls(
            kind=d["kind"],
            layer_widths=tuple(d["layer_widths"]),
            activation=d.get("activation", "tanh"),
            axes=int(d.get("axes", 1)),
            rank=int(d.get("rank", 32)),
            n_out=int(d.get("n_out", 1)),
        )


@dataclass
class LayerParams:
    weights: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)


# MLP params: list[LayerParams]; separable params: list per axis of list[LayerParams].
Params = list


@dataclass
class Model:
    """Trained network: spec, parameters and free-form training metadata."""

    spec: NetworkSpec
    params: Params
    meta: dict = field(default_factory=dict)


def _init_stack(widths: Sequence[int], rng: np.random.Generator) -> list[LayerParams]:
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append(LayerParams(weights=w, bias=np.zeros(fan_out)))
    return layers


def init_params(spec: NetworkSpec, seed: int) -> Params:
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    rng = np.random.default_rng(seed)
    if spec.kind == "mlp":
        return _init_stack(spec.layer_widths, rng)
    return [_init_stack(spec.layer_widths, rng) for _ in range(spec.axes)]


def _check_batch(spec: NetworkSpec, batch: np.ndarray, widths: Sequence[int]) -> None:
    if batch.ndim != 2 or batch.shape[1] != widths[0]:
        raise ValueError(
            f"batch shape {batch.shape} does not match input width {widths[0]}"
        )


def stack_forward(
    layers: Sequence, activation: str, batch, collect: bool = False
):
    """Forward a layer stack; last layer stays affine.

    Works on numpy arrays or Tensors.  With ``collect=True`` also returns
    the pre-activations ``z`` per layer and the layer inputs ``x`` (index 0
    is the batch itself), which calibration needs.
    """
    x = batch
    zs, xs = [], [x]
    n = len(layers)
    for i, layer in enumerate(layers):
        z = x @ layer.weights + layer.bias
        zs.append(z)
        if i < n - 1:
            x = _apply_activation(activation, z)
            xs.append(x)
        else:
            x = z
    if collect:
        return x, zs, xs
    return x


def mlp_forward(spec: NetworkSpec, params: Params, batch, collect: bool = False):
    if spec.kind != "mlp":
        raise ValueError("mlp_forward needs an mlp spec")
    b = batch.data if isinstance(batch, Tensor) else np.asarray(batch, dtype=np.float64)
    _check_batch(spec, b, spec.layer_widths)
    return stack_forward(params, spec.activation, batch, collect=collect)


def stack_jet_forward(layers: Sequence, activation: str, jet: Jet2) -> Jet2:
    """Push a seeded jet through the stack (last layer affine)."""
    act = JET_ACTIVATIONS.get(activation)
    if act is None:
        raise ValueError(f"activation {activation!r} has no jet rule")
    n = len(layers)
    for i, layer in enumerate(layers):
        jet = jet_affine(jet, layer.weights, layer.bias)
        if i < n - 1:
            jet = act(jet)
    return jet


def jet2_forward(
    spec: NetworkSpec, params: Params, points: np.ndarray, coordinate_index: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Network output and its first/second partials w.r.t. one coordinate.

    Returns (value, d1, d2), each shaped (n_points, output_dim).
    """
    if spec.kind != "mlp":
        raise ValueError("jet2_forward operates on mlp specs; separable nets use factor jets")
    pts = np.asarray(points, dtype=np.float64)
    _check_batch(spec, pts, spec.layer_widths)
    jet = stack_jet_forward(params, spec.activation, jet_batch(pts, coordinate_index))
    return jet.value, jet.d1, jet.d2


def _factor(field_like, n_points: int, rank: int, n_out: int):
    return field_like.reshape((n_points, rank, n_out))


def separable_factors(
    spec: NetworkSpec, params: Params, axis_points: Sequence[np.ndarray], order: int = 0
) -> list:
    """Per-axis subnetwork features, reshaped to (n_a, rank, n_out).

    ``order`` 0 returns plain feature arrays, 1/2 returns Jet2 factors with
    derivatives w.r.t. the axis coordinate.
    """
    if spec.kind != "separable":
        raise ValueError("separable_factors needs a separable spec")
    if len(axis_points) != spec.axes:
        raise ValueError(f"expected {spec.axes} axis point sets, got {len(axis_points)}")
    factors = []
    for axis, (layers, pts) in enumerate(zip(params, axis_points)):
        col = np.asarray(pts, dtype=np.float64).reshape(-1, 1)
        n = col.shape[0]
        if order == 0:
            feat = stack_forward(layers, spec.activation, col)
            factors.append(_factor(feat, n, spec.rank, spec.n_out))
        else:
            jet = stack_jet_forward(layers, spec.activation, jet_batch(col, 0))
            factors.append(
                Jet2(
                    _factor(jet.value, n, spec.rank, spec.n_out),
                    _factor(jet.d1, n, spec.rank, spec.n_out),
                    _factor(jet.d2, n, spec.rank, spec.n_out),
                )
            )
    return factors


def contract_factors(factors: Sequence, derivative_axis: int | None = None, order: int = 0):
    """Rank-summed outer product of per-axis factors.

    ``factors`` may be plain arrays or Jet2 factors; choosing
    ``derivative_axis`` picks that axis's d1/d2 component (others contribute
    values), which yields the grid of the corresponding partial derivative.
    Output shape: (n_1, ..., n_d, n_out).
    """
    d = len(factors)
    prod = None
    for axis, f in enumerate(factors):
        comp = f
        if isinstance(f, Jet2):
            if axis == derivative_axis:
                comp = (f.value, f.d1, f.d2)[order]
            else:
                comp = f.value
        n_a = comp.shape[0]
        shape = [1] * d + [comp.shape[1], comp.shape[2]]
        shape[axis] = n_a
        comp = comp.reshape(tuple(shape))
        prod = comp if prod is None else prod * comp
    return prod.sum(axis=d)


def spinn_forward(spec: NetworkSpec, params: Params, axis_points: Sequence[np.ndarray]):
    """Evaluate a separable network on the tensor grid of the axis points."""
    return contract_factors(separable_factors(spec, params, axis_points))


def spinn_point_forward(spec: NetworkSpec, params: Params, points: np.ndarray) -> np.ndarray:
    """Dense per-point evaluation of a separable network (reference path)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != spec.axes:
        raise ValueError(f"points shape {pts.shape} does not match {spec.axes} axes")
    prod = None
    for axis, layers in enumerate(params):
        feat = stack_forward(layers, spec.activation, pts[:, axis : axis + 1])
        feat = feat.reshape(pts.shape[0], spec.rank, spec.n_out)
        prod = feat if prod is None else prod * feat
    return prod.sum(axis=1)
