"""Layer-wise conversion-error decomposition and calibration.

For layer l with activation f, original weights W and (possibly adjusted)
spiking weights W^:

    e   = f(W x)  - snn_out          total layer error
    e_r = f(W x)  - f(W s)           drift inherited from upstream layers
    e_c = f(W s)  - snn_out          local quantization error

with x the ANN layer input, s the averaged spiking input, and
snn_out = stair(f(W^ s)) the quantized activation.  The decomposition
e = e_r + e_c is an algebraic identity and holds to the last bit.

Light calibration shifts each bias by the batch-mean output gap against
the ANN path.  Advanced calibration runs a small Adam loop per layer on
the local error ||e_c||^2, passing gradients through the staircase with a
straight-through estimator (identity inside the threshold window, zero
outside, chained with f') and keeping the best parameters seen, so the
per-layer local error never ends up above its starting value.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .network import ACTIVATION_D1, ACTIVATIONS_NP, Model, stack_forward
from .optim import AdamState, OptimizerConfig, adam_step
from .snn import SpikingNetwork, SpikingSeparable, clip_floor, propagate_rate


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


@dataclass
class ErrorDecomposition:
    e: list[np.ndarray]
    e_r: list[np.ndarray]
    e_c: list[np.ndarray]

    @property
    def e_norms(self) -> list[float]:
        return [_rms(v) for v in self.e]

    @property
    def er_norms(self) -> list[float]:
        return [_rms(v) for v in self.e_r]

    @property
    def ec_norms(self) -> list[float]:
        return [_rms(v) for v in self.e_c]


@dataclass
class CalibrationConfig:
    mode: str = "advanced"  # none | light | advanced
    steps: int = 2000
    lr: float = 1e-3


@dataclass
class CalibrationReport:
    mode: str
    layers: list[str] = field(default_factory=list)
    pre_ec_norm: list[float] = field(default_factory=list)
    post_ec_norm: list[float] = field(default_factory=list)
    seconds: float = 0.0

    def add(self, label: str, pre: float, post: float) -> None:
        self.layers.append(label)
        self.pre_ec_norm.append(pre)
        self.post_ec_norm.append(post)


def _check_aligned(ann: Model, snn: SpikingNetwork) -> None:
    if isinstance(ann.params[0], list):
        raise ValueError("expected a flat MLP layer stack; separable nets calibrate per subnet")
    if len(ann.params) != len(snn.layers):
        raise ValueError("ANN and SNN layer counts differ")
    for i, (a, s) in enumerate(zip(ann.params, snn.layers)):
        if a.weights.shape != s.weights.shape:
            raise ValueError(f"layer {i}: weight shapes differ")


def _snn_layer_out(snn: SpikingNetwork, layer, z_hat: np.ndarray) -> np.ndarray:
    if layer.is_output:
        if snn.readout == "membrane_average":
            return z_hat
        return clip_floor(z_hat, snn.timesteps, layer.theta_pos, layer.theta_neg)
    act = ACTIVATIONS_NP[snn.spec.activation]
    return clip_floor(act(z_hat), snn.timesteps, layer.theta_pos, layer.theta_neg)


def decompose_error(ann: Model, snn: SpikingNetwork, data: np.ndarray) -> ErrorDecomposition:
    """Per-layer e, e_r, e_c on a batch; e = e_r + e_c exactly."""
    _check_aligned(ann, snn)
    batch = np.asarray(data, dtype=np.float64)
    act = ACTIVATIONS_NP[ann.spec.activation]
    _, _, xs = stack_forward(ann.params, ann.spec.activation, batch, collect=True)
    _, sbars = propagate_rate(snn, batch)
    n = len(ann.params)
    es, ers, ecs = [], [], []
    for i, (a_layer, s_layer) in enumerate(zip(ann.params, snn.layers)):
        z_on_x = xs[i] @ a_layer.weights + a_layer.bias
        z_on_s = sbars[i] @ a_layer.weights + a_layer.bias
        z_hat = sbars[i] @ s_layer.weights + s_layer.bias
        if i == n - 1:
            f_on_x, f_on_s = z_on_x, z_on_s
        else:
            f_on_x, f_on_s = act(z_on_x), act(z_on_s)
        s_out = _snn_layer_out(snn, s_layer, z_hat)
        e_r = f_on_x - f_on_s
        e_c = f_on_s - s_out
        es.append(f_on_x - s_out)
        ers.append(e_r)
        ecs.append(e_c)
    return ErrorDecomposition(e=es, e_r=ers, e_c=ecs)


def _local_error(
    snn: SpikingNetwork, a_layer, s_layer, sbar: np.ndarray, act, is_last: bool
) -> np.ndarray:
    """e_c for one layer given its averaged spiking input."""
    z_on_s = sbar @ a_layer.weights + a_layer.bias
    target = z_on_s if is_last else act(z_on_s)
    z_hat = sbar @ s_layer.weights + s_layer.bias
    return target - _snn_layer_out(snn, s_layer, z_hat)


# -- light: bias-only ------------------------------------------------------


def calibrate_light(
    ann: Model, snn: SpikingNetwork, data: np.ndarray
) -> tuple[SpikingNetwork, CalibrationReport]:
    """Shift each bias by the batch-mean gap against the ANN-path output.

    Layers are processed first to last and the averaged spiking input is
    recomputed after each adjustment.  The input network is not modified.
    """
    _check_aligned(ann, snn)
    batch = np.asarray(data, dtype=np.float64)
    if batch.size == 0:
        raise ValueError("calibration batch is empty")
    started = time.perf_counter()
    out = snn.copy()
    act = ACTIVATIONS_NP[ann.spec.activation]
    _, _, xs = stack_forward(ann.params, ann.spec.activation, batch, collect=True)
    report = CalibrationReport(mode="light")
    n = len(out.layers)
    sbar = batch
    for i, (a_layer, s_layer) in enumerate(zip(ann.params, out.layers)):
        is_last = i == n - 1
        pre = _rms(_local_error(out, a_layer, s_layer, sbar, act, is_last))
        z_on_x = xs[i] @ a_layer.weights + a_layer.bias
        ann_out = z_on_x if is_last else act(z_on_x)
        z_hat = sbar @ s_layer.weights + s_layer.bias
        cur = _snn_layer_out(out, s_layer, z_hat)
        s_layer.bias += np.mean(ann_out - cur, axis=0)
        z_hat = sbar @ s_layer.weights + s_layer.bias
        cur = _snn_layer_out(out, s_layer, z_hat)
        post = _rms(_local_error(out, a_layer, s_layer, sbar, act, is_last))
        report.add(str(i), pre, post)
        sbar = cur
    report.seconds = time.perf_counter() - started
    return out, report


# -- advanced: weights and biases ------------------------------------------


def _ste_minimize(
    snn: SpikingNetwork, s_layer, target: np.ndarray, sbar: np.ndarray, cfg: CalibrationConfig
) -> tuple[float, float]:
    """Adam on ||target - stair(f(sbar @ W + b))||^2 with an STE backward.

    The staircase passes gradient unchanged where its input lies inside
    the threshold window and blocks it outside; the activation contributes
    its true derivative.  Keeps the best parameters seen, so the returned
    post error never exceeds the pre error.
    """
    w = s_layer.weights
    b = s_layer.bias
    is_plain_output = s_layer.is_output and snn.readout == "membrane_average"
    if s_layer.is_output:
        act = act_d1 = None
    else:
        act = ACTIVATIONS_NP[snn.spec.activation]
        act_d1 = ACTIVATION_D1[snn.spec.activation]

    def forward(weights, bias):
        z_hat = sbar @ weights + bias
        if is_plain_output:
            return z_hat, np.ones_like(z_hat)
        v = z_hat if s_layer.is_output else act(z_hat)
        out = clip_floor(v, snn.timesteps, s_layer.theta_pos, s_layer.theta_neg)
        gate = ((v >= s_layer.theta_neg) & (v <= s_layer.theta_pos)).astype(np.float64)
        if not s_layer.is_output:
            gate = gate * act_d1(z_hat)
        return out, gate

    out, gate = forward(w, b)
    pre = _rms(target - out)
    if pre == 0.0:
        return pre, pre
    best = pre
    best_w, best_b = w.copy(), b.copy()
    state = AdamState.for_params([w, b], OptimizerConfig(lr=cfg.lr))
    scale = 2.0 / target.size
    for _ in range(cfg.steps):
        dz = scale * (out - target) * gate  # d mean((out-target)^2) / dz under STE
        gw = sbar.T @ dz
        gb = dz.sum(axis=0)
        adam_step([w, b], [gw, gb], state)
        out, gate = forward(w, b)
        err = _rms(target - out)
        if err < best:
            best = err
            best_w, best_b = w.copy(), b.copy()
    w[...] = best_w
    b[...] = best_b
    return pre, best


def calibrate_advanced(
    ann: Model,
    snn: SpikingNetwork,
    data: np.ndarray,
    cfg: CalibrationConfig | None = None,
) -> tuple[SpikingNetwork, CalibrationReport]:
    """Per-layer minimization of the local error over weights and biases."""
    cfg = cfg or CalibrationConfig(mode="advanced")
    if cfg.steps <= 0:
        raise ValueError("advanced calibration needs a positive step count")
    _check_aligned(ann, snn)
    batch = np.asarray(data, dtype=np.float64)
    if batch.size == 0:
        raise ValueError("calibration batch is empty")
    started = time.perf_counter()
    out = snn.copy()
    act = ACTIVATIONS_NP[ann.spec.activation]
    report = CalibrationReport(mode="advanced")
    n = len(out.layers)
    sbar = batch
    for i, (a_layer, s_layer) in enumerate(zip(ann.params, out.layers)):
        is_last = i == n - 1
        z_on_s = sbar @ a_layer.weights + a_layer.bias
        target = z_on_s if is_last else act(z_on_s)
        pre, post = _ste_minimize(out, s_layer, target, sbar, cfg)
        report.add(str(i), pre, post)
        z_hat = sbar @ s_layer.weights + s_layer.bias
        sbar = _snn_layer_out(out, s_layer, z_hat)
    report.seconds = time.perf_counter() - started
    return out, report


# -- separable dispatch ------------------------------------------------------


def calibrate_separable(
    ann: Model,
    snn: SpikingSeparable,
    axis_data,
    mode: str,
    cfg: CalibrationConfig | None = None,
) -> tuple[SpikingSeparable, CalibrationReport]:
    """Calibrate each per-axis subnetwork against its ANN counterpart."""
    if ann.spec.kind != "separable":
        raise ValueError("calibrate_separable expects a separable model")
    out = snn.copy()
    report = CalibrationReport(mode=mode)
    started = time.perf_counter()
    for axis, subnet in enumerate(out.subnets):
        col = np.asarray(axis_data[axis], dtype=np.float64).reshape(-1, 1)
        sub_ann = Model(spec=ann.spec, params=ann.params[axis], meta={})
        if mode == "light":
            calibrated, sub_report = calibrate_light(sub_ann, subnet, col)
        else:
            calibrated, sub_report = calibrate_advanced(sub_ann, subnet, col, cfg)
        out.subnets[axis] = calibrated
        for label, pre, post in zip(
            sub_report.layers, sub_report.pre_ec_norm, sub_report.post_ec_norm
        ):
            report.add(f"axis{axis}.{label}", pre, post)
    report.seconds = time.perf_counter() - started
    return out, report
