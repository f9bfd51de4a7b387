"""Spiking conversion core: staircase quantizer, thresholds, IF dynamics.

A converted hidden layer emits the signed, clipped staircase of its
activation output:

    sbar = stair(f(W sbar_prev + b)),    stair(v) = floor(v T/theta) theta/T

clipped at the thresholds on both sides.  For ReLU this is exactly the
classic clipped-floor conversion staircase; for tanh or sine the steps
ride the activation curve, and the quantization error per entry is at
most theta/T.  Thresholds therefore live in activation-output units,
which is why they are fitted to quantiles of f(z) on a batch.

Hidden state is exchanged in rate units: a neuron that fires k positive
spikes over T steps contributes k*theta_pos/T, one firing k negative
spikes contributes k*theta_neg/T.  Under constant per-step drive the
integrate-and-fire average lands exactly on the staircase, which is what
rate mode computes in closed form.

Event simulation supports two feeds:

* ``layerwise`` (default): every layer receives its averaged input as a
  constant current, the regime in which IF dynamics and the staircase
  agree exactly, so the event path reproduces rate mode to rounding.
* ``streaming``: spikes propagate step by step and each neuron drives its
  membrane with the activation of its instantaneous input.  Membrane
  residue, the one-spike-per-step cap and the nonlinearity acting on a
  fluctuating signal make deeper layers deviate from the staircase
  composition; this is the temporal ground truth, not the rate model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .network import (
    ACTIVATIONS_NP,
    LayerParams,
    Model,
    NetworkSpec,
    stack_forward,
)

THRESHOLD_FLOOR = 1e-6


def _check_thresholds(theta_pos: float, theta_neg: float) -> None:
    if not (theta_neg < 0.0 < theta_pos):
        raise ValueError(f"need theta_neg < 0 < theta_pos, got ({theta_pos}, {theta_neg})")


def clip_floor(z, timesteps: int, theta_pos: float, theta_neg: float):
    """Signed floor-toward-zero staircase, clipped at the thresholds.

    z >= 0 maps to min(floor(z*T/theta_pos), T) * theta_pos / T and the
    negative side mirrors with theta_neg.  Scalar in, scalar out.
    """
    if timesteps < 1:
        raise ValueError("timesteps must be >= 1")
    _check_thresholds(theta_pos, theta_neg)
    arr = np.asarray(z, dtype=np.float64)
    pos = np.minimum(np.floor(arr * timesteps / theta_pos), timesteps) * theta_pos / timesteps
    mag = np.minimum(np.floor(arr * timesteps / theta_neg), timesteps)
    neg = mag * theta_neg / timesteps
    out = np.where(arr >= 0.0, pos, neg)
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


@dataclass
class SpikingLayer:
    weights: np.ndarray
    bias: np.ndarray
    theta_pos: float
    theta_neg: float
    is_output: bool = False

    def __post_init__(self):
        _check_thresholds(self.theta_pos, self.theta_neg)


@dataclass
class SpikingNetwork:
    spec: NetworkSpec
    layers: list[SpikingLayer]
    timesteps: int
    readout: str = "membrane_average"  # or "quantized"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")
        if self.readout not in ("membrane_average", "quantized"):
            raise ValueError(f"unknown readout {self.readout!r}")
        for a, b in zip(self.layers[:-1], self.layers[1:]):
            if a.weights.shape[1] != b.weights.shape[0]:
                raise ValueError("layer chain is not shape-consistent")

    def copy(self) -> "SpikingNetwork":
        return SpikingNetwork(
            spec=self.spec,
            layers=[
                SpikingLayer(
                    weights=l.weights.copy(),
                    bias=l.bias.copy(),
                    theta_pos=l.theta_pos,
                    theta_neg=l.theta_neg,
                    is_output=l.is_output,
                )
                for l in self.layers
            ],
            timesteps=self.timesteps,
            readout=self.readout,
            meta=dict(self.meta),
        )


@dataclass
class SpikingSeparable:
    """One spiking subnetwork per input axis; outputs combine by rank-summed products."""

    spec: NetworkSpec
    subnets: list[SpikingNetwork]
    meta: dict = field(default_factory=dict)

    @property
    def timesteps(self) -> int:
        return self.subnets[0].timesteps

    @property
    def readout(self) -> str:
        return self.subnets[0].readout

    def copy(self) -> "SpikingSeparable":
        return SpikingSeparable(
            spec=self.spec, subnets=[s.copy() for s in self.subnets], meta=dict(self.meta)
        )


@dataclass
class SimulationTrace:
    """Per-layer spike rasters over T steps plus their averaged read-outs."""

    spikes: list[np.ndarray]  # (T, n, width) in {-1, 0, +1}; hidden layers
    sbar: list[np.ndarray]  # averaged outputs per hidden layer
    nonzero_fraction: list[float]
    output: np.ndarray
    feed: str


@dataclass(frozen=True)
class ThresholdPolicy:
    """Quantile of the activation-output magnitudes used per side (1.0 = max)."""

    q: float = 1.0
    floor: float = THRESHOLD_FLOOR


def fit_thresholds(
    spec: NetworkSpec, params, batch: np.ndarray, policy: ThresholdPolicy | None = None
) -> list[tuple[float, float]]:
    """Per-layer (theta_pos, theta_neg) from activation outputs on a batch.

    Hidden layers take the q-quantile of the positive outputs (and the
    mirrored quantile of negative-output magnitudes); the output layer gets
    max |z| on both sides, which preserves the extreme value when the
    read-out is quantized.  Degenerate sides are floored with a warning.
    """
    policy = policy or ThresholdPolicy()
    batch = np.asarray(batch, dtype=np.float64)
    if batch.size == 0:
        raise ValueError("calibration batch is empty")
    act = ACTIVATIONS_NP[spec.activation]
    _, zs, _ = stack_forward(params, spec.activation, batch, collect=True)
    thresholds = []
    n = len(zs)
    for i, z in enumerate(zs):
        if i == n - 1:
            top = float(np.max(np.abs(z)))
            if top < policy.floor:
                warnings.warn(f"output layer produced ~zero values; flooring thresholds")
                top = policy.floor
            thresholds.append((top, -top))
            continue
        values = act(z)
        pos = values[values > 0.0]
        neg = -values[values < 0.0]
        if pos.size:
            tp = max(float(np.quantile(pos, policy.q)), policy.floor)
        else:
            warnings.warn(f"layer {i}: no positive activations; flooring theta_pos")
            tp = policy.floor
        if neg.size:
            tn = -max(float(np.quantile(neg, policy.q)), policy.floor)
        else:
            warnings.warn(f"layer {i}: no negative activations; flooring theta_neg")
            tn = -policy.floor
        thresholds.append((tp, tn))
    return thresholds


def _build_stack(params, thresholds) -> list[SpikingLayer]:
    n = len(params)
    return [
        SpikingLayer(
            weights=layer.weights.copy(),
            bias=layer.bias.copy(),
            theta_pos=tp,
            theta_neg=tn,
            is_output=(i == n - 1),
        )
        for i, (layer, (tp, tn)) in enumerate(zip(params, thresholds))
    ]


def convert_to_snn(
    model: Model,
    calibration,
    timesteps: int,
    readout: str = "membrane_average",
    policy: ThresholdPolicy | None = None,
):
    """Copy an ANN into spiking form with thresholds fitted on a batch.

    ``calibration`` is a dense (n, d) batch for MLPs, or the list of
    per-axis 1-D point sets for separable models.
    """
    if model.spec.kind == "mlp":
        thresholds = fit_thresholds(model.spec, model.params, calibration, policy)
        return SpikingNetwork(
            spec=model.spec,
            layers=_build_stack(model.params, thresholds),
            timesteps=timesteps,
            readout=readout,
        )
    subnets = []
    for axis, stack in enumerate(model.params):
        col = np.asarray(calibration[axis], dtype=np.float64).reshape(-1, 1)
        thresholds = fit_thresholds(model.spec, stack, col, policy)
        subnets.append(
            SpikingNetwork(
                spec=model.spec,
                layers=_build_stack(stack, thresholds),
                timesteps=timesteps,
                readout=readout,
            )
        )
    return SpikingSeparable(spec=model.spec, subnets=subnets)


# -- rate mode ------------------------------------------------------------


def propagate_rate(snn: SpikingNetwork, inputs: np.ndarray):
    """Closed-form averaged outputs: quantized activations layer by layer.

    Returns ``(output, sbars)`` where ``sbars[0]`` is the input batch and
    ``sbars[l]`` the averaged output of hidden layer l.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != snn.layers[0].weights.shape[0]:
        raise ValueError(f"input shape {x.shape} does not match first layer")
    act = ACTIVATIONS_NP[snn.spec.activation]
    sbars = [x]
    s = x
    for layer in snn.layers:
        z = s @ layer.weights + layer.bias
        if layer.is_output:
            if snn.readout == "membrane_average":
                return z, sbars
            return clip_floor(z, snn.timesteps, layer.theta_pos, layer.theta_neg), sbars
        s = clip_floor(act(z), snn.timesteps, layer.theta_pos, layer.theta_neg)
        sbars.append(s)
    raise RuntimeError("network has no output layer")


def separable_rate_grid(sep: SpikingSeparable, axis_points):
    """Rate-mode field of a separable spiking net on a tensor grid."""
    spec = sep.spec
    factors = []
    sbars_per_axis = []
    for subnet, pts in zip(sep.subnets, axis_points):
        col = np.asarray(pts, dtype=np.float64).reshape(-1, 1)
        out, sbars = propagate_rate(subnet, col)
        factors.append(out.reshape(col.shape[0], spec.rank, spec.n_out))
        sbars_per_axis.append(sbars)
    d = len(factors)
    prod = None
    for axis, f in enumerate(factors):
        shape = [1] * d + [spec.rank, spec.n_out]
        shape[axis] = f.shape[0]
        f = f.reshape(shape)
        prod = f if prod is None else prod * f
    return prod.sum(axis=d), sbars_per_axis


# -- event mode -------------------------------------------------------------


def _if_counts(drive: np.ndarray, timesteps: int, theta_pos: float, theta_neg: float):
    """March IF dynamics under constant per-step drive; at most one spike/step.

    Under constant drive the membrane keeps the drive's sign, so each entry
    engages one threshold only.  The step-t test is evaluated in
    threshold-normalized units, (drive*t)/theta >= count+1, which is the
    membrane recurrence with one rounding per step arranged exactly like
    the staircase's floor((v*T)/theta): the simulated average then lands on
    the staircase bit for bit, including entries sitting exactly on a
    threshold.
    """
    pos_side = drive >= 0.0
    scale = np.where(pos_side, theta_pos, theta_neg)
    n_pos = np.zeros(drive.shape, dtype=np.int64)
    n_neg = np.zeros(drive.shape, dtype=np.int64)
    for t in range(1, timesteps + 1):
        u = drive * t / scale
        fire = u >= (n_pos + n_neg + 1)
        n_pos += fire & pos_side
        n_neg += fire & ~pos_side
    m = drive * timesteps - (theta_pos * n_pos + theta_neg * n_neg)
    return n_pos, n_neg, m


def if_average(z, timesteps: int, theta_pos: float, theta_neg: float):
    """Averaged output of one IF neuron fed the constant value ``z`` per step."""
    if timesteps < 1:
        raise ValueError("timesteps must be >= 1")
    _check_thresholds(theta_pos, theta_neg)
    drive = np.asarray(z, dtype=np.float64)
    scalar = drive.ndim == 0
    drive = np.atleast_1d(drive)
    n_pos, n_neg, _ = _if_counts(drive, timesteps, theta_pos, theta_neg)
    avg = (theta_pos * n_pos + theta_neg * n_neg) / timesteps
    return float(avg[0]) if scalar else avg


def simulate_event(
    snn: SpikingNetwork, inputs: np.ndarray, feed: str = "layerwise"
) -> SimulationTrace:
    """Explicit T-step membrane simulation.

    The network input is injected as a constant current every step.  With
    ``feed="layerwise"`` each deeper layer also sees its averaged input as
    constant current; with ``feed="streaming"`` it sees the raw spike
    signal of the layer below, scaled by that layer's thresholds.
    """
    if feed not in ("layerwise", "streaming"):
        raise ValueError(f"unknown feed {feed!r}")
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != snn.layers[0].weights.shape[0]:
        raise ValueError(f"input shape {x.shape} does not match first layer")
    T = snn.timesteps
    if feed == "layerwise":
        return _simulate_layerwise(snn, x)

    # streaming: synchronous feed-forward pass per step
    act = ACTIVATIONS_NP[snn.spec.activation]
    n = x.shape[0]
    hidden = snn.layers[:-1]
    out_layer = snn.layers[-1]
    membranes = [np.zeros((n, l.weights.shape[1])) for l in hidden]
    counts_pos = [np.zeros((n, l.weights.shape[1]), dtype=np.int64) for l in hidden]
    counts_neg = [np.zeros((n, l.weights.shape[1]), dtype=np.int64) for l in hidden]
    rasters = [np.zeros((T, n, l.weights.shape[1]), dtype=np.int8) for l in hidden]
    out_accum = np.zeros((n, out_layer.weights.shape[1]))
    out_counts = (
        np.zeros((n, out_layer.weights.shape[1]), dtype=np.int64),
        np.zeros((n, out_layer.weights.shape[1]), dtype=np.int64),
    )
    out_membrane = np.zeros((n, out_layer.weights.shape[1]))
    for t in range(T):
        signal = x
        for i, layer in enumerate(hidden):
            drive = act(signal @ layer.weights + layer.bias)
            m = membranes[i] + drive
            pos = m >= layer.theta_pos
            neg = (~pos) & (m <= layer.theta_neg)
            m = m - layer.theta_pos * pos - layer.theta_neg * neg
            if not np.all(np.isfinite(m)):
                raise RuntimeError(f"non-finite membrane in layer {i} at step {t}")
            membranes[i] = m
            counts_pos[i] += pos
            counts_neg[i] += neg
            rasters[i][t] = pos.astype(np.int8) - neg.astype(np.int8)
            signal = layer.theta_pos * pos + layer.theta_neg * neg
        drive = signal @ out_layer.weights + out_layer.bias
        if snn.readout == "membrane_average":
            out_accum += drive
        else:
            m = out_membrane + drive
            pos = m >= out_layer.theta_pos
            neg = (~pos) & (m <= out_layer.theta_neg)
            out_membrane = m - out_layer.theta_pos * pos - out_layer.theta_neg * neg
            out_counts[0][:] += pos
            out_counts[1][:] += neg
    sbar = [
        (l.theta_pos * cp + l.theta_neg * cn) / T
        for l, cp, cn in zip(hidden, counts_pos, counts_neg)
    ]
    if snn.readout == "membrane_average":
        output = out_accum / T
    else:
        output = (out_layer.theta_pos * out_counts[0] + out_layer.theta_neg * out_counts[1]) / T
    fractions = [float(np.count_nonzero(r) / r.size) for r in rasters]
    return SimulationTrace(
        spikes=rasters, sbar=sbar, nonzero_fraction=fractions, output=output, feed="streaming"
    )


def _simulate_layerwise(snn: SpikingNetwork, x: np.ndarray) -> SimulationTrace:
    T = snn.timesteps
    act = ACTIVATIONS_NP[snn.spec.activation]
    n = x.shape[0]
    rasters, sbars, fractions = [], [], []
    s = x
    for i, layer in enumerate(snn.layers):
        drive = s @ layer.weights + layer.bias
        if not layer.is_output:
            drive = act(drive)
        if layer.is_output:
            if snn.readout == "membrane_average":
                output = drive  # membrane accumulates T*drive; reported /T
            else:
                n_pos, n_neg, m = _if_counts(drive, T, layer.theta_pos, layer.theta_neg)
                if not np.all(np.isfinite(m)):
                    raise RuntimeError(f"non-finite membrane in output layer")
                output = (layer.theta_pos * n_pos + layer.theta_neg * n_neg) / T
            return SimulationTrace(
                spikes=rasters,
                sbar=sbars,
                nonzero_fraction=fractions,
                output=output,
                feed="layerwise",
            )
        width = layer.weights.shape[1]
        raster = np.zeros((T, n, width), dtype=np.int8)
        pos_side = drive >= 0.0
        scale = np.where(pos_side, layer.theta_pos, layer.theta_neg)
        n_pos = np.zeros(drive.shape, dtype=np.int64)
        n_neg = np.zeros(drive.shape, dtype=np.int64)
        for t in range(1, T + 1):
            u = drive * t / scale
            fire = u >= (n_pos + n_neg + 1)
            n_pos += fire & pos_side
            n_neg += fire & ~pos_side
            raster[t - 1] = (fire & pos_side).astype(np.int8) - (fire & ~pos_side).astype(np.int8)
        m = drive * T - (layer.theta_pos * n_pos + layer.theta_neg * n_neg)
        if not np.all(np.isfinite(m)):
            raise RuntimeError(f"non-finite membrane in layer {i}")
        s = (layer.theta_pos * n_pos + layer.theta_neg * n_neg) / T
        rasters.append(raster)
        sbars.append(s)
        fractions.append(float(np.count_nonzero(raster) / raster.size))
    raise RuntimeError("network has no output layer")


# -- spike statistics --------------------------------------------------------


@dataclass
class SpikeRateReport:
    per_layer: list[float]
    overall: float


def spiking_rate(source, thresholds: list[tuple[float, float]] | None = None, timesteps: int | None = None) -> SpikeRateReport:
    """Fraction of nonzero spike-raster entries per hidden layer.

    Accepts a :class:`SimulationTrace`, or a list of rate-mode averaged
    hidden outputs together with their thresholds (a neuron averaging s
    under threshold theta fired |s|/theta of the steps, so the raster
    fraction is recoverable without simulating).  Overall value weights
    layers by neuron count.
    """
    if isinstance(source, SimulationTrace):
        per_layer = list(source.nonzero_fraction)
        widths = [r.shape[-1] for r in source.spikes]
    else:
        if thresholds is None:
            raise ValueError("rate-mode inputs need thresholds")
        per_layer, widths = [], []
        for sbar, (tp, tn) in zip(source, thresholds):
            scale = np.where(sbar >= 0.0, tp, -tn)
            frac = np.abs(sbar) / scale
            per_layer.append(float(np.mean(frac)))
            widths.append(sbar.shape[-1])
    if not per_layer:
        return SpikeRateReport(per_layer=[], overall=0.0)
    weights = np.asarray(widths, dtype=np.float64)
    overall = float(np.average(np.asarray(per_layer), weights=weights))
    return SpikeRateReport(per_layer=per_layer, overall=overall)
