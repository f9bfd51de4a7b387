"""Conversion analysis: error metrics, bound validation, curvature, sweeps.

The output-error bound is checked in its computable surrogate form: the
layer Hessians are replaced by identities, so the check compares

    ||e_out||^2   <=   sum_l  2^(n-l+1) ||e_c_l||^2     (per sample)

which is exactly the quantity the empirical validation tracks.  A second
column repeats the sum with the total layer errors e_l in place of e_c_l
for reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import decompose_error
from .network import (
    ACTIVATION_D1,
    ACTIVATION_D2,
    ACTIVATIONS_NP,
    Model,
    NetworkSpec,
)
from .snn import SpikingLayer, SpikingNetwork, fit_thresholds, propagate_rate


def conversion_metrics(output: np.ndarray, reference: np.ndarray) -> tuple[float, float]:
    """(L2, relative L2) with L2 the root mean square of the difference.

    The relative value divides by the reference RMS; for an all-zero
    reference it is undefined and returned as NaN.
    """
    out = np.asarray(output, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if out.shape != ref.shape:
        raise ValueError(f"shape mismatch: {out.shape} vs {ref.shape}")
    l2 = float(np.sqrt(np.mean(np.square(out - ref))))
    ref_norm = float(np.sqrt(np.mean(np.square(ref))))
    rel = l2 / ref_norm if ref_norm > 0.0 else float("nan")
    return l2, rel


# -- Theorem-style bound -----------------------------------------------------


@dataclass
class BoundReport:
    lhs: np.ndarray  # per-sample ||e_out||^2
    rhs: np.ndarray  # per-sample weighted sum of ||e_c_l||^2
    rhs_total_error: np.ndarray  # same weights on ||e_l||^2 (reference column)
    satisfied: np.ndarray  # lhs <= rhs per sample

    @property
    def fraction_satisfied(self) -> float:
        return float(np.mean(self.satisfied))


def bound_check(ann: Model, snn: SpikingNetwork, data: np.ndarray) -> BoundReport:
    dec = decompose_error(ann, snn, data)
    n = len(dec.e)
    lhs = np.sum(np.square(dec.e[-1]), axis=1)
    rhs = np.zeros_like(lhs)
    rhs_alt = np.zeros_like(lhs)
    for l, (ec, e) in enumerate(zip(dec.e_c, dec.e), start=1):
        weight = 2.0 ** (n - l + 1)
        rhs += weight * np.sum(np.square(ec), axis=1)
        rhs_alt += weight * np.sum(np.square(e), axis=1)
    return BoundReport(lhs=lhs, rhs=rhs, rhs_total_error=rhs_alt, satisfied=lhs <= rhs)


# -- curvature recursion -------------------------------------------------------


@dataclass
class HessianStack:
    """Loss Hessians w.r.t. each layer input, plus the diagonal factors.

    ``hessians[i]`` is d^2 L / d h_i^2 where h_0 is the network input and
    h_n the output; ``b_diags[i]``/``c_diags[i]`` belong to the layer
    mapping h_i to h_{i+1}.
    """

    hessians: list[np.ndarray]
    b_diags: list[np.ndarray]
    c_diags: list[np.ndarray]


MAX_HESSIAN_WIDTH = 64


def hessian_recursion(
    spec: NetworkSpec, params, sample: np.ndarray, target: np.ndarray
) -> HessianStack:
    """Backward curvature recursion for the mean-square output loss.

    L = mean_j (out_j - target_j)^2, so the output-space Hessian is
    2 I / width.  Each step pulls the Hessian through one layer:

        G_i = W (diag(f') G_{i+1} diag(f') + diag(dL/dh_{i+1} * f'')) W^T

    (weights stored input-major, so W multiplies from the left here).
    """
    if spec.kind != "mlp":
        raise ValueError("hessian_recursion handles MLP stacks")
    if max(spec.layer_widths) > MAX_HESSIAN_WIDTH:
        raise ValueError(f"dense recursion limited to width {MAX_HESSIAN_WIDTH}")
    try:
        d1 = ACTIVATION_D1[spec.activation]
        d2 = ACTIVATION_D2[spec.activation]
    except KeyError:
        raise ValueError(f"activation {spec.activation!r} lacks derivative rules") from None

    x = np.asarray(sample, dtype=np.float64).ravel()
    y = np.asarray(target, dtype=np.float64).ravel()
    act = ACTIVATIONS_NP[spec.activation]
    n = len(params)
    hs = [x]
    zs = []
    for i, layer in enumerate(params):
        z = hs[-1] @ layer.weights + layer.bias
        zs.append(z)
        hs.append(act(z) if i < n - 1 else z)
    out = hs[-1]
    width_out = out.size
    if y.shape != out.shape:
        raise ValueError("target shape does not match network output")

    G = 2.0 * np.eye(width_out) / width_out
    delta = 2.0 * (out - y) / width_out
    hessians = [G]
    b_diags: list[np.ndarray] = []
    c_diags: list[np.ndarray] = []
    for i in range(n - 1, -1, -1):
        w = params[i].weights
        if i == n - 1:
            b = np.ones_like(zs[i])
            c = np.zeros_like(zs[i])
        else:
            b = d1(zs[i])
            c = delta * d2(zs[i])
        inner = (b[:, None] * G * b[None, :]) + np.diag(c)
        G = w @ inner @ w.T
        delta = w @ (b * delta)
        hessians.append(G)
        b_diags.append(b)
        c_diags.append(c)
    hessians.reverse()
    b_diags.reverse()
    c_diags.reverse()
    return HessianStack(hessians=hessians, b_diags=b_diags, c_diags=c_diags)


def _tail_loss(spec: NetworkSpec, params, level: int, h: np.ndarray, target: np.ndarray) -> float:
    """Mean-square loss of the network tail entered at layer ``level`` input."""
    act = ACTIVATIONS_NP[spec.activation]
    n = len(params)
    v = h
    for i in range(level, n):
        z = v @ params[i].weights + params[i].bias
        v = act(z) if i < n - 1 else z
    return float(np.mean(np.square(v - target)))


def hessian_fd_check(
    spec: NetworkSpec, params, sample: np.ndarray, target: np.ndarray, step: float = 1e-4
) -> list[tuple[int, float, float]]:
    """Compare the recursion against central-difference Hessians per level.

    Returns (level, relative Frobenius error, symmetry residual) for each
    layer-input level 0..n-1 (level n is the analytic base case).
    """
    stack = hessian_recursion(spec, params, sample, target)
    act = ACTIVATIONS_NP[spec.activation]
    x = np.asarray(sample, dtype=np.float64).ravel()
    y = np.asarray(target, dtype=np.float64).ravel()
    n = len(params)
    hs = [x]
    for i, layer in enumerate(params):
        z = hs[-1] @ layer.weights + layer.bias
        hs.append(act(z) if i < n - 1 else z)

    rows = []
    for level in range(n):
        h0 = hs[level]
        w = h0.size
        fd = np.zeros((w, w))
        for a in range(w):
            for b in range(w):
                hpp = h0.copy(); hpp[a] += step; hpp[b] += step
                hpm = h0.copy(); hpm[a] += step; hpm[b] -= step
                hmp = h0.copy(); hmp[a] -= step; hmp[b] += step
                hmm = h0.copy(); hmm[a] -= step; hmm[b] -= step
                fd[a, b] = (
                    _tail_loss(spec, params, level, hpp, y)
                    - _tail_loss(spec, params, level, hpm, y)
                    - _tail_loss(spec, params, level, hmp, y)
                    + _tail_loss(spec, params, level, hmm, y)
                ) / (4.0 * step * step)
        analytic = stack.hessians[level]
        rel = float(
            np.linalg.norm(analytic - fd) / max(np.linalg.norm(fd), 1e-30)
        )
        sym = float(np.max(np.abs(analytic - analytic.T)))
        rows.append((level, rel, sym))
    return rows


# -- timestep sweep ------------------------------------------------------------


@dataclass
class SweepResult:
    timesteps: list[int]
    errors: list[float]
    slope: float
    degenerate: bool
    slope_window: int = 64


def sweep_T(
    ann: Model,
    calibration_batch: np.ndarray,
    eval_inputs: np.ndarray,
    t_list: list[int],
    mode: str = "advanced",
    readout: str = "membrane_average",
    cal_cfg=None,
) -> SweepResult:
    """Convert at each T, record the output error against the ANN.

    Thresholds do not depend on T, so they are fitted once and reused.
    The slope is a least-squares fit of log error against log T over
    T <= 64; an exact-zero error anywhere makes the fit degenerate.
    """
    from .calibration import calibrate_advanced, calibrate_light
    from .network import mlp_forward

    if list(t_list) != sorted(t_list) or len(set(t_list)) != len(t_list):
        raise ValueError("t_list must be strictly increasing")
    thresholds = fit_thresholds(ann.spec, ann.params, calibration_batch)
    ann_out = mlp_forward(ann.spec, ann.params, eval_inputs)
    errors = []
    for T in t_list:
        layers = [
            SpikingLayer(
                weights=l.weights.copy(),
                bias=l.bias.copy(),
                theta_pos=tp,
                theta_neg=tn,
                is_output=(i == len(ann.params) - 1),
            )
            for i, (l, (tp, tn)) in enumerate(zip(ann.params, thresholds))
        ]
        snn = SpikingNetwork(spec=ann.spec, layers=layers, timesteps=T, readout=readout)
        if mode == "light":
            snn, _ = calibrate_light(ann, snn, calibration_batch)
        elif mode == "advanced":
            snn, _ = calibrate_advanced(ann, snn, calibration_batch, cal_cfg)
        elif mode != "none":
            raise ValueError(f"unknown calibration mode {mode!r}")
        out, _ = propagate_rate(snn, eval_inputs)
        errors.append(conversion_metrics(out, ann_out)[0])

    window = [(t, e) for t, e in zip(t_list, errors) if t <= 64]
    degenerate = any(e == 0.0 for _, e in window) or len(window) < 2
    if degenerate:
        slope = float("nan")
    else:
        ts = np.log([t for t, _ in window])
        es = np.log([e for _, e in window])
        slope = float(np.polyfit(ts, es, 1)[0])
    return SweepResult(timesteps=list(t_list), errors=errors, slope=slope, degenerate=degenerate)


# -- spectral smoothing ---------------------------------------------------------


def fft_smooth(
    field: np.ndarray, cutoff_fraction: float, axes_coords: tuple[np.ndarray, ...] | None = None
) -> np.ndarray:
    """Low-pass a uniform-grid field: zero modes above cutoff * Nyquist per axis.

    ``axes_coords``, when given, are checked for uniform spacing.  The
    inverse transform's imaginary residue must stay below 1e-10 (the kept
    mode set is symmetric, so it does) and is discarded.
    """
    if not 0.0 < cutoff_fraction <= 1.0:
        raise ValueError("cutoff_fraction must lie in (0, 1]")
    arr = np.asarray(field, dtype=np.float64)
    if axes_coords is not None:
        for coords in axes_coords:
            coords = np.asarray(coords)
            if coords.size > 2:
                steps = np.diff(coords)
                span = float(np.max(np.abs(coords))) or 1.0
                # tolerance wide enough for 9-significant-digit round trips
                if not np.allclose(steps, steps[0], rtol=1e-5, atol=1e-6 * span):
                    raise ValueError("fft_smooth needs a uniform grid")
    spectrum = np.fft.fftn(arr)
    for axis, size in enumerate(arr.shape):
        modes = np.abs(np.fft.fftfreq(size, d=1.0 / size))
        keep = modes <= cutoff_fraction * (size // 2)
        shape = [1] * arr.ndim
        shape[axis] = size
        spectrum = spectrum * keep.reshape(shape)
    smoothed = np.fft.ifftn(spectrum)
    residue = float(np.max(np.abs(smoothed.imag)))
    scale = max(1.0, float(np.max(np.abs(arr))))
    if residue > 1e-10 * scale:
        raise RuntimeError(f"imaginary residue {residue:.3e} after inverse transform")
    return smoothed.real
