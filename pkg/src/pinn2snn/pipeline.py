"""End-to-end helpers shared by the CLI, the analysis runs and the tests."""

from __future__ import annotations

import numpy as np

from .calibration import (
    CalibrationConfig,
    CalibrationReport,
    calibrate_advanced,
    calibrate_light,
    calibrate_separable,
)
from .network import Model, mlp_forward, spinn_forward
from .problems import Problem
from .sampling import CollocationSet
from .snn import (
    SpikeRateReport,
    SpikingNetwork,
    SpikingSeparable,
    convert_to_snn,
    propagate_rate,
    separable_rate_grid,
    simulate_event,
    spiking_rate,
)

DEFAULT_EVAL_GRID = {
    "sin_regression": (513,),
    "poisson": (64, 64),
    "diffusion_reaction": (64, 33),
    "wave": (64, 33),
    "burgers": (128, 65),
    "beltrami": (24, 24, 9),
}


def evaluation_axes(problem: Problem, sizes: tuple[int, ...] | None = None):
    sizes = sizes or DEFAULT_EVAL_GRID[problem.id]
    if len(sizes) != problem.input_dim:
        raise ValueError(f"{problem.id}: grid needs {problem.input_dim} sizes")
    return tuple(
        np.linspace(lo, hi, n) for (lo, hi), n in zip(problem.domain, sizes)
    )


def _mesh_points(axes) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def model_field(model: Model, axes) -> np.ndarray:
    """ANN field on a tensor grid, shaped (n_1, ..., n_d, n_out)."""
    shape = tuple(len(a) for a in axes)
    if model.spec.kind == "separable":
        return spinn_forward(model.spec, model.params, list(axes))
    out = mlp_forward(model.spec, model.params, _mesh_points(axes))
    return out.reshape(shape + (model.spec.output_dim,))


def snn_field(snn, axes, mode: str = "rate", feed: str = "layerwise") -> np.ndarray:
    """Spiking field on a tensor grid (rate mode or event simulation)."""
    shape = tuple(len(a) for a in axes)
    if isinstance(snn, SpikingSeparable):
        if mode == "rate":
            field, _ = separable_rate_grid(snn, list(axes))
            return field
        factors = []
        spec = snn.spec
        for subnet, pts in zip(snn.subnets, axes):
            col = np.asarray(pts, dtype=np.float64).reshape(-1, 1)
            trace = simulate_event(subnet, col, feed=feed)
            factors.append(trace.output.reshape(col.shape[0], spec.rank, spec.n_out))
        d = len(factors)
        prod = None
        for axis, f in enumerate(factors):
            fshape = [1] * d + [spec.rank, spec.n_out]
            fshape[axis] = f.shape[0]
            prod = f.reshape(fshape) if prod is None else prod * f.reshape(fshape)
        return prod.sum(axis=d)
    pts = _mesh_points(axes)
    if mode == "rate":
        out, _ = propagate_rate(snn, pts)
    else:
        out = simulate_event(snn, pts, feed=feed).output
    return out.reshape(shape + (snn.spec.output_dim,))


def calibration_inputs(model: Model, colloc: CollocationSet):
    """The conversion/calibration data: the training collocation set."""
    if model.spec.kind == "separable":
        if colloc.axis_points is None:
            raise ValueError("separable models need per-axis collocation points")
        return colloc.axis_points
    return colloc.all_points()


def convert_and_calibrate(
    model: Model,
    data,
    timesteps: int,
    mode: str = "advanced",
    readout: str = "membrane_average",
    cfg: CalibrationConfig | None = None,
):
    """Threshold fitting plus the selected calibration pass."""
    snn = convert_to_snn(model, data, timesteps, readout=readout)
    if mode == "none":
        return snn, CalibrationReport(mode="none")
    if isinstance(snn, SpikingSeparable):
        return calibrate_separable(model, snn, data, mode, cfg)
    if mode == "light":
        return calibrate_light(model, snn, data)
    if mode == "advanced":
        return calibrate_advanced(model, snn, data, cfg)
    raise ValueError(f"unknown calibration mode {mode!r}")


def snn_rate_report(snn, data) -> SpikeRateReport:
    """Hidden-layer spike rates on a batch (rate-mode equivalents)."""
    if isinstance(snn, SpikingSeparable):
        sbars, thetas = [], []
        for subnet, pts in zip(snn.subnets, data):
            col = np.asarray(pts, dtype=np.float64).reshape(-1, 1)
            _, subnet_sbars = propagate_rate(subnet, col)
            sbars.extend(subnet_sbars[1:])
            thetas.extend((l.theta_pos, l.theta_neg) for l in subnet.layers[:-1])
        return spiking_rate(sbars, thresholds=thetas)
    _, sbars = propagate_rate(snn, data)
    thetas = [(l.theta_pos, l.theta_neg) for l in snn.layers[:-1]]
    return spiking_rate(sbars[1:], thresholds=thetas)
