"""Physics-informed losses for dense and separable networks.

The total loss is  w_pde * MSE(residuals) + w_bc * MSE(boundary mismatch)
+ w_ic * MSE(initial mismatch); the sine benchmark is a plain data MSE.
Residual ingredients come from per-coordinate second-order jets, so a
single code path serves numpy evaluation and taped training.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .jets import Jet2, jet_batch
from .network import (
    NetworkSpec,
    contract_factors,
    separable_factors,
    stack_forward,
    stack_jet_forward,
)
from .problems import Problem
from .sampling import CollocationSet
from .tensor import Tensor


class ResidualNaNError(RuntimeError):
    """A residual evaluated to NaN/Inf; carries the offending point."""

    def __init__(self, problem_id: str, point: np.ndarray):
        self.point = point
        super().__init__(f"{problem_id}: non-finite residual at point {point.tolist()}")


def _val(x) -> float:
    return float(x.data) if isinstance(x, Tensor) else float(x)


def _raw(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x)


def _index_last(x, i: int):
    if isinstance(x, Tensor):
        return T.index_last(x, i)
    return x[..., i]


def _mse(x):
    if isinstance(x, Tensor):
        return T.mse(x)
    return float(np.mean(np.square(x)))


def _check_residuals(problem: Problem, residuals, points: np.ndarray | None) -> None:
    for res in residuals:
        data = _raw(res)
        if np.all(np.isfinite(data)):
            continue
        idx = np.argwhere(~np.isfinite(data))[0]
        if points is not None:
            point = points[idx[0]]
        else:
            point = idx.astype(float)
        raise ResidualNaNError(problem.id, np.asarray(point))


def _dense_fields(problem: Problem, spec: NetworkSpec, params, points: np.ndarray) -> dict:
    fields: dict = {}
    for axis, order in enumerate(problem.deriv_orders):
        if order == 0:
            continue
        jet = stack_jet_forward(params, spec.activation, jet_batch(points, axis))
        axis_name = problem.axis_names[axis]
        for fi, fname in enumerate(problem.field_names):
            if fname not in fields:
                fields[fname] = _index_last(jet.value, fi)
            fields[f"{fname}_{axis_name}"] = _index_last(jet.d1, fi)
            if order >= 2:
                fields[f"{fname}_{axis_name}{axis_name}"] = _index_last(jet.d2, fi)
    return fields


def _separable_fields(problem: Problem, spec: NetworkSpec, params, axis_points) -> tuple[dict, list]:
    factors = separable_factors(spec, params, axis_points, order=2)
    fields: dict = {}
    values = contract_factors(factors)
    for fi, fname in enumerate(problem.field_names):
        fields[fname] = _index_last(values, fi)
    for axis, order in enumerate(problem.deriv_orders):
        if order == 0:
            continue
        axis_name = problem.axis_names[axis]
        d1 = contract_factors(factors, derivative_axis=axis, order=1)
        for fi, fname in enumerate(problem.field_names):
            fields[f"{fname}_{axis_name}"] = _index_last(d1, fi)
        if order >= 2:
            d2 = contract_factors(factors, derivative_axis=axis, order=2)
            for fi, fname in enumerate(problem.field_names):
                fields[f"{fname}_{axis_name}{axis_name}"] = _index_last(d2, fi)
    return fields, factors


def _face_points(axis_sets: list[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axis_sets, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _singleton_factor(spec: NetworkSpec, layers, value: float, order: int = 0):
    col = np.array([[value]], dtype=np.float64)
    if order == 0:
        feat = stack_forward(layers, spec.activation, col)
        return feat.reshape((1, spec.rank, spec.n_out))
    jet = stack_jet_forward(layers, spec.activation, jet_batch(col, 0))
    shape = (1, spec.rank, spec.n_out)
    return Jet2(jet.value.reshape(shape), jet.d1.reshape(shape), jet.d2.reshape(shape))


def _value_factors(factors) -> list:
    return [f.value if isinstance(f, Jet2) else f for f in factors]


def _separable_data_terms(problem, spec, params, axis_points, factors):
    """Boundary and initial sum-of-squares built from singleton-axis faces."""
    values = _value_factors(factors)
    bc_sq, bc_n = None, 0
    ic_sq, ic_n = None, 0

    def face_diff(axis, fixed, target_fn, order=0):
        face = list(values)
        face[axis] = _singleton_factor(spec, params[axis], fixed, order=order)
        if order == 0:
            pred = contract_factors(face)
        else:
            pred = contract_factors(face, derivative_axis=axis, order=order)
        sets = [np.array([fixed]) if a == axis else axis_points[a] for a in range(spec.axes)]
        if target_fn is None:
            target = 0.0
        else:
            pts = _face_points(sets)
            target = target_fn(pts).reshape(pred.shape if not isinstance(pred, Tensor) else pred.data.shape)
        return pred - target

    for axis, (lo, hi) in enumerate(problem.domain):
        if axis == problem.time_axis:
            continue
        for fixed in (lo, hi):
            diff = face_diff(axis, fixed, problem.boundary_value)
            sq = T.square(diff).sum() if isinstance(diff, Tensor) else np.sum(np.square(diff))
            bc_sq = sq if bc_sq is None else bc_sq + sq
            bc_n += _raw(diff).size

    if problem.time_axis is not None:
        t0 = problem.domain[problem.time_axis][0]
        diff = face_diff(problem.time_axis, t0, problem.initial_value)
        sq = T.square(diff).sum() if isinstance(diff, Tensor) else np.sum(np.square(diff))
        ic_sq, ic_n = sq, _raw(diff).size
        if problem.has_initial_velocity:
            vel = face_diff(problem.time_axis, t0, None, order=1)
            sqv = T.square(vel).sum() if isinstance(vel, Tensor) else np.sum(np.square(vel))
            ic_sq = ic_sq + sqv
            ic_n += _raw(vel).size

    bc = None if bc_sq is None else bc_sq / bc_n
    ic = None if ic_sq is None else ic_sq / ic_n
    return bc, ic


def physics_loss(problem: Problem, spec: NetworkSpec, params, colloc: CollocationSet):
    """Total loss and per-component values.

    Returns ``(total, components)`` where ``total`` is a Tensor when the
    parameters are taped tensors (training) and a float otherwise;
    ``components`` maps component names to floats.
    """
    if spec.input_dim != problem.input_dim or spec.output_dim != problem.n_out:
        raise ValueError(
            f"spec ({spec.input_dim}->{spec.output_dim}) does not match problem "
            f"{problem.id} ({problem.input_dim}->{problem.n_out})"
        )

    if problem.is_regression:
        pred = stack_forward(params, spec.activation, colloc.interior)
        diff = pred - problem.target(colloc.interior)
        total = _mse(diff)
        return total, {"data": _val(total), "total": _val(total)}

    w = problem.weights
    components: dict[str, float] = {}

    if spec.kind == "separable":
        if colloc.axis_points is None:
            raise ValueError("separable training needs per-axis collocation points")
        fields, factors = _separable_fields(problem, spec, params, colloc.axis_points)
        residuals = problem.residual(fields)
        _check_residuals(problem, residuals, None)
        pde = None
        for res in residuals:
            term = _mse(res)
            pde = term if pde is None else pde + term
        bc, ic = _separable_data_terms(problem, spec, params, colloc.axis_points, factors)
    else:
        fields = _dense_fields(problem, spec, params, colloc.interior)
        residuals = problem.residual(fields)
        _check_residuals(problem, residuals, colloc.interior)
        pde = None
        for res in residuals:
            term = _mse(res)
            pde = term if pde is None else pde + term
        bc = ic = None
        if colloc.boundary is not None:
            pred = stack_forward(params, spec.activation, colloc.boundary)
            bc = _mse(pred - problem.boundary_value(colloc.boundary))
        if colloc.initial is not None:
            pred = stack_forward(params, spec.activation, colloc.initial)
            ic = _mse(pred - problem.initial_value(colloc.initial))
            if problem.has_initial_velocity:
                jet = stack_jet_forward(
                    params, spec.activation, jet_batch(colloc.initial, problem.time_axis)
                )
                ic = ic + _mse(jet.d1)

    total = w.pde * pde
    components["pde"] = _val(pde)
    if bc is not None:
        total = total + w.bc * bc
        components["bc"] = _val(bc)
    if ic is not None:
        total = total + w.ic * ic
        components["ic"] = _val(ic)
    components["total"] = _val(total)
    return total, components
