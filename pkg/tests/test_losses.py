"""Physics losses: residual formulas, gradients, and the FD recomputation oracle."""

import numpy as np
import pytest

from pinn2snn import (
    CollocationCounts,
    NetworkSpec,
    Tensor,
    get_problem,
    init_params,
    mlp_forward,
    physics_loss,
    sample_collocation,
)
from pinn2snn.losses import ResidualNaNError
from pinn2snn.network import LayerParams, stack_forward
from pinn2snn.problems import Beltrami
from pinn2snn.tensor import GradTape


def small_counts(problem_id):
    return CollocationCounts(interior=49, boundary=16, initial=12, per_axis=6)


def tensorized(params):
    flat, wrapped = [], []
    for layer in params:
        w, b = Tensor(layer.weights), Tensor(layer.bias)
        flat.extend([w, b])
        wrapped.append(LayerParams(weights=w, bias=b))
    return wrapped, flat


def test_beltrami_exact_solution_has_zero_residual(rng):
    # feed the residual formula with analytic derivatives of the closed form
    prob = get_problem("beltrami")
    pts = rng.uniform([-1, -1, 0], [1, 1, 1], size=(200, 3))
    x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
    et2, et4 = np.exp(-2 * t), np.exp(-4 * t)
    F = {
        "u": -np.cos(x) * np.sin(y) * et2,
        "v": np.sin(x) * np.cos(y) * et2,
        "p": -0.25 * (np.cos(2 * x) + np.cos(2 * y)) * et4,
        "u_x": np.sin(x) * np.sin(y) * et2,
        "u_y": -np.cos(x) * np.cos(y) * et2,
        "u_t": 2 * np.cos(x) * np.sin(y) * et2,
        "u_xx": np.cos(x) * np.sin(y) * et2,
        "u_yy": np.cos(x) * np.sin(y) * et2,
        "v_x": np.cos(x) * np.cos(y) * et2,
        "v_y": -np.sin(x) * np.sin(y) * et2,
        "v_t": -2 * np.sin(x) * np.cos(y) * et2,
        "v_xx": -np.sin(x) * np.cos(y) * et2,
        "v_yy": -np.sin(x) * np.cos(y) * et2,
        "p_x": 0.5 * np.sin(2 * x) * et4,
        "p_y": 0.5 * np.sin(2 * y) * et4,
    }
    for res in prob.residual(F):
        assert np.max(np.abs(res)) < 1e-8


def test_zero_network_poisson_components():
    prob = get_problem("poisson")
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 8, 1))
    params = [
        LayerParams(weights=np.zeros((2, 8)), bias=np.zeros(8)),
        LayerParams(weights=np.zeros((8, 1)), bias=np.zeros(1)),
    ]
    colloc = sample_collocation(prob, small_counts("poisson"), seed=0)
    _, comps = physics_loss(prob, spec, params, colloc)
    assert comps["pde"] == pytest.approx(1.0, abs=0.0)
    assert comps["bc"] == pytest.approx(0.0, abs=0.0)


def fd_loss(problem, spec, params, colloc, h=1e-3):
    """Independent loss recomputation with finite-difference derivatives."""

    def net(pts):
        return stack_forward(params, spec.activation, pts)

    pts = colloc.interior
    base = net(pts)
    F = {}
    for fi, fname in enumerate(problem.field_names):
        F[fname] = base[:, fi]
    for axis, order in enumerate(problem.deriv_orders):
        if order == 0:
            continue
        shift = np.zeros_like(pts)
        shift[:, axis] = h
        fp, fm = net(pts + shift), net(pts - shift)
        name = problem.axis_names[axis]
        for fi, fname in enumerate(problem.field_names):
            F[f"{fname}_{name}"] = (fp[:, fi] - fm[:, fi]) / (2 * h)
            if order >= 2:
                F[f"{fname}_{name}{name}"] = (fp[:, fi] - 2 * base[:, fi] + fm[:, fi]) / h**2
    total = 0.0
    for res in problem.residual(F):
        total += problem.weights.pde * float(np.mean(np.square(res)))
    if colloc.boundary is not None:
        diff = net(colloc.boundary) - problem.boundary_value(colloc.boundary)
        total += problem.weights.bc * float(np.mean(np.square(diff)))
    if colloc.initial is not None:
        diff = net(colloc.initial) - problem.initial_value(colloc.initial)
        ic = float(np.mean(np.square(diff)))
        if problem.has_initial_velocity:
            shift = np.zeros_like(colloc.initial)
            shift[:, problem.time_axis] = h
            vel = (net(colloc.initial + shift) - net(colloc.initial - shift)) / (2 * h)
            ic += float(np.mean(np.square(vel)))
        total += problem.weights.ic * ic
    return total


@pytest.mark.parametrize("pid", ["poisson", "diffusion_reaction", "wave", "burgers", "beltrami"])
def test_loss_matches_fd_recomputation(pid, rng):
    prob = get_problem(pid)
    spec = NetworkSpec(kind="mlp", layer_widths=(prob.input_dim, 10, 10, prob.n_out))
    params = init_params(spec, 3)
    colloc = sample_collocation(prob, small_counts(pid), seed=1)
    total, _ = physics_loss(prob, spec, params, colloc)
    approx = fd_loss(prob, spec, params, colloc)
    assert abs(total - approx) / max(abs(approx), 1e-12) < 1e-3


@pytest.mark.parametrize(
    "pid", ["sin_regression", "poisson", "diffusion_reaction", "wave", "burgers", "beltrami"]
)
def test_loss_gradients_match_fd(pid, rng):
    prob = get_problem(pid)
    spec = NetworkSpec(kind="mlp", layer_widths=(prob.input_dim, 8, 8, prob.n_out))
    params = init_params(spec, 11)
    colloc = sample_collocation(prob, small_counts(pid), seed=2)
    wrapped, flat = tensorized(params)
    with GradTape() as tape:
        tape.watch(*flat)
        total, _ = physics_loss(prob, spec, wrapped, colloc)
    grads = tape.gradient(total, flat)

    local = np.random.default_rng(5)
    checked = 0
    arrays = []
    for layer in params:
        arrays.extend([layer.weights, layer.bias])
    for arr, grad in zip(arrays, grads):
        flat_view = arr.ravel()
        for _ in range(4):
            k = int(local.integers(flat_view.size))
            orig = flat_view[k]
            h = 1e-5
            flat_view[k] = orig + h
            lp, _ = physics_loss(prob, spec, params, colloc)
            flat_view[k] = orig - h
            lm, _ = physics_loss(prob, spec, params, colloc)
            flat_view[k] = orig
            fd = (lp - lm) / (2 * h)
            assert abs(grad.ravel()[k] - fd) / max(1.0, abs(fd)) < 1e-5
            checked += 1
    assert checked > 0


def test_separable_and_dense_values_agree_on_grid(rng):
    # the separable loss path evaluates the same residual algebra over grids
    prob = get_problem("burgers")
    spec = NetworkSpec(kind="separable", layer_widths=(1, 8, 4), axes=2, rank=4, n_out=1)
    params = init_params(spec, 3)
    colloc = sample_collocation(prob, CollocationCounts(per_axis=6), seed=0, separable=True)
    total, comps = physics_loss(prob, spec, params, colloc)
    assert np.isfinite(comps["total"])
    assert set(comps) >= {"pde", "bc", "ic", "total"}


def test_separable_loss_gradients_match_fd(rng):
    prob = get_problem("burgers")
    spec = NetworkSpec(kind="separable", layer_widths=(1, 6, 3), axes=2, rank=3, n_out=1)
    params = init_params(spec, 9)
    colloc = sample_collocation(prob, CollocationCounts(per_axis=5), seed=0, separable=True)
    wrapped_axes, flat = [], []
    for stack in params:
        wrapped, f = tensorized(stack)
        wrapped_axes.append(wrapped)
        flat.extend(f)
    with GradTape() as tape:
        tape.watch(*flat)
        total, _ = physics_loss(prob, spec, wrapped_axes, colloc)
    grads = tape.gradient(total, flat)
    arrays = []
    for stack in params:
        for layer in stack:
            arrays.extend([layer.weights, layer.bias])
    local = np.random.default_rng(3)
    for arr, grad in zip(arrays, grads):
        view = arr.ravel()
        k = int(local.integers(view.size))
        orig = view[k]
        h = 1e-6
        view[k] = orig + h
        lp, _ = physics_loss(prob, spec, params, colloc)
        view[k] = orig - h
        lm, _ = physics_loss(prob, spec, params, colloc)
        view[k] = orig
        fd = (lp - lm) / (2 * h)
        assert abs(grad.ravel()[k] - fd) / max(1.0, abs(fd)) < 1e-5


def test_nan_residual_carries_offending_point():
    prob = get_problem("burgers", nu=np.inf)  # forces non-finite viscosity term
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 6, 1))
    params = init_params(spec, 0)
    colloc = sample_collocation(prob, small_counts("burgers"), seed=0)
    with pytest.raises(ResidualNaNError) as err:
        physics_loss(prob, spec, params, colloc)
    assert err.value.point.shape == (2,)


def test_spec_problem_dimension_mismatch_rejected():
    prob = get_problem("poisson")
    spec = NetworkSpec(kind="mlp", layer_widths=(3, 6, 1))
    params = init_params(spec, 0)
    colloc = sample_collocation(prob, small_counts("poisson"), seed=0)
    with pytest.raises(ValueError):
        physics_loss(prob, spec, params, colloc)
