"""Architecture layer: initialization, forwards, separable contraction."""

import numpy as np
import pytest

from pinn2snn import NetworkSpec, init_params, mlp_forward, spinn_forward, spinn_point_forward
from pinn2snn.network import LayerParams, stack_forward


def test_init_deterministic_per_seed():
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 8, 1))
    a, b = init_params(spec, 42), init_params(spec, 42)
    for la, lb in zip(a, b):
        assert np.array_equal(la.weights, lb.weights)
        assert np.array_equal(la.bias, lb.bias)
    c = init_params(spec, 43)
    assert not np.array_equal(a[0].weights, c[0].weights)


def test_init_within_glorot_bound_and_zero_bias():
    spec = NetworkSpec(kind="mlp", layer_widths=(100, 100, 1))
    params = init_params(spec, 0)
    bound = np.sqrt(6.0 / 200.0)
    assert np.max(np.abs(params[0].weights)) <= bound
    assert np.all(params[0].bias == 0.0)


def test_init_mean_is_statistically_centred():
    # 10^4 uniform samples: |mean| under 3 standard errors
    spec = NetworkSpec(kind="mlp", layer_widths=(100, 100, 1))
    entries = init_params(spec, 7)[0].weights.ravel()
    bound = np.sqrt(6.0 / 200.0)
    stderr = (bound / np.sqrt(3.0)) / np.sqrt(entries.size)
    assert abs(entries.mean()) < 3.0 * stderr


def test_zero_weights_tanh_outputs_zero(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 5, 3))
    params = [
        LayerParams(weights=np.zeros((2, 5)), bias=np.zeros(5)),
        LayerParams(weights=np.zeros((5, 3)), bias=np.zeros(3)),
    ]
    out = mlp_forward(spec, params, rng.uniform(-2, 2, size=(6, 2)))
    np.testing.assert_array_equal(out, np.zeros((6, 3)))


def test_single_affine_layer_is_identity(rng):
    layer = [LayerParams(weights=np.eye(3), bias=np.zeros(3))]
    x = rng.uniform(-2, 2, size=(5, 3))
    np.testing.assert_array_equal(stack_forward(layer, "tanh", x), x)


def test_forward_matches_hand_rolled_matrices(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 2, 1))
    params = init_params(spec, 3)
    x = rng.uniform(-2, 2, size=(4, 2))
    out = mlp_forward(spec, params, x)
    # independent elementwise evaluation
    expected = np.empty((4, 1))
    for r in range(4):
        h = [0.0, 0.0]
        for j in range(2):
            acc = 0.0
            for i in range(2):
                acc += x[r, i] * params[0].weights[i, j]
            h[j] = np.tanh(acc + params[0].bias[j])
        acc = 0.0
        for j in range(2):
            acc += h[j] * params[1].weights[j, 0]
        expected[r, 0] = acc + params[1].bias[0]
    # BLAS may contract multiply-adds; agree to within one ulp
    np.testing.assert_allclose(out, expected, rtol=5e-16, atol=1e-15)


def test_forward_is_pure(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 6, 2))
    params = init_params(spec, 9)
    x = rng.uniform(-1, 1, size=(8, 2))
    np.testing.assert_array_equal(mlp_forward(spec, params, x), mlp_forward(spec, params, x))


def test_hidden_activations_bounded(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(3, 16, 16, 2))
    params = init_params(spec, 11)
    x = rng.uniform(-5, 5, size=(32, 3))
    _, _, xs = mlp_forward(spec, params, x, collect=True)
    for hidden in xs[1:]:
        assert np.max(np.abs(hidden)) <= 1.0


def test_dimension_mismatch_rejected(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(2, 4, 1))
    params = init_params(spec, 0)
    with pytest.raises(ValueError):
        mlp_forward(spec, params, rng.uniform(size=(3, 5)))


# -- separable ------------------------------------------------------------


def constant_one_subnet():
    return [
        LayerParams(weights=np.zeros((1, 3)), bias=np.zeros(3)),
        LayerParams(weights=np.zeros((3, 1)), bias=np.ones(1)),
    ]


def test_rank_one_constant_subnets_give_all_ones():
    spec = NetworkSpec(kind="separable", layer_widths=(1, 3, 1), axes=2, rank=1, n_out=1)
    params = [constant_one_subnet(), constant_one_subnet()]
    grid = spinn_forward(spec, params, [np.linspace(0, 1, 4), np.linspace(0, 1, 6)])
    np.testing.assert_array_equal(grid, np.ones((4, 6, 1)))


def identity_subnet():
    # relu hidden on positive coordinates passes the value straight through
    return [
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
    ]


def test_rank_one_outer_product():
    spec = NetworkSpec(
        kind="separable", layer_widths=(1, 1, 1), axes=2, rank=1, n_out=1, activation="relu"
    )
    params = [identity_subnet(), identity_subnet()]
    xs = np.array([0.5, 1.0, 2.0])
    ts = np.array([1.0, 3.0])
    grid = spinn_forward(spec, params, [xs, ts])
    np.testing.assert_allclose(grid[..., 0], np.outer(xs, ts), atol=0.0)


def test_separable_matches_dense_pointwise(rng):
    spec = NetworkSpec(kind="separable", layer_widths=(1, 7, 6), axes=2, rank=3, n_out=2)
    params = init_params(spec, 5)
    xs, ts = np.linspace(-1, 1, 4), np.linspace(0, 1, 5)
    grid = spinn_forward(spec, params, [xs, ts])
    pts = np.stack(np.meshgrid(xs, ts, indexing="ij"), axis=-1).reshape(-1, 2)
    dense = spinn_point_forward(spec, params, pts).reshape(4, 5, 2)
    np.testing.assert_allclose(grid, dense, atol=1e-12)


def test_axis_count_mismatch_rejected(rng):
    spec = NetworkSpec(kind="separable", layer_widths=(1, 4, 4), axes=2, rank=2, n_out=2)
    params = init_params(spec, 1)
    with pytest.raises(ValueError):
        spinn_forward(spec, params, [np.linspace(0, 1, 3)])


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec(kind="mlp", layer_widths=(2, 1))  # no hidden layer
    with pytest.raises(ValueError):
        NetworkSpec(kind="mlp", layer_widths=(2, 0, 1))  # zero width
    with pytest.raises(ValueError):
        NetworkSpec(kind="separable", layer_widths=(1, 4, 5), axes=2, rank=2, n_out=2)
    with pytest.raises(ValueError):
        NetworkSpec(kind="mlp", layer_widths=(2, 4, 1), activation="gelu")
