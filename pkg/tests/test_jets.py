"""Second-order jets: Taylor propagation rules against finite differences."""

import numpy as np
import pytest

from pinn2snn import NetworkSpec, jet2_forward
from pinn2snn.jets import Jet2, jet_batch
from pinn2snn.network import LayerParams, stack_jet_forward


def second_diff(f, x, h=1e-3):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def first_diff(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def identity_relu_stack():
    # relu with positive inputs acts as the identity map
    return [
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
    ]


def test_identity_map_jet():
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 1, 1), activation="relu")
    pts = np.array([[0.3], [1.7], [2.5]])
    value, d1, d2 = jet2_forward(spec, identity_relu_stack(), pts, 0)
    np.testing.assert_allclose(value, pts, atol=0.0)
    np.testing.assert_allclose(d1, np.ones_like(pts), atol=0.0)
    np.testing.assert_allclose(d2, np.zeros_like(pts), atol=0.0)


def test_exact_sine_network_at_zero():
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 1, 1), activation="sin")
    params = [
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
    ]
    value, d1, d2 = jet2_forward(spec, params, np.array([[0.0]]), 0)
    assert value[0, 0] == 0.0
    assert d1[0, 0] == 1.0
    assert d2[0, 0] == 0.0


def test_random_tanh_net_second_derivative(rng):
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 8, 1))
    params = [
        LayerParams(weights=rng.uniform(-1, 1, size=(1, 8)), bias=rng.uniform(-0.3, 0.3, size=8)),
        LayerParams(weights=rng.uniform(-1, 1, size=(8, 1)), bias=rng.uniform(-0.3, 0.3, size=1)),
    ]
    xs = rng.uniform(-1.5, 1.5, size=5)

    def scalar_net(x):
        h = np.tanh(np.array([[x]]) @ params[0].weights + params[0].bias)
        return float((h @ params[1].weights + params[1].bias)[0, 0])

    value, d1, d2 = jet2_forward(spec, params, xs.reshape(-1, 1), 0)
    for i, x in enumerate(xs):
        assert value[i, 0] == pytest.approx(scalar_net(x), rel=1e-12)
        assert d1[i, 0] == pytest.approx(first_diff(scalar_net, x), rel=1e-6)
        assert d2[i, 0] == pytest.approx(second_diff(scalar_net, x), rel=1e-4, abs=1e-8)


def test_composition_matches_fd(rng):
    # tanh(exp(0.5 x)) - sin(x)^2: mixed chain and product rules
    def composite(j: Jet2) -> Jet2:
        return (j * 0.5).exp().tanh() - j.sin().square()

    def plain(x):
        return np.tanh(np.exp(0.5 * x)) - np.sin(x) ** 2

    xs = rng.uniform(-1.2, 1.2, size=7)
    jet = composite(Jet2.seed(xs, True))
    for i, x in enumerate(xs):
        assert jet.value[i] == pytest.approx(plain(x), rel=1e-12)
        assert jet.d1[i] == pytest.approx(first_diff(plain, x), rel=1e-6)
        assert jet.d2[i] == pytest.approx(second_diff(plain, x), rel=1e-4, abs=1e-8)


def test_product_rule_exact():
    # (sin * exp)'' = -sin*exp + 2cos*exp + sin*exp = 2cos*exp
    x = 0.37
    jet = Jet2.seed(np.array([x]), True)
    prod = jet.sin() * jet.exp()
    assert prod.d2[0] == pytest.approx(2.0 * np.cos(x) * np.exp(x), rel=1e-12)


def test_relu_jet_gates_derivatives():
    jet = Jet2.seed(np.array([-1.0, 2.0]), True)
    out = jet.relu()
    np.testing.assert_allclose(out.value, [0.0, 2.0], atol=0.0)
    np.testing.assert_allclose(out.d1, [0.0, 1.0], atol=0.0)


def test_coordinate_index_validated():
    with pytest.raises(ValueError):
        jet_batch(np.zeros((3, 2)), 2)
    with pytest.raises(ValueError):
        jet_batch(np.zeros(3), 0)


def test_unsupported_activation_rejected():
    stack = identity_relu_stack()
    with pytest.raises(ValueError):
        stack_jet_forward(stack, "softplus", jet_batch(np.zeros((1, 1)), 0))
