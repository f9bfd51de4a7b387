"""Error decomposition identity; light and advanced calibration behavior."""

import copy

import numpy as np
import pytest

from pinn2snn import (
    CalibrationConfig,
    NetworkSpec,
    calibrate_advanced,
    calibrate_light,
    calibrate_separable,
    convert_to_snn,
    decompose_error,
    init_params,
    propagate_rate,
)
from pinn2snn.network import LayerParams, Model
from pinn2snn.pipeline import convert_and_calibrate


def random_converted(rng, widths=(2, 10, 10, 1), timesteps=16, n=64):
    spec = NetworkSpec(kind="mlp", layer_widths=widths)
    params = init_params(spec, 7)
    model = Model(spec=spec, params=params, meta={})
    batch = rng.uniform(-2, 2, size=(n, widths[0]))
    snn = convert_to_snn(model, batch, timesteps=timesteps)
    return model, snn, batch


def grid_relu_converted(timesteps=8):
    """Identity-like relu chain whose values land exactly on the staircase."""
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 1, 1, 1), activation="relu")
    params = [
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
    ]
    model = Model(spec=spec, params=params, meta={})
    batch = (np.arange(1, timesteps + 1) / timesteps).reshape(-1, 1)
    snn = convert_to_snn(model, batch, timesteps=timesteps)
    return model, snn, batch


def test_decomposition_identity_to_machine_precision(rng):
    model, snn, batch = random_converted(rng)
    dec = decompose_error(model, snn, batch)
    for e, er, ec in zip(dec.e, dec.e_r, dec.e_c):
        assert np.max(np.abs(e - (er + ec))) < 1e-12


def test_first_layer_has_no_inherited_drift(rng):
    # the spiking input of layer one is the network input itself
    model, snn, batch = random_converted(rng)
    dec = decompose_error(model, snn, batch)
    np.testing.assert_array_equal(dec.e_r[0], np.zeros_like(dec.e_r[0]))


def test_exact_quantization_has_zero_local_error():
    model, snn, batch = grid_relu_converted()
    dec = decompose_error(model, snn, batch)
    for ec in dec.e_c:
        np.testing.assert_array_equal(ec, np.zeros_like(ec))


def test_structure_mismatch_rejected(rng):
    model, snn, batch = random_converted(rng)
    other = Model(
        spec=NetworkSpec(kind="mlp", layer_widths=(2, 10, 1)),
        params=init_params(NetworkSpec(kind="mlp", layer_widths=(2, 10, 1)), 0),
        meta={},
    )
    with pytest.raises(ValueError):
        decompose_error(other, snn, batch)


# -- light ----------------------------------------------------------------------


def test_light_leaves_exact_network_unchanged():
    model, snn, batch = grid_relu_converted()
    before = [l.bias.copy() for l in snn.layers]
    calibrated, report = calibrate_light(model, snn, batch)
    for b0, layer in zip(before, calibrated.layers):
        np.testing.assert_array_equal(b0, layer.bias)
    assert report.pre_ec_norm == report.post_ec_norm


def test_light_recovers_injected_bias_offset():
    # values on the staircase grid, offset by a multiple of the step, and
    # chosen so the shift keeps everything strictly positive and in range:
    # the mean output gap is then exactly the injected constant
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 1, 1, 1), activation="relu")
    params = [
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
        LayerParams(weights=np.array([[1.0]]), bias=np.zeros(1)),
    ]
    model = Model(spec=spec, params=params, meta={})
    batch = (np.arange(3, 9) / 8.0).reshape(-1, 1)
    snn = convert_to_snn(model, batch, timesteps=8)
    offset = 2.0 / 8.0
    corrupted = snn.copy()
    corrupted.layers[1].bias = corrupted.layers[1].bias - offset
    calibrated, _ = calibrate_light(model, corrupted, batch)
    assert abs(calibrated.layers[1].bias[0] - snn.layers[1].bias[0]) < 1e-9


def test_light_reduces_hidden_local_error_on_sine_net(sin_fast):
    model, data = sin_fast["model"], sin_fast["data"]
    snn = convert_to_snn(model, data, timesteps=32)
    calibrated, _ = calibrate_light(model, snn, data)
    before = decompose_error(model, snn, data)
    after = decompose_error(model, calibrated, data)
    # hidden layers: quantization error must not grow; the output layer
    # deliberately absorbs upstream drift instead
    for b, a in zip(before.e_c[:-1], after.e_c[:-1]):
        assert np.mean(np.abs(a)) <= np.mean(np.abs(b)) + 1e-12


def test_light_rejects_empty_batch(rng):
    model, snn, _ = random_converted(rng)
    with pytest.raises(ValueError):
        calibrate_light(model, snn, np.zeros((0, 2)))


# -- advanced ----------------------------------------------------------------------


def test_advanced_exits_early_at_zero_error():
    model, snn, batch = grid_relu_converted()
    before_w = [l.weights.copy() for l in snn.layers]
    calibrated, report = calibrate_advanced(model, snn, batch, CalibrationConfig(steps=50))
    for w0, layer in zip(before_w, calibrated.layers):
        np.testing.assert_array_equal(w0, layer.weights)
    assert all(p == 0.0 for p in report.pre_ec_norm)


def test_advanced_recovers_scaled_weights(rng):
    # corrupt a single hidden layer by scaling its weights 1.2x
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 6, 1))
    params = init_params(spec, 3)
    model = Model(spec=spec, params=params, meta={})
    batch = rng.uniform(-1.0, 1.0, size=(128, 1))
    snn = convert_to_snn(model, batch, timesteps=256)
    corrupted = snn.copy()
    corrupted.layers[0].weights = corrupted.layers[0].weights * 1.2
    pre = decompose_error(model, corrupted, batch).ec_norms[0]
    calibrated, report = calibrate_advanced(
        model, corrupted, batch, CalibrationConfig(steps=3000, lr=5e-3)
    )
    post = decompose_error(model, calibrated, batch).ec_norms[0]
    assert post <= pre / 10.0


def test_advanced_never_worsens_any_layer(sin_fast, rng):
    model, data = sin_fast["model"], sin_fast["data"]
    snn = convert_to_snn(model, data, timesteps=16)
    _, report = calibrate_advanced(model, snn, data, CalibrationConfig(steps=300, lr=2e-3))
    for pre, post in zip(report.pre_ec_norm, report.post_ec_norm):
        assert post <= pre + 1e-15


def test_advanced_improves_end_to_end_on_calibration_data(sin_fast):
    model, data = sin_fast["model"], sin_fast["data"]
    snn_none = convert_to_snn(model, data, timesteps=32)
    snn_adv, _ = calibrate_advanced(model, snn_none, data, CalibrationConfig(steps=600, lr=2e-3))
    from pinn2snn import mlp_forward

    ann = mlp_forward(model.spec, model.params, data)
    out_none, _ = propagate_rate(snn_none, data)
    out_adv, _ = propagate_rate(snn_adv, data)
    err_none = np.sqrt(np.mean((out_none - ann) ** 2))
    err_adv = np.sqrt(np.mean((out_adv - ann) ** 2))
    assert err_adv <= err_none


def test_calibration_never_touches_the_ann(sin_fast):
    model, data = sin_fast["model"], sin_fast["data"]
    snapshot = copy.deepcopy(model.params)
    snn = convert_to_snn(model, data, timesteps=16)
    calibrate_light(model, snn, data)
    calibrate_advanced(model, snn, data, CalibrationConfig(steps=100))
    for before, after in zip(snapshot, model.params):
        np.testing.assert_array_equal(before.weights, after.weights)
        np.testing.assert_array_equal(before.bias, after.bias)
    # and the input spiking net is returned as a calibrated copy
    fresh = convert_to_snn(model, data, timesteps=16)
    calibrated, _ = calibrate_light(model, fresh, data)
    assert calibrated is not fresh


def test_advanced_requires_positive_steps(sin_fast):
    model, data = sin_fast["model"], sin_fast["data"]
    snn = convert_to_snn(model, data, timesteps=16)
    with pytest.raises(ValueError):
        calibrate_advanced(model, snn, data, CalibrationConfig(steps=0))


# -- separable ----------------------------------------------------------------------


def test_separable_calibration_labels_and_guarantee(rng):
    spec = NetworkSpec(kind="separable", layer_widths=(1, 8, 6), axes=2, rank=3, n_out=2)
    params = init_params(spec, 11)
    model = Model(spec=spec, params=params, meta={})
    axis_data = [np.linspace(-1, 1, 32), np.linspace(0, 1, 24)]
    snn = convert_to_snn(model, axis_data, timesteps=16)
    calibrated, report = calibrate_separable(
        model, snn, axis_data, mode="advanced", cfg=CalibrationConfig(steps=200, lr=2e-3)
    )
    assert len(report.layers) == 4  # two axes, two layers each
    assert report.layers[0].startswith("axis0.")
    for pre, post in zip(report.pre_ec_norm, report.post_ec_norm):
        assert post <= pre + 1e-15


def test_pipeline_mode_none_returns_uncalibrated(sin_fast):
    model, data = sin_fast["model"], sin_fast["data"]
    snn, report = convert_and_calibrate(model, data, 16, mode="none")
    assert report.mode == "none"
    assert report.layers == []
