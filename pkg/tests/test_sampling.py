"""Collocation generation: meshes, boundaries, determinism."""

import numpy as np
import pytest

from pinn2snn import CollocationCounts, get_problem, sample_collocation


def test_sine_mesh_is_equispaced():
    problem = get_problem("sin_regression")
    colloc = sample_collocation(problem, CollocationCounts(interior=100), seed=0)
    expected = np.linspace(-np.pi, np.pi, 100).reshape(-1, 1)
    np.testing.assert_array_equal(colloc.interior, expected)


def test_square_boundary_points_sit_on_the_boundary():
    problem = get_problem("poisson")
    colloc = sample_collocation(problem, CollocationCounts(interior=64, boundary=48), seed=0)
    edge = np.max(np.abs(colloc.boundary), axis=1)
    np.testing.assert_allclose(edge, 1.0, atol=0.0)
    # interior strictly inside
    assert np.max(np.abs(colloc.interior)) < 1.0


def test_time_problem_faces():
    problem = get_problem("wave")
    colloc = sample_collocation(problem, CollocationCounts(interior=64, boundary=20, initial=16), seed=0)
    assert np.all(np.isin(colloc.boundary[:, 0], (-1.0, 1.0)))
    assert np.all(colloc.initial[:, 1] == 0.0)
    # interior excludes the initial face
    assert np.min(colloc.interior[:, 1]) > 0.0


def test_random_sampler_is_deterministic_per_seed():
    problem = get_problem("beltrami")
    counts = CollocationCounts(interior=50, boundary=16, initial=10)
    a = sample_collocation(problem, counts, seed=5)
    b = sample_collocation(problem, counts, seed=5)
    c = sample_collocation(problem, counts, seed=6)
    assert np.array_equal(a.interior, b.interior)
    assert np.array_equal(a.boundary, b.boundary)
    assert not np.array_equal(a.interior, c.interior)
    lows = np.array([-1.0, -1.0, 0.0])
    highs = np.array([1.0, 1.0, 1.0])
    assert np.all(a.interior >= lows) and np.all(a.interior <= highs)


def test_separable_axis_points_span_domain():
    problem = get_problem("burgers")
    colloc = sample_collocation(problem, CollocationCounts(per_axis=16), seed=0, separable=True)
    assert len(colloc.axis_points) == 2
    np.testing.assert_allclose(colloc.axis_points[0][[0, -1]], [0.0, 2 * np.pi])
    np.testing.assert_allclose(colloc.axis_points[1][[0, -1]], [0.0, 4.0])
    assert colloc.interior.shape == (256, 2)


def test_counts_must_be_positive():
    problem = get_problem("poisson")
    with pytest.raises(ValueError):
        sample_collocation(problem, CollocationCounts(interior=0), seed=0)


def test_degenerate_domain_rejected():
    with pytest.raises(ValueError):
        get_problem("poisson", domain=((0.0, 0.0), (-1.0, 1.0)))
