"""Shared fixtures: small trained networks reused across test modules."""

from __future__ import annotations

import numpy as np
import pytest

from pinn2snn import (
    CollocationCounts,
    NetworkSpec,
    OptimizerConfig,
    get_problem,
    sample_collocation,
    train,
)


@pytest.fixture(scope="session")
def sin_fast():
    """A quickly trained sine net: realistic weights without full convergence."""
    problem = get_problem("sin_regression")
    spec = NetworkSpec(kind="mlp", layer_widths=(1, 40, 40, 1))
    counts = CollocationCounts(interior=200)
    model, log = train(
        problem,
        spec,
        epochs=2500,
        seed=1,
        counts=counts,
        optimizer=OptimizerConfig(lr=3e-3),
    )
    colloc = sample_collocation(problem, counts, seed=1)
    return {
        "problem": problem,
        "model": model,
        "log": log,
        "data": colloc.interior,
    }


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
