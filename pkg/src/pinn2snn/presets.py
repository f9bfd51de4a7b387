"""Desk-scale run presets: small enough for a laptop core, accurate enough
for the shipped validation suite.  Everything here is overridable from the
command line or a config file."""

from __future__ import annotations

from dataclasses import dataclass, field

from .calibration import CalibrationConfig
from .network import NetworkSpec
from .optim import OptimizerConfig
from .sampling import CollocationCounts


@dataclass(frozen=True)
class RunPreset:
    problem: str
    spec: NetworkSpec
    epochs: int
    counts: CollocationCounts
    optimizer: OptimizerConfig
    timesteps: int = 32
    target_loss: float | None = None
    calibration: CalibrationConfig = field(
        default_factory=lambda: CalibrationConfig(steps=1500, lr=2e-3)
    )


PRESETS: dict[str, RunPreset] = {
    "sin_regression": RunPreset(
        problem="sin_regression",
        spec=NetworkSpec(kind="mlp", layer_widths=(1, 40, 40, 1)),
        epochs=50_000,
        counts=CollocationCounts(interior=200),
        optimizer=OptimizerConfig(lr=3e-3, decay_every=8000, decay_factor=0.6),
        target_loss=9e-8,
    ),
    "poisson": RunPreset(
        problem="poisson",
        spec=NetworkSpec(kind="mlp", layer_widths=(2, 100, 100, 100, 1)),
        epochs=2500,
        counts=CollocationCounts(interior=1024, boundary=256),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=900, decay_factor=0.6),
    ),
    "diffusion_reaction": RunPreset(
        problem="diffusion_reaction",
        spec=NetworkSpec(kind="mlp", layer_widths=(2, 100, 100, 100, 1)),
        epochs=1500,
        counts=CollocationCounts(interior=1024, boundary=128, initial=256),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=600, decay_factor=0.6),
    ),
    "wave": RunPreset(
        problem="wave",
        spec=NetworkSpec(kind="mlp", layer_widths=(2, 100, 100, 100, 1)),
        epochs=3000,
        counts=CollocationCounts(interior=1152, boundary=128, initial=256),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=1000, decay_factor=0.6),
    ),
    "burgers": RunPreset(
        problem="burgers",
        spec=NetworkSpec(kind="mlp", layer_widths=(2, 40, 40, 40, 40, 40, 40, 1)),
        epochs=6000,
        counts=CollocationCounts(interior=3072, boundary=128, initial=256),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=2000, decay_factor=0.6),
    ),
    "burgers_separable": RunPreset(
        problem="burgers",
        spec=NetworkSpec(
            kind="separable", layer_widths=(1, 40, 40, 40, 32), axes=2, rank=32, n_out=1
        ),
        epochs=8000,
        counts=CollocationCounts(per_axis=96),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=2500, decay_factor=0.6),
    ),
    "beltrami_separable": RunPreset(
        problem="beltrami",
        spec=NetworkSpec(
            kind="separable", layer_widths=(1, 50, 50, 96), axes=3, rank=32, n_out=3
        ),
        epochs=4000,
        counts=CollocationCounts(per_axis=20),
        optimizer=OptimizerConfig(lr=2e-3, decay_every=1500, decay_factor=0.6),
    ),
    "beltrami_dense": RunPreset(
        problem="beltrami",
        spec=NetworkSpec(kind="mlp", layer_widths=(3, 128, 128, 128, 128, 3)),
        epochs=5,
        counts=CollocationCounts(interior=8000, boundary=400, initial=400),
        optimizer=OptimizerConfig(lr=1e-3),
    ),
}


def preset_for(problem_id: str, separable: bool = False) -> RunPreset:
    key = f"{problem_id}_separable" if separable else problem_id
    if key in PRESETS:
        return PRESETS[key]
    if problem_id in PRESETS:
        return PRESETS[problem_id]
    raise KeyError(f"no preset for {problem_id!r}")
