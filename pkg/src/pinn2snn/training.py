"""Full-batch training on the physics loss."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .losses import physics_loss
from .network import LayerParams, Model, NetworkSpec, init_params
from .optim import AdamState, OptimizerConfig, adam_step
from .problems import Problem
from .sampling import CollocationCounts, CollocationSet, sample_collocation
from .tensor import GradTape, Tensor

DIVERGENCE_LIMIT = 1e6


@dataclass
class TrainLog:
    epochs: list[int] = field(default_factory=list)
    total: list[float] = field(default_factory=list)
    components: dict[str, list[float]] = field(default_factory=dict)
    seconds: list[float] = field(default_factory=list)
    final_loss: float = float("nan")

    def append(self, epoch: int, comps: dict[str, float], elapsed: float) -> None:
        self.epochs.append(epoch)
        self.total.append(comps["total"])
        for key, value in comps.items():
            if key == "total":
                continue
            self.components.setdefault(key, []).append(value)
        self.seconds.append(elapsed)

    @property
    def mean_epoch_seconds(self) -> float:
        return float(np.mean(self.seconds)) if self.seconds else float("nan")


class TrainingDivergedError(RuntimeError):
    def __init__(self, message: str, log: TrainLog):
        self.log = log
        super().__init__(message)


def _tensorize(spec: NetworkSpec, params) -> tuple[list, list[Tensor], list[np.ndarray]]:
    """Wrap parameter arrays in tensors, keeping the nested structure."""
    flat_tensors: list[Tensor] = []
    flat_arrays: list[np.ndarray] = []

    def wrap_stack(stack):
        wrapped = []
        for layer in stack:
            w, b = Tensor(layer.weights), Tensor(layer.bias)
            # alias the tensor buffers so in-place optimizer steps land in `params`
            layer.weights, layer.bias = w.data, b.data
            flat_tensors.extend((w, b))
            flat_arrays.extend((w.data, b.data))
            wrapped.append(LayerParams(weights=w, bias=b))
        return wrapped

    if spec.kind == "mlp":
        return wrap_stack(params), flat_tensors, flat_arrays
    return [wrap_stack(stack) for stack in params], flat_tensors, flat_arrays


def train(
    problem: Problem,
    spec: NetworkSpec,
    epochs: int,
    seed: int = 0,
    optimizer: OptimizerConfig | None = None,
    counts: CollocationCounts | None = None,
    colloc: CollocationSet | None = None,
    target_loss: float | None = None,
) -> tuple[Model, TrainLog]:
    """Full-batch Adam on the physics loss; deterministic per seed.

    Stops early once ``target_loss`` is reached (the reported final loss is
    evaluated at the returned parameters).  Raises
    :class:`TrainingDivergedError` when the loss exceeds ``1e6`` or goes
    non-finite.
    """
    cfg = optimizer or OptimizerConfig()
    if colloc is None:
        colloc = sample_collocation(
            problem, counts, seed=seed, separable=(spec.kind == "separable")
        )
    params = init_params(spec, seed)
    tensor_params, flat_tensors, flat_arrays = _tensorize(spec, params)
    state = AdamState.for_params(flat_arrays, cfg)
    log = TrainLog()

    final = float("nan")
    for epoch in range(epochs):
        started = time.perf_counter()
        with GradTape() as tape:
            tape.watch(*flat_tensors)
            total, comps = physics_loss(problem, spec, tensor_params, colloc)
        final = comps["total"]
        if not np.isfinite(final) or final > DIVERGENCE_LIMIT:
            log.final_loss = final
            raise TrainingDivergedError(
                f"{problem.id}: loss {final:.3e} at epoch {epoch}; aborting", log
            )
        if target_loss is not None and final <= target_loss:
            log.append(epoch, comps, time.perf_counter() - started)
            break
        grads = tape.gradient(total, flat_tensors)
        adam_step(flat_arrays, grads, state, lr=cfg.lr_at(epoch))
        log.append(epoch, comps, time.perf_counter() - started)

    if epochs == 0:
        _, comps = physics_loss(problem, spec, tensor_params, colloc)
        final = comps["total"]

    log.final_loss = final
    model = Model(
        spec=spec,
        params=params,
        meta={
            "problem": problem.id,
            "epochs": len(log.epochs),
            "final_loss": final,
            "seed": seed,
        },
    )
    return model, log
