"""Adam optimizer on flat lists of parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizerConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # Optional step decay: lr *= decay_factor every decay_every epochs (0 = off).
    decay_every: int = 0
    decay_factor: float = 0.5

    def lr_at(self, epoch: int) -> float:
        if self.decay_every <= 0:
            return self.lr
        return self.lr * self.decay_factor ** (epoch // self.decay_every)


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    @classmethod
    def for_params(cls, params: list[np.ndarray], config: OptimizerConfig | None = None) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            step=0,
            config=config or OptimizerConfig(),
        )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float | None = None,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update, applied in place.

    Returns the same ``params``/``state`` objects for chaining.  Deterministic:
    two runs from identical inputs produce bitwise identical parameters.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state must have matching lengths")
    for p, g, m in zip(params, grads, state.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch in adam_step: {p.shape} vs {g.shape}")
    cfg = state.config
    step_lr = cfg.lr if lr is None else lr
    state.step += 1
    t = state.step
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (g * g)
        p -= step_lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
    return params, state
