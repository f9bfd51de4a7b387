"""Second-order forward-mode jets for input derivatives of networks.

A :class:`Jet2` carries (value, d1, d2) with respect to one chosen input
coordinate and propagates them through sums, products and the smooth
activations by exact Taylor rules.  Components may be plain floats, numpy
arrays, or :class:`~pinn2snn.tensor.Tensor` values; in the latter case the
whole jet computation is recorded on the active gradient tape, so losses
built from PDE residuals stay differentiable w.r.t. the weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor

_HALF_PI = np.pi / 2.0


def _tanh(v):
    return v.tanh() if isinstance(v, Tensor) else np.tanh(v)


def _sin(v):
    return v.sin() if isinstance(v, Tensor) else np.sin(v)


def _cos(v):
    # cos(x) = sin(x + pi/2); keeps the primitive set closed under Tensors.
    if isinstance(v, Tensor):
        return (v + _HALF_PI).sin()
    return np.cos(v)


def _exp(v):
    return v.exp() if isinstance(v, Tensor) else np.exp(v)


def _square(v):
    return v.square() if isinstance(v, Tensor) else np.square(v)


def _relu(v):
    return v.relu() if isinstance(v, Tensor) else np.maximum(v, 0.0)


def _raw(v) -> np.ndarray:
    return v.data if isinstance(v, Tensor) else np.asarray(v, dtype=np.float64)


@dataclass
class Jet2:
    """Value plus first and second derivative w.r.t. one input coordinate."""

    value: object
    d1: object
    d2: object

    @classmethod
    def seed(cls, value, seeded: bool) -> "Jet2":
        v = np.asarray(value, dtype=np.float64)
        one = np.ones_like(v) if seeded else np.zeros_like(v)
        return cls(v, one, np.zeros_like(v))

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)
        return Jet2(self.value + other, self.d1, self.d2)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)
        return Jet2(self.value - other, self.d1, self.d2)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.value * other.value,
                self.d1 * other.value + self.value * other.d1,
                self.d2 * other.value + 2.0 * (self.d1 * other.d1) + self.value * other.d2,
            )
        return Jet2(self.value * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def _any_tensor(self) -> bool:
        return (
            isinstance(self.value, Tensor)
            or isinstance(self.d1, Tensor)
            or isinstance(self.d2, Tensor)
        )

    # -- chain rules ----------------------------------------------------
    # Taped components route through the fused one-record kernels; plain
    # arrays take the closed forms directly.

    def tanh(self) -> "Jet2":
        if self._any_tensor():
            return Jet2(*T.tanh_jet(self.value, self.d1, self.d2))
        t = _tanh(self.value)
        f1 = 1.0 - _square(t)
        f2 = -2.0 * (t * f1)
        return Jet2(t, f1 * self.d1, f2 * _square(self.d1) + f1 * self.d2)

    def sin(self) -> "Jet2":
        if self._any_tensor():
            return Jet2(*T.sin_jet(self.value, self.d1, self.d2))
        s = _sin(self.value)
        c = _cos(self.value)
        return Jet2(s, c * self.d1, -1.0 * (s * _square(self.d1)) + c * self.d2)

    def exp(self) -> "Jet2":
        e = _exp(self.value)
        return Jet2(e, e * self.d1, e * (_square(self.d1) + self.d2))

    def square(self) -> "Jet2":
        return Jet2(
            _square(self.value),
            2.0 * (self.value * self.d1),
            2.0 * (_square(self.d1) + self.value * self.d2),
        )

    def relu(self) -> "Jet2":
        if self._any_tensor():
            return Jet2(*T.relu_jet(self.value, self.d1, self.d2))
        # the gate is a constant w.r.t. differentiation away from the kink
        gate = (_raw(self.value) > 0.0).astype(np.float64)
        return Jet2(_relu(self.value), self.d1 * gate, self.d2 * gate)


JET_ACTIVATIONS = {
    "tanh": Jet2.tanh,
    "sin": Jet2.sin,
    "relu": Jet2.relu,
}


def jet_affine(jet: Jet2, weights, bias) -> Jet2:
    """Push a jet through ``x @ W + b``; linear maps commute with d/dx."""
    return Jet2(jet.value @ weights + bias, jet.d1 @ weights, jet.d2 @ weights)


def jet_batch(points: np.ndarray, coordinate_index: int) -> Jet2:
    """Seed a jet for a batch of points, differentiating one coordinate."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("expected a (n, d) batch of points")
    if not 0 <= coordinate_index < points.shape[1]:
        raise ValueError(
            f"coordinate index {coordinate_index} out of range for dimension {points.shape[1]}"
        )
    d1 = np.zeros_like(points)
    d1[:, coordinate_index] = 1.0
    return Jet2(points, d1, np.zeros_like(points))
