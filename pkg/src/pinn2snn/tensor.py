"""Dense float64 tensors with a reverse-mode gradient tape.

The primitive set is deliberately small: add, sub, mul, matmul, tanh, sin,
exp, square, relu, sum, mean, plus the structural ops reshape and
index_last.  That is exactly what the regression losses and PDE residuals
in this package need.  Gradients are recorded on an explicit ``GradTape``;
watched tensors receive exact reverse-mode derivatives, everything else is
treated as a constant.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

__all__ = ["Tensor", "GradTape", "GradError", "grad"]

_uid_counter = itertools.count(1)
_TAPE_STACK: list["GradTape"] = []


class GradError(ValueError):
    """Invalid gradient request: non-scalar loss, unknown parameter, reused tape."""


def _active_tape() -> "GradTape | None":
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _data(x) -> np.ndarray:
    if isinstance(x, Tensor):
        return x.data
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, (gs, ss) in enumerate(zip(g.shape, shape)):
        if ss == 1 and gs != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _accumulate(adjoints: dict, uid: int, g: np.ndarray) -> None:
    cur = adjoints.get(uid)
    adjoints[uid] = g if cur is None else cur + g


class Tensor:
    """Row-major float64 array.  Non-finite entries are rejected on entry."""

    __slots__ = ("data", "uid")
    # Never let numpy consume a Tensor operand; reflected dunders must run.
    __array_ufunc__ = None

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor holds non-finite entries")
        self.data = arr
        self.uid = next(_uid_counter)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        t = object.__new__(cls)
        t.data = arr
        t.uid = next(_uid_counter)
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("tensor/tensor division is not a primitive; divide by scalars")
        return mul(self, 1.0 / float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    # -- primitives as methods ----------------------------------------

    def tanh(self):
        return tanh(self)

    def sin(self):
        return sin(self)

    def exp(self):
        return exp(self)

    def square(self):
        return square(self)

    def relu(self):
        return relu(self)

    def sum(self, axis=None):
        return tensor_sum(self, axis=axis)

    def mean(self):
        return tensor_mean(self)

    def reshape(self, shape):
        return reshape(self, shape)


class GradTape:
    """Records primitive ops touching watched tensors; one backward pass each.

    Usage::

        with GradTape() as tape:
            tape.watch(w)
            loss = ((x @ w).tanh().square()).mean()
        (gw,) = tape.gradient(loss, [w])
    """

    def __init__(self):
        self._records: list[tuple[int, object]] = []
        self._tracked: set[int] = set()
        self._used = False

    def __enter__(self) -> "GradTape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _TAPE_STACK.pop()

    def watch(self, *tensors: Tensor) -> None:
        for t in tensors:
            if not isinstance(t, Tensor):
                raise TypeError("can only watch Tensor instances")
            self._tracked.add(t.uid)

    def _live(self, x) -> bool:
        return isinstance(x, Tensor) and x.uid in self._tracked

    def _record(self, out: Tensor, backward) -> None:
        self._tracked.add(out.uid)
        self._records.append((out.uid, backward))

    def gradient(self, loss: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
        """Exact derivative of the recorded scalar ``loss`` w.r.t. each param."""
        if self._used:
            raise GradError("tape already differentiated; record a fresh forward pass")
        self._used = True
        if not isinstance(loss, Tensor) or loss.size != 1:
            raise GradError("loss must be a scalar tensor")
        if loss.uid not in self._tracked:
            raise GradError("loss was not recorded on this tape")
        adjoints: dict[int, np.ndarray] = {loss.uid: np.ones_like(loss.data)}
        for out_uid, backward in reversed(self._records):
            if out_uid is None:
                # fused multi-output op; fetches its own adjoints
                backward(None, adjoints)
                continue
            g = adjoints.get(out_uid)
            if g is None:
                continue
            backward(g, adjoints)
        grads = []
        for p in params:
            if p.uid not in self._tracked:
                raise GradError("parameter was not watched on this tape")
            if p.uid not in adjoints:
                raise GradError("parameter did not participate in the recorded computation")
            grads.append(np.asarray(adjoints[p.uid]))
        return grads


def grad(tape: GradTape, loss: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
    """Functional spelling of :meth:`GradTape.gradient`."""
    return tape.gradient(loss, params)


# -- primitive operations ----------------------------------------------


def add(a, b) -> Tensor:
    ad, bd = _data(a), _data(b)
    out = Tensor._wrap(ad + bd)
    tape = _active_tape()
    if tape is not None:
        la, lb = tape._live(a), tape._live(b)
        if la or lb:
            a_uid = a.uid if la else None
            b_uid = b.uid if lb else None
            a_shape, b_shape = ad.shape, bd.shape

            def backward(g, adjoints):
                if a_uid is not None:
                    _accumulate(adjoints, a_uid, _unbroadcast(g, a_shape))
                if b_uid is not None:
                    _accumulate(adjoints, b_uid, _unbroadcast(g, b_shape))

            tape._record(out, backward)
    return out


def sub(a, b) -> Tensor:
    ad, bd = _data(a), _data(b)
    out = Tensor._wrap(ad - bd)
    tape = _active_tape()
    if tape is not None:
        la, lb = tape._live(a), tape._live(b)
        if la or lb:
            a_uid = a.uid if la else None
            b_uid = b.uid if lb else None
            a_shape, b_shape = ad.shape, bd.shape

            def backward(g, adjoints):
                if a_uid is not None:
                    _accumulate(adjoints, a_uid, _unbroadcast(g, a_shape))
                if b_uid is not None:
                    _accumulate(adjoints, b_uid, _unbroadcast(-g, b_shape))

            tape._record(out, backward)
    return out


def mul(a, b) -> Tensor:
    ad, bd = _data(a), _data(b)
    out = Tensor._wrap(ad * bd)
    tape = _active_tape()
    if tape is not None:
        la, lb = tape._live(a), tape._live(b)
        if la or lb:
            a_uid = a.uid if la else None
            b_uid = b.uid if lb else None
            a_shape, b_shape = ad.shape, bd.shape

            def backward(g, adjoints):
                if a_uid is not None:
                    _accumulate(adjoints, a_uid, _unbroadcast(g * bd, a_shape))
                if b_uid is not None:
                    _accumulate(adjoints, b_uid, _unbroadcast(g * ad, b_shape))

            tape._record(out, backward)
    return out


def matmul(a, b) -> Tensor:
    ad, bd = _data(a), _data(b)
    if ad.ndim != 2 or bd.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {ad.shape} @ {bd.shape}")
    if ad.shape[1] != bd.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {ad.shape} @ {bd.shape}")
    out = Tensor._wrap(ad @ bd)
    tape = _active_tape()
    if tape is not None:
        la, lb = tape._live(a), tape._live(b)
        if la or lb:
            a_uid = a.uid if la else None
            b_uid = b.uid if lb else None

            def backward(g, adjoints):
                if a_uid is not None:
                    _accumulate(adjoints, a_uid, g @ bd.T)
                if b_uid is not None:
                    _accumulate(adjoints, b_uid, ad.T @ g)

            tape._record(out, backward)
    return out


def _unary(x, value: np.ndarray, local_grad_fn) -> Tensor:
    out = Tensor._wrap(value)
    tape = _active_tape()
    if tape is not None and tape._live(x):
        x_uid = x.uid

        def backward(g, adjoints):
            _accumulate(adjoints, x_uid, local_grad_fn(g))

        tape._record(out, backward)
    return out


def tanh(x) -> Tensor:
    xd = _data(x)
    y = np.tanh(xd)
    return _unary(x, y, lambda g: g * (1.0 - y * y))


def sin(x) -> Tensor:
    xd = _data(x)
    return _unary(x, np.sin(xd), lambda g: g * np.cos(xd))


def exp(x) -> Tensor:
    xd = _data(x)
    y = np.exp(xd)
    return _unary(x, y, lambda g: g * y)


def square(x) -> Tensor:
    xd = _data(x)
    return _unary(x, xd * xd, lambda g: g * (2.0 * xd))


def relu(x) -> Tensor:
    xd = _data(x)
    mask = (xd > 0.0).astype(np.float64)
    return _unary(x, xd * mask, lambda g: g * mask)


def tensor_sum(x, axis=None) -> Tensor:
    xd = _data(x)
    shape = xd.shape
    out = Tensor._wrap(np.sum(xd, axis=axis))

    def expand(g):
        if axis is None:
            return np.broadcast_to(g, shape).copy()
        axes = axis if isinstance(axis, tuple) else (axis,)
        axes = tuple(a % len(shape) for a in axes)
        return np.broadcast_to(np.expand_dims(g, axes), shape).copy()

    tape = _active_tape()
    if tape is not None and tape._live(x):
        x_uid = x.uid

        def backward(g, adjoints):
            _accumulate(adjoints, x_uid, expand(g))

        tape._record(out, backward)
    return out


def tensor_mean(x) -> Tensor:
    xd = _data(x)
    shape, n = xd.shape, xd.size
    out = Tensor._wrap(np.mean(xd))
    tape = _active_tape()
    if tape is not None and tape._live(x):
        x_uid = x.uid

        def backward(g, adjoints):
            _accumulate(adjoints, x_uid, np.broadcast_to(g / n, shape).copy())

        tape._record(out, backward)
    return out


def reshape(x, shape) -> Tensor:
    xd = _data(x)
    orig = xd.shape
    out = Tensor._wrap(xd.reshape(shape))
    tape = _active_tape()
    if tape is not None and tape._live(x):
        x_uid = x.uid

        def backward(g, adjoints):
            _accumulate(adjoints, x_uid, g.reshape(orig))

        tape._record(out, backward)
    return out


def index_last(x, idx: int) -> Tensor:
    """Select one index along the trailing axis (gradient scatters back)."""
    xd = _data(x)
    out = Tensor._wrap(xd[..., idx])
    tape = _active_tape()
    if tape is not None and tape._live(x):
        x_uid = x.uid
        shape = xd.shape

        def backward(g, adjoints):
            full = np.zeros(shape, dtype=np.float64)
            full[..., idx] = g
            _accumulate(adjoints, x_uid, full)

        tape._record(out, backward)
    return out


def mse(x) -> Tensor:
    """Mean of squared entries; the loss reduction used throughout."""
    return tensor_mean(square(x))


# -- fused jet activations ------------------------------------------------
#
# Propagating (value, d1, d2) through an activation costs ~9 elementwise
# primitives when written out; each fused op below records once and runs a
# closed-form backward, which dominates training throughput.


def _fused(inputs, outputs: tuple[np.ndarray, ...], backward_builder):
    outs = tuple(Tensor._wrap(o) for o in outputs)
    tape = _active_tape()
    if tape is not None and any(tape._live(x) for x in inputs):
        in_uids = tuple(x.uid if tape._live(x) else None for x in inputs)
        out_uids = tuple(o.uid for o in outs)
        for o in outs:
            tape._tracked.add(o.uid)
        core = backward_builder()

        def backward(_g, adjoints):
            gs = [adjoints.get(uid) for uid in out_uids]
            if all(g is None for g in gs):
                return
            grads = core(gs)
            for uid, grad in zip(in_uids, grads):
                if uid is not None and grad is not None:
                    _accumulate(adjoints, uid, grad)

        tape._records.append((None, backward))
    return outs


def tanh_jet(v, d1, d2):
    """(tanh(v), tanh'(v) d1, tanh''(v) d1^2 + tanh'(v) d2) in one record.

    Written with in-place updates: the large-array temporaries dominate
    training time, not the flops.
    """
    vd, d1d, d2d = _data(v), _data(d1), _data(d2)
    t = np.tanh(vd)
    f1 = t * t
    np.subtract(1.0, f1, out=f1)
    f2 = t * f1
    f2 *= -2.0
    o1 = f1 * d1d
    o2 = f2 * d1d
    o2 *= d1d
    tmp = f1 * d2d
    o2 += tmp
    outputs = (t, o1, o2)

    def build():
        def core(gs):
            # incoming adjoints are shared; never mutate them
            ga, gb, gc = gs
            gv = None
            gd1 = None
            gd2 = None
            if ga is not None:
                gv = ga * f1
            if gb is not None:
                term = gb * f2
                term *= d1d
                gv = term if gv is None else np.add(gv, term, out=gv)
                gd1 = gb * f1
            if gc is not None:
                # dv term: gc * ((6t^2 - 2) f1 d1^2 + f2 d2)
                acc = t * t
                acc *= 6.0
                acc -= 2.0
                acc *= f1
                acc *= d1d
                acc *= d1d
                tail = f2 * d2d
                acc += tail
                acc *= gc
                gv = acc if gv is None else np.add(gv, acc, out=gv)
                extra = gc * f2
                extra *= d1d
                extra *= 2.0
                gd1 = extra if gd1 is None else np.add(gd1, extra, out=gd1)
                gd2 = gc * f1
            return gv, gd1, gd2

        return core

    return _fused((v, d1, d2), outputs, build)


def sin_jet(v, d1, d2):
    vd, d1d, d2d = _data(v), _data(d1), _data(d2)
    s, c = np.sin(vd), np.cos(vd)
    outputs = (s, c * d1d, -s * d1d * d1d + c * d2d)

    def build():
        def core(gs):
            ga, gb, gc = gs
            gv = np.zeros_like(s)
            gd1 = None
            gd2 = None
            if ga is not None:
                gv += ga * c
            if gb is not None:
                gv += gb * (-s * d1d)
                gd1 = gb * c
            if gc is not None:
                gv += gc * (-c * d1d * d1d - s * d2d)
                extra = gc * (-2.0 * s * d1d)
                gd1 = extra if gd1 is None else gd1 + extra
                gd2 = gc * c
            return gv, gd1, gd2

        return core

    return _fused((v, d1, d2), outputs, build)


def relu_jet(v, d1, d2):
    vd, d1d, d2d = _data(v), _data(d1), _data(d2)
    gate = (vd > 0.0).astype(np.float64)
    outputs = (vd * gate, d1d * gate, d2d * gate)

    def build():
        def core(gs):
            ga, gb, gc = gs
            return (
                None if ga is None else ga * gate,
                None if gb is None else gb * gate,
                None if gc is None else gc * gate,
            )

        return core

    return _fused((v, d1, d2), outputs, build)
