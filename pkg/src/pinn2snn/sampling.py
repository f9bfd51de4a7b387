"""Collocation point generation.

1-D/2-D problems use uniform meshes (interior points strictly inside the
box, the initial face excluded from the interior); 3-D interiors are
sampled uniformly at random from a seeded generator.  Separable runs carry
one uniform 1-D mesh per axis instead of dense point sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import Problem


@dataclass(frozen=True)
class CollocationCounts:
    interior: int = 10_000
    boundary: int = 400
    initial: int = 400
    per_axis: int = 64


@dataclass
class CollocationSet:
    interior: np.ndarray
    boundary: np.ndarray | None = None
    initial: np.ndarray | None = None
    axis_points: list[np.ndarray] | None = None

    def all_points(self) -> np.ndarray:
        """Every dense sample in one batch (calibration default)."""
        parts = [p for p in (self.interior, self.boundary, self.initial) if p is not None]
        return np.concatenate(parts, axis=0)


def _validate(counts: CollocationCounts) -> None:
    if min(counts.interior, counts.boundary, counts.initial, counts.per_axis) <= 0:
        raise ValueError("collocation counts must be positive")


def _axis_mesh(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _interior_mesh_2d(problem: Problem, n_total: int) -> np.ndarray:
    n_side = max(2, int(round(np.sqrt(n_total))))
    axes = []
    for axis, (lo, hi) in enumerate(problem.domain):
        pts = np.linspace(lo, hi, n_side + 2)[1:-1]
        if axis == problem.time_axis:
            # keep the final time, drop only the initial face
            pts = np.linspace(lo, hi, n_side + 1)[1:]
        axes.append(pts)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _square_boundary(problem: Problem, n_total: int) -> np.ndarray:
    (x_lo, x_hi), (y_lo, y_hi) = problem.domain
    m = max(1, n_total // 4)
    xs = np.linspace(x_lo, x_hi, m, endpoint=False)
    ys = np.linspace(y_lo, y_hi, m, endpoint=False)
    edges = [
        np.stack([xs, np.full(m, y_lo)], axis=-1),
        np.stack([np.full(m, x_hi), ys], axis=-1),
        np.stack([x_lo + x_hi - xs, np.full(m, y_hi)], axis=-1),
        np.stack([np.full(m, x_lo), y_lo + y_hi - ys], axis=-1),
    ]
    return np.concatenate(edges, axis=0)


def _time_sides(problem: Problem, n_total: int) -> np.ndarray:
    (x_lo, x_hi), (t_lo, t_hi) = problem.domain
    m = max(2, n_total // 2)
    ts = np.linspace(t_lo, t_hi, m)
    left = np.stack([np.full(m, x_lo), ts], axis=-1)
    right = np.stack([np.full(m, x_hi), ts], axis=-1)
    return np.concatenate([left, right], axis=0)


def _initial_face(problem: Problem, n_total: int) -> np.ndarray:
    (x_lo, x_hi), (t_lo, _) = problem.domain
    xs = np.linspace(x_lo, x_hi, n_total)
    return np.stack([xs, np.full(n_total, t_lo)], axis=-1)


def _random_box(rng: np.random.Generator, domain, n: int) -> np.ndarray:
    lows = np.array([lo for lo, _ in domain])
    highs = np.array([hi for _, hi in domain])
    return lows + (highs - lows) * rng.random((n, len(domain)))


def _beltrami_dense(problem: Problem, counts: CollocationCounts, rng) -> CollocationSet:
    interior = _random_box(rng, problem.domain, counts.interior)
    (x_lo, x_hi), (y_lo, y_hi), (t_lo, t_hi) = problem.domain
    m = max(1, counts.boundary // 4)
    faces = []
    for axis, fixed in ((0, x_lo), (0, x_hi), (1, y_lo), (1, y_hi)):
        pts = _random_box(rng, problem.domain, m)
        pts[:, axis] = fixed
        faces.append(pts)
    boundary = np.concatenate(faces, axis=0)
    initial = _random_box(rng, problem.domain, counts.initial)
    initial[:, 2] = t_lo
    return CollocationSet(interior=interior, boundary=boundary, initial=initial)


def sample_collocation(
    problem: Problem,
    counts: CollocationCounts | None = None,
    seed: int = 0,
    separable: bool = False,
) -> CollocationSet:
    """Deterministic collocation points for one training run."""
    counts = counts or CollocationCounts()
    _validate(counts)
    for lo, hi in problem.domain:
        if lo >= hi:
            raise ValueError(f"degenerate domain axis [{lo}, {hi}]")

    if separable:
        axis_points = [
            _axis_mesh(lo, hi, counts.per_axis) for lo, hi in problem.domain
        ]
        # interior kept for calibration/eval convenience: the mesh grid flattened
        grids = np.meshgrid(*axis_points, indexing="ij")
        dense = np.stack([g.ravel() for g in grids], axis=-1)
        return CollocationSet(interior=dense, axis_points=axis_points)

    if problem.is_regression:
        (lo, hi) = problem.domain[0]
        mesh = np.linspace(lo, hi, counts.interior).reshape(-1, 1)
        return CollocationSet(interior=mesh)

    if problem.input_dim == 2:
        interior = _interior_mesh_2d(problem, counts.interior)
        if problem.time_axis is None:
            return CollocationSet(
                interior=interior, boundary=_square_boundary(problem, counts.boundary)
            )
        return CollocationSet(
            interior=interior,
            boundary=_time_sides(problem, counts.boundary),
            initial=_initial_face(problem, counts.initial),
        )

    rng = np.random.default_rng(seed)
    if problem.id == "beltrami":
        return _beltrami_dense(problem, counts, rng)
    raise ValueError(f"no dense sampler for problem {problem.id!r}")
