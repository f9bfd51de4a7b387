"""Reference solutions: analytic where available, numeric oracles otherwise.

* sine regression, Beltrami flow: closed forms.
* Poisson: second-order finite differences on a fine square grid.
* diffusion-reaction: method of lines (central differences + RK4).
* Burgers: method of lines on a fine periodic Fourier grid (spectral
  derivatives, 2/3-rule dealiasing, RK4).
* wave: leapfrog marching at unit Courant number, which transports the
  piecewise-linear start exactly along characteristics at the nodes; the
  profile corner locations fall on grid points by construction.

Fine-grid solves are cached per process and interpolated onto request
grids.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import identity, kron
from scipy.sparse import diags as sparse_diags
from scipy.sparse.linalg import spsolve

from .problems import Beltrami, Problem, Wave


class OracleError(RuntimeError):
    """A numeric oracle failed to produce a trustworthy field."""


def _grid(axes) -> list[np.ndarray]:
    return [np.asarray(a, dtype=np.float64).ravel() for a in axes]


# -- Poisson -------------------------------------------------------------


@lru_cache(maxsize=None)
def _poisson_fine(n: int = 161):
    xs = np.linspace(-1.0, 1.0, n)
    h = xs[1] - xs[0]
    m = n - 2
    main = sparse_diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m))
    eye = identity(m, format="csr")
    lap = (kron(eye, main) + kron(main, eye)) / h**2
    rhs = np.ones(m * m)
    u_inner = spsolve(lap.tocsr(), rhs)
    if not np.all(np.isfinite(u_inner)):
        raise OracleError("poisson solve produced non-finite values")
    u = np.zeros((n, n))
    u[1:-1, 1:-1] = u_inner.reshape(m, m)
    return xs, u


# -- diffusion-reaction ----------------------------------------------------


@lru_cache(maxsize=None)
def _diffusion_reaction_fine(nx: int = 801, n_slices: int = 101):
    from .problems import DiffusionReaction

    prob = DiffusionReaction()
    xs = np.linspace(-1.0, 1.0, nx)
    dx = xs[1] - xs[0]
    t_end = prob.domain[1][1]
    dt = 0.4 * dx * dx  # RK4 diffusion stability with margin
    steps_per_slice = max(1, int(np.ceil(t_end / (n_slices - 1) / dt)))
    dt = t_end / (n_slices - 1) / steps_per_slice

    u = prob._profile(xs.reshape(-1, 1)).ravel()
    edge = (u[0], u[-1])  # Dirichlet: hold the initial trace

    def rhs(v):
        out = np.zeros_like(v)
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx**2 + prob.k * v[1:-1] ** 2
        return out

    ts = np.linspace(0.0, t_end, n_slices)
    field = np.empty((nx, n_slices))
    field[:, 0] = u
    for s in range(1, n_slices):
        for _ in range(steps_per_slice):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * dt * k1)
            k3 = rhs(u + 0.5 * dt * k2)
            k4 = rhs(u + dt * k3)
            u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            u[0], u[-1] = edge
        if not np.all(np.isfinite(u)):
            raise OracleError("diffusion-reaction oracle diverged")
        field[:, s] = u
    return xs, ts, field


# -- wave ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _wave_fine(nx: int = 401):
    xs = np.linspace(-1.0, 1.0, nx)
    dx = xs[1] - xs[0]
    t_end = 0.5
    nt = int(round(t_end / dx)) + 1
    u_prev = Wave.profile(xs.copy())
    u_prev[0] = u_prev[-1] = 0.0
    # zero initial velocity at unit Courant number
    u_cur = np.zeros_like(u_prev)
    u_cur[1:-1] = 0.5 * (u_prev[2:] + u_prev[:-2])
    field = np.empty((nx, nt))
    field[:, 0] = u_prev
    if nt > 1:
        field[:, 1] = u_cur
    for s in range(2, nt):
        u_next = np.zeros_like(u_cur)
        u_next[1:-1] = u_cur[2:] + u_cur[:-2] - u_prev[1:-1]
        u_prev, u_cur = u_cur, u_next
        field[:, s] = u_cur
    ts = np.linspace(0.0, t_end, nt)
    return xs, ts, field


# -- Burgers ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _burgers_fine(nu: float, n_modes: int = 4096, n_slices: int = 161):
    length = 2.0 * np.pi
    xs = np.arange(n_modes) * (length / n_modes)
    k = np.fft.rfftfreq(n_modes, d=1.0 / n_modes) * (2.0 * np.pi / length)
    dealias = k <= (2.0 / 3.0) * k.max()
    ik = 1j * k
    k2 = k * k

    t_end = 4.0
    lam = nu * k.max() ** 2
    dt = min(2.5 / lam, 1.5 / k.max())
    steps_per_slice = max(1, int(np.ceil(t_end / (n_slices - 1) / dt)))
    dt = t_end / (n_slices - 1) / steps_per_slice

    def rhs(uhat):
        u = np.fft.irfft(uhat, n=n_modes)
        # u_t = +(u^2/2)_x + nu u_xx for this advection sign
        quad = np.fft.rfft(0.5 * u * u) * dealias
        return ik * quad - nu * k2 * uhat

    uhat = np.fft.rfft(np.sin(xs))
    field = np.empty((n_modes, n_slices))
    field[:, 0] = np.sin(xs)
    for s in range(1, n_slices):
        for _ in range(steps_per_slice):
            k1 = rhs(uhat)
            k2_ = rhs(uhat + 0.5 * dt * k1)
            k3 = rhs(uhat + 0.5 * dt * k2_)
            k4 = rhs(uhat + dt * k3)
            uhat = uhat + dt / 6.0 * (k1 + 2.0 * k2_ + 2.0 * k3 + k4)
        u = np.fft.irfft(uhat, n=n_modes)
        if not np.all(np.isfinite(u)):
            raise OracleError("burgers oracle diverged")
        field[:, s] = u
    ts = np.linspace(0.0, t_end, n_slices)
    # close the periodic seam so interpolation covers x = 2*pi
    xs_closed = np.append(xs, length)
    field_closed = np.vstack([field, field[:1, :]])
    return xs_closed, ts, field_closed


# -- dispatch ----------------------------------------------------------------


def _interpolate_2d(xs, ts, field, axes):
    interp = RegularGridInterpolator((xs, ts), field, method="linear", bounds_error=False, fill_value=None)
    gx, gt = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([gx.ravel(), gt.ravel()], axis=-1)
    return interp(pts).reshape(len(axes[0]), len(axes[1]), 1)


def reference_solution(problem: Problem, axes) -> np.ndarray:
    """Reference field on the tensor grid of ``axes``.

    Returns shape (n_1, ..., n_d, n_fields).
    """
    axes = _grid(axes)
    problem.check_inside(axes)

    if problem.id == "sin_regression":
        return np.sin(axes[0]).reshape(-1, 1)

    if problem.id == "beltrami":
        gx, gy, gt = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), gt.ravel()], axis=-1)
        vals = Beltrami.exact(pts)
        return vals.reshape(len(axes[0]), len(axes[1]), len(axes[2]), 3)

    if problem.id == "poisson":
        xs, u = _poisson_fine()
        interp = RegularGridInterpolator((xs, xs), u, method="linear")
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        return interp(pts).reshape(len(axes[0]), len(axes[1]), 1)

    if problem.id == "diffusion_reaction":
        xs, ts, field = _diffusion_reaction_fine()
        return _interpolate_2d(xs, ts, field, axes)

    if problem.id == "wave":
        xs, ts, field = _wave_fine()
        return _interpolate_2d(xs, ts, field, axes)

    if problem.id == "burgers":
        xs, ts, field = _burgers_fine(problem.nu)
        return _interpolate_2d(xs, ts, field, axes)

    raise KeyError(f"no reference solution for {problem.id!r}")
