"""Benchmark problems: one sine regression and five PDE boundary-value setups.

Each problem knows its domain box, which derivative orders its residual
needs per axis, and its boundary/initial data.  Residuals are written
against a field map ``F`` (a dict like ``{"u": ..., "u_x": ..., ...}``)
whose entries may be numpy arrays or taped tensors, so the same residual
code serves training, diagnostics and oracle checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossWeights:
    pde: float = 1.0
    bc: float = 1.0
    ic: float = 1.0


class Problem:
    id: str = ""
    axis_names: tuple[str, ...] = ()
    domain: tuple[tuple[float, float], ...] = ()
    field_names: tuple[str, ...] = ("u",)
    # Highest derivative order the residual takes along each axis.
    deriv_orders: tuple[int, ...] = ()
    time_axis: int | None = None
    has_initial_velocity: bool = False
    is_regression: bool = False

    def __init__(self, weights: LossWeights | None = None, domain=None):
        self.weights = weights or LossWeights()
        if domain is not None:
            domain = tuple((float(lo), float(hi)) for lo, hi in domain)
            if len(domain) != len(self.axis_names):
                raise ValueError(f"{self.id}: domain needs {len(self.axis_names)} axes")
            if any(lo >= hi for lo, hi in domain):
                raise ValueError(f"{self.id}: degenerate domain {domain}")
            self.domain = domain

    @property
    def input_dim(self) -> int:
        return len(self.axis_names)

    @property
    def n_out(self) -> int:
        return len(self.field_names)

    def residual(self, F: dict) -> list:
        raise NotImplementedError

    def boundary_value(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def initial_value(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def reference(self, axes: tuple[np.ndarray, ...]) -> np.ndarray:
        from . import reference

        return reference.reference_solution(self, axes)

    def check_inside(self, axes: tuple[np.ndarray, ...]) -> None:
        if len(axes) != self.input_dim:
            raise ValueError(f"{self.id}: expected {self.input_dim} grid axes")
        for vals, (lo, hi), name in zip(axes, self.domain, self.axis_names):
            v = np.asarray(vals)
            if v.size == 0 or v.min() < lo - 1e-12 or v.max() > hi + 1e-12:
                raise ValueError(f"{self.id}: axis {name} leaves the domain [{lo}, {hi}]")


class SinRegression(Problem):
    """Fit sin(x) on a uniform mesh over [-pi, pi]; plain MSE, no PDE terms."""

    id = "sin_regression"
    axis_names = ("x",)
    domain = ((-np.pi, np.pi),)
    deriv_orders = (0,)
    is_regression = True

    def target(self, pts: np.ndarray) -> np.ndarray:
        return np.sin(pts[:, :1])


class Poisson(Problem):
    """-lap(u) = 1 on the square [-1,1]^2 with u = 0 on the boundary."""

    id = "poisson"
    axis_names = ("x", "y")
    domain = ((-1.0, 1.0), (-1.0, 1.0))
    deriv_orders = (2, 2)

    def residual(self, F):
        return [-1.0 * (F["u_xx"] + F["u_yy"]) - 1.0]

    def boundary_value(self, pts):
        return np.zeros((pts.shape[0], 1))


class DiffusionReaction(Problem):
    """u_t - u_xx = k u^2 with a Gaussian initial bump, short horizon.

    The sides x = +-1 hold the (tiny) initial trace values; over t <= 0.01
    the bump barely reaches them.
    """

    id = "diffusion_reaction"
    axis_names = ("x", "t")
    domain = ((-1.0, 1.0), (0.0, 0.01))
    deriv_orders = (2, 1)
    time_axis = 1
    k = 1.0
    sigma = 0.25

    def _profile(self, x: np.ndarray) -> np.ndarray:
        return np.exp(-(x**2) / (2.0 * self.sigma**2))

    def residual(self, F):
        u = F["u"]
        return [F["u_t"] - F["u_xx"] - self.k * (u * u)]

    def boundary_value(self, pts):
        return self._profile(pts[:, :1])

    def initial_value(self, pts):
        return self._profile(pts[:, :1])


class Wave(Problem):
    """u_tt = u_xx with a trapezoid initial profile, zero initial velocity.

    Profile: 1 on [-0.245, 0.245], 0 on [-1,-0.6] and [0.6,1], linear ramps
    between; ends pinned to zero.
    """

    id = "wave"
    axis_names = ("x", "t")
    domain = ((-1.0, 1.0), (0.0, 0.5))
    deriv_orders = (2, 2)
    time_axis = 1
    has_initial_velocity = True

    @staticmethod
    def profile(x: np.ndarray) -> np.ndarray:
        ax = np.abs(x)
        ramp = (0.6 - ax) / (0.6 - 0.245)
        return np.clip(np.where(ax <= 0.245, 1.0, ramp), 0.0, 1.0)

    def residual(self, F):
        return [F["u_tt"] - F["u_xx"]]

    def boundary_value(self, pts):
        return np.zeros((pts.shape[0], 1))

    def initial_value(self, pts):
        return self.profile(pts[:, :1])


class Burgers(Problem):
    """u_t - (u^2/2)_x = nu u_xx on [0, 2pi] x [0, 4] with u(x,0) = sin x.

    nu is configurable; by default 0.01/pi, which develops a steep interior
    gradient.  With this advection sign and the sine start the solution
    stays odd about x = 0 (mod 2pi), so u = 0 at both ends is exact and is
    used as the training boundary condition; the oracle integrates
    periodically.
    """

    id = "burgers"
    axis_names = ("x", "t")
    domain = ((0.0, 2.0 * np.pi), (0.0, 4.0))
    deriv_orders = (2, 1)
    time_axis = 1

    def __init__(self, weights=None, domain=None, nu: float = 0.01 / np.pi):
        super().__init__(weights, domain)
        if nu <= 0:
            raise ValueError("viscosity must be positive")
        self.nu = float(nu)

    def residual(self, F):
        u = F["u"]
        return [F["u_t"] - u * F["u_x"] - self.nu * F["u_xx"]]

    def boundary_value(self, pts):
        return np.zeros((pts.shape[0], 1))

    def initial_value(self, pts):
        return np.sin(pts[:, :1])


class Beltrami(Problem):
    """Unsteady incompressible flow at Re = 1 with a closed-form solution.

    Fields (u, v, p) on [-1,1]^2 x [0,1]; boundary and initial data are read
    off the analytic solution.
    """

    id = "beltrami"
    axis_names = ("x", "y", "t")
    domain = ((-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0))
    field_names = ("u", "v", "p")
    deriv_orders = (2, 2, 1)
    time_axis = 2
    re = 1.0

    @staticmethod
    def exact(pts: np.ndarray) -> np.ndarray:
        x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
        u = -np.cos(x) * np.sin(y) * np.exp(-2.0 * t)
        v = np.sin(x) * np.cos(y) * np.exp(-2.0 * t)
        p = -0.25 * (np.cos(2.0 * x) + np.cos(2.0 * y)) * np.exp(-4.0 * t)
        return np.stack([u, v, p], axis=-1)

    def residual(self, F):
        inv_re = 1.0 / self.re
        u, v = F["u"], F["v"]
        mom_x = (
            F["u_t"] + u * F["u_x"] + v * F["u_y"] + F["p_x"]
            - inv_re * (F["u_xx"] + F["u_yy"])
        )
        mom_y = (
            F["v_t"] + u * F["v_x"] + v * F["v_y"] + F["p_y"]
            - inv_re * (F["v_xx"] + F["v_yy"])
        )
        divergence = F["u_x"] + F["v_y"]
        return [mom_x, mom_y, divergence]

    def boundary_value(self, pts):
        return self.exact(pts)

    def initial_value(self, pts):
        return self.exact(pts)


_PROBLEMS = {
    cls.id: cls
    for cls in (SinRegression, Poisson, DiffusionReaction, Wave, Burgers, Beltrami)
}

PROBLEM_IDS = tuple(_PROBLEMS)


def get_problem(problem_id: str, **kwargs) -> Problem:
    try:
        cls = _PROBLEMS[problem_id]
    except KeyError:
        raise KeyError(f"unknown problem {problem_id!r}; known: {', '.join(_PROBLEMS)}") from None
    return cls(**kwargs)
