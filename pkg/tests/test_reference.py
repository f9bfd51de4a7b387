"""Reference oracles cross-checked against independent constructions."""

import numpy as np
import pytest

from pinn2snn import get_problem
from pinn2snn import reference as R
from pinn2snn.problems import Wave


def test_beltrami_closed_form_points():
    prob = get_problem("beltrami")
    # u(0,1,0) = -cos(0) sin(1)
    field = R.reference_solution(prob, (np.array([0.0]), np.array([1.0]), np.array([0.0])))
    assert field[0, 0, 0, 0] == pytest.approx(-np.sin(1.0), abs=1e-15)
    # p(0,0,0) = -(cos0 + cos0)/4
    field = R.reference_solution(prob, (np.array([0.0]), np.array([0.0]), np.array([0.0])))
    assert field[0, 0, 0, 2] == pytest.approx(-0.5, abs=1e-15)


def test_wave_initial_profile_values():
    x = np.array([0.0, -1.0, 1.0, 0.4, -0.4])
    vals = Wave.profile(x)
    expected = [1.0, 0.0, 0.0, (0.6 - 0.4) / (0.6 - 0.245), (0.6 - 0.4) / (0.6 - 0.245)]
    np.testing.assert_allclose(vals, expected, atol=1e-15)


def test_wave_matches_closed_form_transport():
    # zero initial velocity: u = (g(x+t) + g(x-t))/2 with g the odd
    # 4-periodic extension of the start profile about the pinned ends
    def extension(s):
        s = (s + 1.0) % 4.0 - 1.0
        if s > 1.0:
            return -float(Wave.profile(np.array([2.0 - s]))[0])
        return float(Wave.profile(np.array([s]))[0])

    prob = get_problem("wave")
    xs = np.linspace(-1, 1, 81)
    ts = np.array([0.0, 0.25, 0.5])
    field = R.reference_solution(prob, (xs, ts))
    for i, x in enumerate(xs):
        for j, t in enumerate(ts):
            expected = 0.5 * (extension(x + t) + extension(x - t))
            assert field[i, j, 0] == pytest.approx(expected, abs=1e-12)


def test_poisson_center_against_eigenfunction_series():
    total = 0.0
    for m in range(1, 400, 2):
        for n in range(1, 400, 2):
            total += (
                16.0 / (m * n * np.pi**2)
                * 4.0 / (np.pi**2 * (m**2 + n**2))
                * np.sin(m * np.pi / 2.0)
                * np.sin(n * np.pi / 2.0)
            )
    prob = get_problem("poisson")
    center = R.reference_solution(prob, (np.array([0.0]), np.array([0.0])))[0, 0, 0]
    assert center == pytest.approx(total, abs=5e-5)


def burgers_quadrature(x: float, t: float, nu: float) -> float:
    """Independent closed-form evaluation via the heat substitution.

    The sign-flipped unknown satisfies the classic advection form, whose
    solution is a ratio of two integrals; evaluated with exponent
    stabilization on a dense window around the characteristic foot.
    """
    half = 1.6 * (1.0 + t) + 6.0 * np.sqrt(2.0 * nu * t)
    xi = np.linspace(x - half, x + half, 60001)
    potential = (np.cos(xi) - 1.0) + (x - xi) ** 2 / (2.0 * t)
    exponent = -potential / (2.0 * nu)
    weights = np.exp(exponent - exponent.max())
    v = np.trapezoid((x - xi) / t * weights, xi) / np.trapezoid(weights, xi)
    return -v


def test_burgers_oracle_matches_quadrature():
    prob = get_problem("burgers")
    pts = [(1.0, 0.5), (2.0, 1.0), (4.5, 2.0), (0.4, 3.0), (6.0, 3.5)]
    for x, t in pts:
        ref = R.reference_solution(prob, (np.array([x]), np.array([t])))[0, 0, 0]
        assert ref == pytest.approx(burgers_quadrature(x, t, prob.nu), abs=2e-5)


def test_burgers_initial_slice_is_exact_sine():
    # linear interpolation between the oracle's 4096 nodes costs ~3e-7
    prob = get_problem("burgers")
    xs = np.linspace(0, 2 * np.pi, 64)
    field = R.reference_solution(prob, (xs, np.array([0.0])))
    np.testing.assert_allclose(field[:, 0, 0], np.sin(xs), atol=1e-6)


def test_diffusion_reaction_grid_convergence():
    x1, _, f1 = R._diffusion_reaction_fine(nx=801)
    x2, _, f2 = R._diffusion_reaction_fine(nx=401)
    assert np.max(np.abs(f1[::2, :] - f2)) < 5e-5


def test_diffusion_reaction_residual_at_reference():
    # FD residual on the oracle's own grid stays below its discretization error
    prob = get_problem("diffusion_reaction")
    xs, ts, f = R._diffusion_reaction_fine()
    dx, dt = xs[1] - xs[0], ts[1] - ts[0]
    u_t = (f[:, 2:] - f[:, :-2]) / (2 * dt)
    u_xx = (f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / dx**2
    residual = u_t[1:-1, :] - u_xx - prob.k * f[1:-1, 1:-1] ** 2
    assert np.sqrt(np.mean(residual**2)) < 5e-3


def test_sine_reference():
    prob = get_problem("sin_regression")
    xs = np.linspace(-np.pi, np.pi, 33)
    np.testing.assert_array_equal(
        R.reference_solution(prob, (xs,))[:, 0], np.sin(xs)
    )


def test_out_of_domain_grid_rejected():
    prob = get_problem("poisson")
    with pytest.raises(ValueError):
        R.reference_solution(prob, (np.array([0.0, 1.5]), np.array([0.0])))
