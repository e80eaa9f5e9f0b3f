import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dyckfold import limit_law as ll

# 30-digit evaluation of A sin(sqrt(2x)) (mpmath), frozen
A_30 = 0.985703987376736720716025089958
F_AT_1 = 0.973644831559993785396857406118
F_AT_HALF = 0.829441304986973035084954659568


def method_of_steps_reference(x_end=4):
    """Independent delay solve: adaptive DOP853 per unit interval, delay read from
    the previous interval's dense output."""
    prev = lambda t: 1.0 - A_30 * np.sin(np.sqrt(2.0 * t))  # noqa: E731
    y0 = [1.0 - F_AT_1, -A_30 * math.cos(math.sqrt(2)) / math.sqrt(2)]
    pieces = []
    for j in range(1, x_end):
        delay = prev

        def rhs(x, y, delay=delay):
            return [y[1], (delay(x - 1) - y[0] - y[1]) / (2 * x)]

        sol = solve_ivp(rhs, (j, j + 1), y0, method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
        pieces.append(sol.sol)
        prev = lambda t, s=sol.sol: s(t)[0]  # noqa: E731
        y0 = sol.y[:, -1]
    return pieces


@pytest.mark.parametrize("n,expected", [(1, Fraction(1, 4)), (2, Fraction(1, 12)), (3, Fraction(1, 24))])
def test_cumulant_values(n, expected):
    assert ll.cumulant(n) == expected


def test_cumulant_domain():
    with pytest.raises(ValueError):
        ll.cumulant(0)


def test_cgf_taylor_coefficients():
    kappa = ll.cumulants_from_cgf(8)
    for n in range(1, 9):
        assert kappa[n - 1] == pytest.approx(float(ll.cumulant(n)), rel=1e-12)


def test_cgf_matches_series():
    z = 0.7 + 0.3j
    series = sum(z ** (n + 1) / (2 * (n + 1) * math.factorial(n + 2)) for n in range(40))
    assert abs(ll.cgf(z) - series) < 1e-15


def test_constants():
    assert ll.AMPLITUDE == pytest.approx(A_30, rel=1e-15)
    assert ll.EULER_GAMMA == pytest.approx(0.5772156649015328606, rel=1e-16)


def test_closed_form_values():
    assert ll.F_closed_form(0.0) == 0.0
    assert ll.F_closed_form(1.0) == pytest.approx(F_AT_1, rel=1e-14)
    assert ll.F_closed_form(0.5) == pytest.approx(F_AT_HALF, rel=1e-14)
    with pytest.raises(ValueError):
        ll.F_closed_form(1.5)
    with pytest.raises(ValueError):
        ll.F_closed_form(-0.1)


def test_closed_form_solves_equation_below_one():
    xs = np.linspace(1e-3, 1 - 1e-3, 999)
    assert np.max(np.abs(ll.closed_form_residual(xs))) < 1e-12
    assert ll.unit_interval_ode_deviation() < 1e-8


def test_table_basic_invariants(f_table):
    F = f_table.F
    assert F[0] == 0.0
    assert np.all(np.diff(F) >= -1e-14)
    assert np.all(F <= 1.0)
    assert f_table.error_estimate < 1e-12
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(f_table.cdf(x) - ll.F_closed_form(x))) < 1e-8


def test_table_agrees_with_independent_solver(f_table):
    pieces = method_of_steps_reference()
    for j, sol in enumerate(pieces, start=1):
        xs = np.linspace(j, j + 1, 41)
        ref = 1.0 - sol(xs)[0]
        assert np.max(np.abs(f_table.cdf(xs) - ref)) < 1e-10
        assert np.max(np.abs(f_table._hermite(xs, f_table.F, f_table.dF) - ref)) < 1e-10


def test_derivative_continuous_at_integers(f_table):
    h = f_table.dx
    for j in range(1, int(f_table.x_max)):
        i = int(round(j / h))
        left = (f_table.F[i] - f_table.F[i - 1]) / h
        right = (f_table.F[i + 1] - f_table.F[i]) / h
        assert abs(left - right) < 1e-3 * max(1.0, abs(f_table.dF[i])) + 1e-12


def test_moments(f_table):
    assert abs(f_table.mean() - 0.25) < 1e-4
    assert abs(f_table.variance() - 1 / 12) < 1e-3
    # the solver is much better than the stated tolerances
    assert abs(f_table.mean() - 0.25) < 1e-10
    assert abs(f_table.variance() - 1 / 12) < 1e-9


def test_shorter_table_still_gets_moments():
    t = ll.solve_F(4.0)
    assert abs(t.mean() - 0.25) < 1e-8
    assert abs(t.variance() - 1 / 12) < 1e-7


def test_solver_preconditions():
    with pytest.raises(ValueError):
        ll.solve_F(0.5)
    with pytest.raises(ValueError):
        ll.solve_F(4.0, 2e-3)
    with pytest.raises(ValueError):
        ll.solve_F(4.0, 3e-4)
    with pytest.raises(ll.SolverToleranceError):
        ll.solve_F(4.0, 1e-3, tol=1e-18)


def test_limit_of_normalized_cost(g_table):
    assert g_table.cdf(1.0) == 0.0
    assert g_table.cdf(0.5) == 0.0
    assert abs(g_table.mean() - 7 / 4) < 1e-8
    assert abs(g_table.variance() - 1 / 6) < 1e-8
    assert np.all(np.diff(g_table.F) >= -1e-14)
    # G(2) = integral_0^1 F
    assert g_table.cdf(2.0) == pytest.approx(A_30 * (math.sin(math.sqrt(2)) - math.sqrt(2) * math.cos(math.sqrt(2))), abs=1e-10)


def test_tail(f_table):
    assert f_table.survival(3.0) < 1e-2
    assert np.all(np.diff(f_table.sf[f_table.x >= 2]) <= 1e-14)
    assert ll.tail_decay_check(f_table)
    xs, ratio = ll.tail_profile(f_table)
    assert xs[0] == 2.0 and xs[-1] >= 5.0
    assert np.all(ratio < 0)
    with pytest.raises(ValueError):
        ll.tail_decay_check(ll.solve_F(3.0))


def test_poisson_point_counts():
    assert ll.expected_point_count(math.exp(-2)) == pytest.approx(1.0)
    rng = np.random.default_rng(5)
    samples = [ll.sample_poisson_process(rng, 1e-4) for _ in range(20_000)]
    counts = np.array([s.points.size for s in samples])
    lam = ll.expected_point_count(1e-4)
    assert abs(counts.mean() - lam) < 4 * math.sqrt(lam / counts.size)
    pts = np.concatenate([s.points for s in samples])
    assert pts.min() > 1e-4 and pts.max() <= 1
    # (1/2) ln(1/a) of the points fall in (a, 1]
    above = np.mean([np.sum(s.points > 0.1) for s in samples])
    assert abs(above - ll.expected_point_count(1e-4, 0.1)) < 0.03
    assert all(0 <= s.X_value <= s.points.sum() for s in samples[:100])


def test_simulated_mean_and_ks(f_table):
    xs = ll.simulate_X(11, size=10**6)
    assert abs(xs.mean() - 0.25) < 0.001
    assert ll.ks_distance(xs, f_table) < 0.005
    assert isinstance(ll.simulate_X(3), float)
    with pytest.raises(ValueError):
        ll.simulate_X(3, eps=0.0)


def test_tsv_output(f_table):
    lines = f_table.to_tsv(0.5).splitlines()
    assert len(lines) == 17
    x, f = map(float, lines[2].split("\t"))
    assert x == 1.0 and f == pytest.approx(F_AT_1, abs=1e-11)
