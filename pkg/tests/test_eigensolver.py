import numpy as np
import pytest

from anisoeig.eigensolver import (SolveConfig, minimize_fractional, minimize_local,
                                  rayleigh_fractional, rayleigh_local, s_sweep)
from anisoeig.grid import BoxDomain, GridFunction, build_grid, sample, zeros
from anisoeig.norms import fractional_seminorm, gradient_norm, mixed_norm
from anisoeig.variations import F_p, H_prime_residual

from conftest import random_instance, rel


def unit(n, k):
    return build_grid(BoxDomain.unit(n), (k,) * n)


def one_dim_minimum(p):
    """Minimum of ||u'||_p / ||u||_p over W_0^{1,p}(0, 1)."""
    return 2 * np.pi * (p - 1) ** (1 / p) / (p * np.sin(np.pi / p))


@pytest.fixture(scope="module")
def line_p2():
    return minimize_local((2.0,), unit(1, 255), SolveConfig(restarts=2))


def test_rayleigh_local_examples(rng):
    grid, p, s, u, _ = random_instance(rng)
    q = rayleigh_local(u, p)
    for t in (-1.0, 0.5, 7.0):
        assert rel(rayleigh_local(u * t, p), q) <= 1e-12
    with pytest.raises(ValueError):
        rayleigh_local(zeros(grid), p)

    u = sample(lambda x: np.sin(np.pi * x), unit(1, 255))
    assert rayleigh_local(u, (2,)) == pytest.approx(np.pi, rel=1e-2)
    u = sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y), unit(2, 63))
    assert rayleigh_local(u, (2, 2)) == pytest.approx(2 * np.pi, rel=2e-2)


def test_rayleigh_fractional_examples(rng):
    grid, p, s, u, _ = random_instance(rng, n=2)
    q = rayleigh_fractional(u, s, p)
    for t in (-1.0, 0.5, 7.0):
        assert rel(rayleigh_fractional(u * t, s, p), q) <= 1e-12
    # reflection changes the mixed norm of a generic field, so compare the seminorm
    flipped = u.with_values(u.values[::-1, ::-1])
    assert rel(fractional_seminorm(flipped, s, p), fractional_seminorm(u, s, p)) <= 1e-12
    with pytest.raises(ValueError):
        rayleigh_fractional(zeros(grid), s, p)


def test_solve_config_validation():
    for bad in [dict(tol_residual=0), dict(max_iter=0), dict(backtrack_factor=1.0),
                dict(backtrack_factor=0.0), dict(restarts=0), dict(initial_step=-1)]:
        with pytest.raises(ValueError):
            SolveConfig(**bad)


def test_line_p2_reproduces_pi(line_p2):
    rep = line_p2
    assert rep.converged and rep.lambda_ > 0
    assert rep.lambda_ == pytest.approx(np.pi, rel=1e-2)
    x = rep.u.grid.axis_nodes(0)
    sine = np.sin(np.pi * x)
    cos_sim = abs(np.dot(rep.u.values, sine)) / np.linalg.norm(rep.u.values) / np.linalg.norm(sine)
    assert cos_sim >= 0.999


def test_report_invariants(line_p2):
    rep = line_p2
    p = (2.0,)
    assert abs(mixed_norm(rep.u, p) - 1.0) <= 1e-12
    assert abs(rep.lambda_ - gradient_norm(rep.u, p) / mixed_norm(rep.u, p)) <= 1e-10
    r = H_prime_residual(rep.u, p).values - rep.lambda_ * F_p(rep.u, p).values
    assert mixed_norm(rep.u.with_values(r), (2.0,)) == pytest.approx(rep.residual, rel=1e-12)
    assert rep.residual <= SolveConfig().tol_residual
    qs = [q for _, q, _ in rep.history]
    assert all(b <= a for a, b in zip(qs, qs[1:]))
    assert rep.history[-1][0] == rep.iterations
    vals = rep.u.values
    assert np.all(vals >= 0) or np.all(vals <= 0)
    assert rep.history_csv().splitlines()[0] == "iter,Q,residual"


@pytest.mark.parametrize("p", [3.0, 1.5])
def test_line_matches_closed_form(p):
    rep = minimize_local((p,), unit(1, 255), SolveConfig(restarts=1, tol_residual=1e-4))
    assert rep.lambda_ == pytest.approx(one_dim_minimum(p), rel=2e-3)
    assert rep.converged


def test_square_and_domain_monotonicity():
    cfg = SolveConfig(restarts=1)
    small = minimize_local((2, 2), unit(2, 31), cfg)
    big = minimize_local((2, 2), build_grid(BoxDomain((0, 0), (1.2, 1.2)), (31, 31)), cfg)
    assert small.converged and big.converged
    assert small.lambda_ == pytest.approx(2 * np.pi, rel=2e-2)
    assert small.lambda_ >= big.lambda_
    assert big.lambda_ == pytest.approx(2 * np.pi / 1.2, rel=2e-2)


def test_anisotropic_solve_is_consistent():
    grid = build_grid(BoxDomain((0, 0), (1.0, 0.8)), (23, 19))
    p = (1.5, 3.0)
    rep = minimize_local(p, grid, SolveConfig(restarts=1, tol_residual=1e-5))
    assert rep.converged
    assert abs(rep.lambda_ - rayleigh_local(rep.u, p)) <= 1e-10
    # the product of the two 1D minimizers is admissible, so it bounds lambda from above
    prod = sample(lambda x, y: np.sin(np.pi * x / 1.0) * np.sin(np.pi * y / 0.8), grid)
    assert rep.lambda_ <= rayleigh_local(prod, p)


def test_non_convergence_is_reported_not_raised():
    rep = minimize_local((2.0,), unit(1, 63), SolveConfig(max_iter=1, restarts=1))
    assert not rep.converged and rep.iterations == 1


def test_restarts_are_thread_count_independent():
    grid = unit(2, 15)
    a = minimize_local((1.8, 2.5), grid, SolveConfig(restarts=3, threads=1))
    b = minimize_local((1.8, 2.5), grid, SolveConfig(restarts=3, threads=3))
    assert a.lambda_ == b.lambda_ and a.restart == b.restart
    np.testing.assert_array_equal(a.u.values, b.u.values)
    assert a.history == b.history


def test_discrete_poincare_local(line_p2, rng):
    grid = line_p2.u.grid
    for _ in range(200):
        u = GridFunction(grid, rng.standard_normal(grid.shape) * rng.uniform(1e-3, 1e3))
        assert rayleigh_local(u, (2.0,)) >= line_p2.lambda_ - 1e-6


def test_fractional_solve_identities(rng):
    grid = unit(1, 63)
    rep = minimize_fractional((0.5,), (2.0,), grid, SolveConfig(restarts=1))
    assert rep.converged and rep.lambda_ > 0
    assert abs(rep.lambda_ - rayleigh_fractional(rep.u, (0.5,), (2.0,))) <= 1e-10
    for _ in range(100):
        u = GridFunction(grid, rng.standard_normal(grid.shape))
        assert rayleigh_fractional(u, (0.5,), (2.0,)) >= rep.lambda_ - 1e-6
    doubled = minimize_fractional((0.5,), (2.0,), grid, SolveConfig(restarts=1), window=256)
    assert rel(doubled.lambda_, rep.lambda_) <= 1e-6


def test_fractional_near_one_is_close_to_local():
    rep = minimize_fractional((0.9,), (2.0,), unit(1, 127), SolveConfig(restarts=1))
    assert rep.lambda_ == pytest.approx(np.pi, rel=0.25)


def test_fractional_two_dimensional():
    grid = unit(2, 11)
    rep = minimize_fractional((0.6, 0.7), (1.8, 2.4), grid, SolveConfig(restarts=1))
    assert rep.converged
    assert abs(rep.lambda_ - rayleigh_fractional(rep.u, (0.6, 0.7), (1.8, 2.4))) <= 1e-10


def test_s_sweep_table():
    table = s_sweep((2.0,), unit(1, 63), [0.6, 0.9], SolveConfig(restarts=1))
    assert len(table.rows) == 2 and len(table.reports) == 2
    assert table.rows[0].lambda_local == table.rows[1].lambda_local
    for row in table.rows:
        assert row.lambda_s > 0 and row.lambda_local_limit > 0
        assert row.ratio == pytest.approx(row.lambda_s / row.lambda_local_limit, rel=1e-15)
    lines = table.csv().splitlines()
    assert lines[0] == "s,lambda_s,lambda_local,lambda_local_limit,ratio,converged"
    assert lines[1].startswith("0.6,") and len(lines) == 3
    with pytest.raises(ValueError):
        s_sweep((2.0,), unit(1, 15), [])


def test_s_sweep_limit_weights_for_p_not_two():
    table = s_sweep((3.0,), unit(1, 31), [0.9], SolveConfig(restarts=1, tol_residual=1e-5))
    row = table.rows[0]
    assert row.lambda_local_limit == pytest.approx((2 / 3) ** (1 / 3) * row.lambda_local,
                                                   rel=1e-6)
