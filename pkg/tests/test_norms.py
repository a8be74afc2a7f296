import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from anisoeig.grid import BoxDomain, GridFunction, build_grid, forward_diff, sample, zeros
from anisoeig.norms import (bbm_weights, directional_norm, directional_norms, fractional_directional,
                            fractional_kernel, fractional_seminorm, fractional_terms,
                            gradient_norm, min_window, mixed_norm, partials)

from conftest import random_instance, rel

seeds = st.integers(0, 2**32 - 1)


def nested_loop_norm(values, p, h):
    """Mixed norm by explicit loops over every index, innermost axis first."""
    shape = values.shape
    n = len(shape)

    def level(j, outer):
        # I_j at the fixed outer index tuple (x_{j+1}, ..., x_n)
        total = 0.0
        for k in range(shape[j - 1]):
            if j == 1:
                val = abs(values[(k,) + outer])
            else:
                val = level(j - 1, (k,) + outer)
            total += val ** p[j - 1] * h[j - 1]
        return total ** (1.0 / p[j - 1])

    return level(n, ())


def test_nested_loop_oracle_is_sane():
    vals = np.array([[3.0]])
    assert nested_loop_norm(vals, (2.0, 3.0), (1.0, 1.0)) == pytest.approx(3.0)


@given(seed=seeds)
def test_mixed_norm_matches_nested_loops(seed):
    rng = np.random.default_rng(seed)
    grid, p, _, u, _ = random_instance(rng, n=3)
    assert rel(mixed_norm(u, p), nested_loop_norm(u.values, p, grid.spacings)) <= 1e-12


def test_mixed_norm_of_indicator():
    a = (1.0, 2.0, 0.5)
    counts = (9, 7, 5)
    p = (1.5, 2.0, 3.0)
    grid = build_grid(BoxDomain((0.0,) * 3, a), counts)
    u = GridFunction(grid, np.ones(grid.shape))
    # rectangle rule: each axis carries measure counts_i * spacing_i
    measure = [k * h for k, h in zip(counts, grid.spacings)]
    expect = np.prod([m ** (1 / q) for m, q in zip(measure, p)])
    assert rel(mixed_norm(u, p), expect) <= 1e-14
    # and it approaches prod a_i^(1/p_i) under refinement
    fine = build_grid(BoxDomain((0.0,) * 3, a), (399, 399, 399))
    approx = np.prod([(k * h) ** (1 / q) for k, h, q in zip(fine.counts, fine.spacings, p)])
    assert rel(approx, np.prod([ai ** (1 / q) for ai, q in zip(a, p)])) < 5e-3


def test_mixed_norm_separable(rng):
    grid = build_grid(BoxDomain((0.0, 0.0), (1.0, 2.0)), (11, 8))
    f = rng.standard_normal(11)
    g = rng.standard_normal(8)
    u = GridFunction(grid, np.outer(f, g))
    p = (1.7, 3.2)
    nf = (np.sum(np.abs(f) ** p[0]) * grid.spacings[0]) ** (1 / p[0])
    ng = (np.sum(np.abs(g) ** p[1]) * grid.spacings[1]) ** (1 / p[1])
    assert rel(mixed_norm(u, p), nf * ng) <= 1e-13


def test_mixed_norm_axis_order_matters(rng):
    grid = build_grid(BoxDomain.unit(2), (6, 6))
    u = GridFunction(grid, rng.standard_normal(grid.shape) ** 3)
    a = mixed_norm(u, (1.5, 3.5))
    b = mixed_norm(u.with_values(u.values.T), (1.5, 3.5))
    assert rel(a, b) > 1e-6


def test_partials_stack(rng):
    grid = build_grid(BoxDomain.unit(3), (3, 4, 5))
    u = GridFunction(grid, rng.standard_normal(grid.shape))
    stack = partials(u, (2, 2.5, 3))
    assert [lvl.shape for lvl in stack.levels] == [(4, 5), (5,), ()]
    assert all(np.all(np.asarray(lvl) >= 0) for lvl in stack.levels)
    assert stack.norm == mixed_norm(u, (2, 2.5, 3))
    assert mixed_norm(zeros(grid), (2, 2.5, 3)) == 0.0
    with pytest.raises(ValueError):
        mixed_norm(u, (2, 3))


@given(seed=seeds)
def test_mixed_norm_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    _, p, _, u, v = random_instance(rng)
    assert mixed_norm(u + v, p) <= (mixed_norm(u, p) + mixed_norm(v, p)) * (1 + 1e-14)


@given(seed=seeds, t=st.sampled_from([-2.0, 0.5, 10.0]))
def test_absolute_homogeneity(seed, t):
    rng = np.random.default_rng(seed)
    _, p, s, u, _ = random_instance(rng)
    assert rel(mixed_norm(u * t, p), abs(t) * mixed_norm(u, p)) <= 1e-12
    assert rel(gradient_norm(u * t, p), abs(t) * gradient_norm(u, p)) <= 1e-12
    assert rel(fractional_seminorm(u * t, s, p), abs(t) * fractional_seminorm(u, s, p)) <= 1e-12


def test_directional_norm_examples(rng):
    grid = build_grid(BoxDomain((0.0, 0.0), (1.0, 2.0)), (3, 3))
    g = np.zeros((4, 3))
    assert directional_norm(g, 2.5, grid) == 0.0
    g[2, 1] = -3.0
    assert rel(directional_norm(g, 2.5, grid), 3.0 * grid.cell_volume ** (1 / 2.5)) <= 1e-15
    g = rng.standard_normal((4, 3))
    brute = sum(abs(x) ** 2.5 * grid.cell_volume for x in g.ravel()) ** (1 / 2.5)
    assert rel(directional_norm(g, 2.5, grid), brute) <= 1e-12


def test_gradient_norm_examples():
    grid = build_grid(BoxDomain.unit(1), (1,))
    hat = GridFunction(grid, [1.0])
    assert gradient_norm(hat, (2,)) == pytest.approx(2.0, rel=1e-15)
    p = 3.0
    assert gradient_norm(hat, (p,)) == pytest.approx((2 * 0.5 * 2 ** p) ** (1 / p), rel=1e-15)
    assert gradient_norm(zeros(build_grid(BoxDomain.unit(2), (4, 4))), (2, 3)) == 0.0

    fine = build_grid(BoxDomain.unit(1), (255,))
    u = sample(lambda x: np.sin(np.pi * x), fine)
    assert gradient_norm(u, (2,)) / mixed_norm(u, (2,)) == pytest.approx(np.pi, rel=1e-2)


def test_gradient_norm_weights(rng):
    grid, p, _, u, _ = random_instance(rng, n=2)
    w = np.array([0.3, 2.0])
    assert rel(gradient_norm(u, p, w), float(w @ directional_norms(u, p))) <= 1e-14
    np.testing.assert_allclose(bbm_weights((2.0, 4.0)), [1.0, 0.5 ** 0.25])


# ----------------------------------------------------------- fractional

def lattice_oracle(u, s, p, axis, window, normalized):
    """Full-line Gagliardo integral of the zero-extended field.

    Lattice sums ``S_m`` from an explicitly padded array, linear interpolation
    of ``S`` between shifts, integrated against ``t^(-1-sp)`` with adaptive
    quadrature; analytic band below one spacing and tail beyond the window.
    """
    grid = u.grid
    d = grid.spacings[axis]
    sig = s * p
    lines = np.moveaxis(u.values, axis, -1)
    pad = np.pad(lines, [(0, 0)] * (lines.ndim - 1) + [(window + 1, window + 1)])
    S = np.array([np.sum(np.abs(pad[..., m:] - pad[..., :-m]) ** p)
                  for m in range(1, window + 1)]) * grid.cell_volume
    weights = []
    for m in range(1, window + 1):
        lw = quad(lambda t: (t - m + 1) * t ** (-1 - sig), m - 1, m)[0] if m > 1 else 0.0
        rw = quad(lambda t: (m + 1 - t) * t ** (-1 - sig), m, m + 1)[0] if m < window else 0.0
        weights.append(lw + rw)
    band = 2 * S[0] * d ** (-sig) / (p * (1 - s))
    inner = 2 * d ** (-sig) * np.dot(weights, S)
    tail = 2 * 2 * np.sum(np.abs(lines) ** p) * grid.cell_volume * (window * d) ** (-sig) / sig
    total = band + inner + tail
    return (1 - s) * total if normalized else total


@pytest.mark.parametrize("s, p", [(0.3, 1.5), (0.5, 2.0), (0.9, 3.0), (0.75, 1.2)])
@pytest.mark.parametrize("axis", [0, 1])
def test_fractional_matches_lattice_oracle(s, p, axis, rng):
    grid = build_grid(BoxDomain((0.0, 0.0), (1.0, 1.5)), (7, 5))
    u = GridFunction(grid, rng.standard_normal(grid.shape))
    window = min_window(grid, axis)
    for normalized in (False, True):
        got = fractional_directional(u, s, p, axis, window, normalized).raw_power
        assert rel(got, lattice_oracle(u, s, p, axis, window, normalized)) <= 1e-10


def test_fractional_terms_structure(rng):
    grid, p, s, u, _ = random_instance(rng, n=2)
    for t in fractional_terms(u, s, p):
        assert t.inner_sum >= 0 and t.inner_band_correction >= 0 and t.tail_correction >= 0
        assert t.raw_power == pytest.approx(t.inner_sum + t.inner_band_correction
                                            + t.tail_correction, rel=1e-15)
    zero = fractional_directional(zeros(grid), s[0], p[0], 0)
    assert (zero.inner_sum, zero.inner_band_correction, zero.tail_correction) == (0, 0, 0)
    assert fractional_seminorm(zeros(grid), s, p) == 0.0


def test_normalization_factor(rng):
    grid, p, s, u, _ = random_instance(rng, n=1)
    raw = fractional_directional(u, s[0], p[0], 0, normalized=False).raw_power
    nrm = fractional_directional(u, s[0], p[0], 0, normalized=True).raw_power
    assert rel(nrm, (1 - s[0]) * raw) <= 1e-14


@given(seed=seeds, factor=st.sampled_from([2, 3, 8]))
def test_window_invariance(seed, factor):
    rng = np.random.default_rng(seed)
    grid, p, s, u, _ = random_instance(rng)
    for i in range(grid.ndim):
        m = min_window(grid, i)
        a = fractional_directional(u, s[i], p[i], i, m)
        b = fractional_directional(u, s[i], p[i], i, factor * m)
        assert rel(a.raw_power, b.raw_power) <= 1e-10
        assert b.inner_sum >= a.inner_sum and b.tail_correction < a.tail_correction


def test_window_too_small_and_degenerate_order():
    grid = build_grid(BoxDomain.unit(1), (10,))
    with pytest.raises(ValueError):
        fractional_kernel(grid, 0, 0.5, 2.0, window=min_window(grid, 0) - 1)
    with pytest.raises(ValueError):
        fractional_kernel(grid, 0, 1e-14, 2.0)


@given(seed=seeds)
def test_reflection_symmetry(seed):
    rng = np.random.default_rng(seed)
    grid, p, s, u, _ = random_instance(rng)
    for i in range(grid.ndim):
        flipped = u.with_values(np.flip(u.values, axis=i))
        for j in range(grid.ndim):
            a = fractional_directional(u, s[j], p[j], j).raw_power
            b = fractional_directional(flipped, s[j], p[j], j).raw_power
            assert rel(a, b) <= 1e-12


def test_refinement_convergence():
    vals = []
    for k in (255, 511):
        u = sample(lambda x: np.sin(np.pi * x) ** 2, build_grid(BoxDomain.unit(1), (k,)))
        vals.append(fractional_seminorm(u, (0.5,), (2.0,)))
    assert rel(vals[0], vals[1]) < 0.02


def test_bbm_limit_on_bump():
    grid = build_grid(BoxDomain.unit(1), (511,))
    u = sample(lambda x: np.sin(np.pi * x) ** 2, grid)
    p = 2.0
    local = (2 / p) * directional_norm(forward_diff(u, 0), p, grid) ** p
    errs = []
    for s in (0.7, 0.9, 0.99):
        raw = fractional_directional(u, s, p, 0, normalized=True).raw_power
        errs.append(abs(raw / local - 1))
    assert errs[-1] < 0.10
    assert errs[0] > errs[1] > errs[2]
