"""Exponential sums: grids vs direct summation, complete sums, integrals."""

from math import gcd

import numpy as np
import pytest

from quadsums import (
    CoefficientSequence,
    SmoothWeight,
    TorusGrid,
    delta_sequence,
    extension_direct,
    gauss_sum,
    gauss_sum_table,
    grid_evaluate,
    iter_field_chunks,
    major_arc_approx,
    ones_sequence,
    oscillatory_integral,
    parse_form_spec,
    random_unit_sequence,
    smoothed_sum_direct,
)
from quadsums.bump import bump

HYPER = parse_form_spec("diag:1,-1")
LINE = parse_form_spec("diag:1")


def test_torus_grid_layout():
    grid = TorusGrid(1, 4, 5, (0.5, 0.25))
    assert np.allclose(grid.alphas(), np.arange(4) / 4 + 0.5)
    assert np.allclose(grid.theta_values(0), np.arange(5) / 5 + 0.25)
    assert grid.total_cells == 20
    assert abs(grid.cell_measure - 1 / 20) <= 1e-18
    cent = TorusGrid.centered(2, 3, 7)
    assert cent.offset == (1 / 6, 1 / 14, 1 / 14)
    with pytest.raises(ValueError):
        TorusGrid(2, 4, 5, (0.0, 0.0))
    with pytest.raises(ValueError):
        TorusGrid(1, 4, 5, (0.0, 1.5))


def test_grid_matches_direct():
    rng = np.random.default_rng(101)
    for d in (1, 2):
        for N in (2, 4, 8):
            seq = random_unit_sequence(d, N, seed=int(rng.integers(2**31)))
            grid = TorusGrid.random_offset(d, 7, 2 * N + 3, rng)
            field = grid_evaluate(HYPER if d == 2 else LINE, seq, grid)
            form = HYPER if d == 2 else LINE
            alphas = grid.alphas()
            thetas = [grid.theta_values(i) for i in range(d)]
            for _ in range(100):
                ia = int(rng.integers(grid.m_alpha))
                it = tuple(int(rng.integers(grid.m_theta)) for _ in range(d))
                want = extension_direct(
                    form, seq, alphas[ia], [thetas[i][it[i]] for i in range(d)]
                )
                got = field.values[(ia,) + it]
                assert abs(got - want) <= 1e-10


def test_iter_field_chunks_agrees_with_grid_evaluate():
    seq = random_unit_sequence(2, 3, seed=4)
    grid = TorusGrid(2, 5, 9, (0.25, 0.0, 0.5))
    field = grid_evaluate(HYPER, seq, grid)
    rows = np.concatenate(
        [vals for _, vals in iter_field_chunks(HYPER, seq, grid, chunk=2)]
    )
    assert np.abs(rows - field.values).max() <= 1e-12


def test_grid_too_coarse_rejected():
    seq = ones_sequence(1, 4)
    grid = TorusGrid(1, 3, 7, (0.0, 0.0))
    with pytest.raises(ValueError, match="grid too coarse"):
        list(iter_field_chunks(LINE, seq, grid))


def test_grid_budget_rejected():
    seq = ones_sequence(1, 2)
    grid = TorusGrid(1, 2**20, 65, (0.0, 0.0))
    with pytest.raises(ValueError, match="iter_field_chunks"):
        grid_evaluate(LINE, seq, grid, max_cells=2**25)


def test_sup_bound_and_attainment():
    # |F| <= (2r+1)^{d/2} ||a||_2, with equality for constant coefficients
    rng = np.random.default_rng(7)
    for d, N in ((1, 4), (2, 3)):
        form = LINE if d == 1 else HYPER
        seq = random_unit_sequence(d, N, seed=13 + d)
        grid = TorusGrid.random_offset(d, 9, 2 * N + 5, rng)
        bound = (2 * N + 1) ** (d / 2.0) * seq.l2_norm
        assert grid_evaluate(form, seq, grid).sup_norm() <= bound + 1e-12
        ones = ones_sequence(d, N)
        zero_grid = TorusGrid(d, 5, 2 * N + 3, (0.0,) * (d + 1))
        sup = grid_evaluate(form, ones, zero_grid).sup_norm()
        assert abs(sup - (2 * N + 1) ** (d / 2.0) * ones.l2_norm) <= 1e-9


def test_delta_field_is_flat():
    seq = delta_sequence(2, 3)
    grid = TorusGrid(2, 4, 7, (0.3, 0.1, 0.9))
    field = grid_evaluate(HYPER, seq, grid)
    assert np.abs(field.values - 1.0).max() <= 1e-12


def test_smoothed_sum_small_cases():
    w = SmoothWeight(1, 1)
    assert abs(smoothed_sum_direct(LINE, w, 0.0, [0.5]) - (-1.0)) <= 1e-12
    assert abs(smoothed_sum_direct(LINE, w, 0.0, [0.0]) - 3.0) <= 1e-12
    # N = 2: omega = kappa(n/2) over |n| <= 3
    w2 = SmoothWeight(1, 2)
    expect = sum(bump(n / 2) for n in range(-3, 4))
    assert abs(smoothed_sum_direct(LINE, w2, 0.0, [0.0]) - expect) <= 1e-12


def test_conjugate_symmetry():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=(5, 5))
    seq = CoefficientSequence(2, 2, vals)
    for _ in range(10):
        alpha = float(rng.random())
        theta = rng.random(2)
        lhs = extension_direct(HYPER, seq, -alpha, -theta)
        rhs = np.conj(extension_direct(HYPER, seq, alpha, theta))
        assert abs(lhs - rhs) <= 1e-12


def test_theta_length_validation():
    with pytest.raises(ValueError):
        extension_direct(HYPER, ones_sequence(2, 2), 0.0, [0.1])


def test_gauss_sum_values():
    assert abs(abs(gauss_sum(LINE, 1, [0], 5)) - np.sqrt(5.0)) <= 1e-10
    assert abs(gauss_sum(LINE, 1, [0], 2)) <= 1e-12
    assert abs(gauss_sum(LINE, 1, [1], 2) - 2.0) <= 1e-12
    assert gauss_sum(LINE, 1, [0], 1) == 1.0
    assert abs(gauss_sum(HYPER, 1, [0, 0], 1) - 1.0) <= 1e-15


def test_gauss_sum_validation():
    with pytest.raises(ValueError, match="gcd"):
        gauss_sum(LINE, 2, [0], 4)
    with pytest.raises(ValueError):
        gauss_sum(LINE, 1, [0], 0)
    with pytest.raises(ValueError):
        gauss_sum(HYPER, 1, [0], 5)
    with pytest.raises(ValueError, match="max_terms"):
        gauss_sum(HYPER, 1, [0, 0], 3000)
    with pytest.raises(ValueError, match="gcd"):
        gauss_sum_table(LINE, 2, 4)


def test_gauss_sum_table_matches_direct():
    for spec in ("diag:1", "diag:2,3", "mat:2:0,1,1,0"):
        form = parse_form_spec(spec)
        for q in (1, 2, 3, 4, 5, 6):
            for a in range(1, q + 1):
                if gcd(a, q) != 1:
                    continue
                table = gauss_sum_table(form, a, q)
                for b in np.ndindex(*table.shape):
                    want = gauss_sum(form, a, list(b), q)
                    assert abs(table[b] - want) <= 1e-9


def test_square_root_cancellation_d1():
    # d = 1, R = x^2: |S(a, b; q)| <= sqrt(2q) for every coprime a and all b
    for q in range(1, 65):
        for a in range(1, q + 1):
            if gcd(a, q) != 1:
                continue
            table = np.abs(gauss_sum_table(LINE, a, q))
            assert table.max() <= np.sqrt(2.0 * q) + 1e-9


def test_gauss_ratio_saturates_early():
    # max_b |S(a,b;q)| / q^{d/2} over q <= 64 should not exceed twice the
    # maximum already attained by q <= 16
    for spec in ("diag:1", "diag:1,-1", "mat:2:0,1,1,0", "diag:2,3"):
        form = parse_form_spec(spec)
        d = form.dim
        best64 = best16 = 0.0
        for q in range(1, 65):
            for a in range(1, q + 1):
                if gcd(a, q) != 1:
                    continue
                ratio = float(np.abs(gauss_sum_table(form, a, q)).max()) / q ** (d / 2)
                best64 = max(best64, ratio)
                if q <= 16:
                    best16 = max(best16, ratio)
        assert best64 <= 2.0 * best16


def _osc_trapezoid(form, beta, gamma, N, n=1201):
    # trapezoid rule; the integrand vanishes to all orders at the boundary,
    # so this converges faster than any power of 1/n
    x = np.linspace(-2.0, 2.0, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    M = form.matrix
    R = M[0][0] * X * X + 2 * M[0][1] * X * Y + M[1][1] * Y * Y
    f = (
        bump(X)
        * bump(Y)
        * np.exp(2j * np.pi * (beta * N * N * R + N * (gamma[0] * X + gamma[1] * Y)))
    )
    h = x[1] - x[0]
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return complex(h * h * np.einsum("i,j,ij->", w, w, f))


def test_oscillatory_integral_normalization():
    assert abs(oscillatory_integral(LINE, 0.0, [0.0], 4).value - 3.0) <= 1e-12
    assert abs(oscillatory_integral(HYPER, 0.0, [0.0, 0.0], 4).value - 9.0) <= 1e-12
    cross = parse_form_spec("mat:2:0,1,1,0")
    assert abs(oscillatory_integral(cross, 0.0, [0.0, 0.0], 4).value - 9.0) <= 1e-10


def test_oscillatory_integral_against_trapezoid():
    cross = parse_form_spec("mat:2:0,1,1,0")
    for beta, gamma in ((0.075, (0.2, -0.4)), (-0.03, (0.9, 0.15))):
        got = oscillatory_integral(cross, beta, gamma, 2)
        want = _osc_trapezoid(cross, beta, gamma, 2)
        assert abs(got.value - want) <= 1e-8
        assert got.error_estimate <= 1e-6
        assert len(got.orders) == 2


def test_oscillatory_integral_conjugation():
    for beta, gamma in ((0.01, (0.3, 0.7)), (0.002, (1.2, -0.4))):
        plus = oscillatory_integral(HYPER, beta, gamma, 8).value
        minus = oscillatory_integral(HYPER, -beta, [-g for g in gamma], 8).value
        assert abs(minus - np.conj(plus)) <= 1e-12


def test_oscillatory_integral_decay():
    # I(0, m/N; N) = kappa-hat(m): zero at nonzero integers, and bounded by
    # (1+m)^{-3} * mass off the integers
    for m in (2, 4, 8, 16):
        r = oscillatory_integral(LINE, 0.0, [m / 8], 8)
        assert abs(r.value) <= 1e-12
    for m in (2.5, 4.5, 8.5, 16.5):
        r = oscillatory_integral(LINE, 0.0, [m / 8], 8)
        assert abs(r.value) <= (1 + m) ** (-3.0) * 3.0


def test_oscillatory_integral_validation():
    with pytest.raises(ValueError):
        oscillatory_integral(LINE, 0.0, [0.0], 4, quad_order=4)
    with pytest.raises(ValueError):
        oscillatory_integral(HYPER, 0.0, [0.0], 4)


def test_major_arc_approx_at_rational_points():
    # alpha = a/q + beta with small beta and theta near a peak of |S(a,.;q)|
    rng = np.random.default_rng(19)
    N = 16
    w = SmoothWeight(1, N)
    for q in (1, 2, 3, 4):
        a = next(x for x in range(1, q + 1) if gcd(x, q) == 1)
        peak = np.abs(gauss_sum_table(LINE, a, q))
        b_star = int(np.argmax(peak))
        beta = float(rng.uniform(-1, 1)) / (16 * q * N)
        theta = [b_star / q + float(rng.uniform(-1, 1)) / (8 * N)]
        approx = major_arc_approx(LINE, w, a, q, beta, theta, m_cut=3)
        exact = smoothed_sum_direct(LINE, w, a / q + beta, theta)
        assert abs(approx.value - exact) <= 0.05 * abs(exact)
        assert approx.m_cut == 3
        assert approx.outer_shell <= 0.05 * abs(exact)


def test_major_arc_dominant_term():
    # q = 1 center: F(beta, 0) is close to the single integral N^d I(beta, 0)
    N = 16
    w = SmoothWeight(1, N)
    beta = 0.1 / N**2
    approx = major_arc_approx(LINE, w, 0, 1, beta, [0.0])
    lead = N * oscillatory_integral(LINE, beta, [0.0], N).value
    exact = smoothed_sum_direct(LINE, w, beta, [0.0])
    assert abs(approx.value - exact) <= 1e-6 * abs(exact)
    assert abs(lead - exact) <= 0.02 * abs(exact)


def test_major_arc_validation():
    w = SmoothWeight(1, 4)
    with pytest.raises(ValueError):
        major_arc_approx(LINE, w, 1, 2, 0.0, [0.0], m_cut=0)
    with pytest.raises(ValueError):
        major_arc_approx(LINE, w, 1, 2, 0.0, [0.0, 0.0])
    with pytest.raises(ValueError, match="gcd"):
        major_arc_approx(LINE, w, 2, 4, 0.0, [0.0])


def test_major_arc_majorant_constant():
    # record C = sup |F| * q^{0.9} * max(1/N^2, |beta|) over sampled points;
    # measured 3.1215 for this seed, frozen here as a regression cap
    N = 32
    w = SmoothWeight(2, N)
    rng = np.random.default_rng(7)
    C = 0.0
    for _ in range(50):
        q = int(rng.integers(1, 9))
        a = int(rng.integers(1, q + 1))
        while gcd(a, q) != 1:
            a = int(rng.integers(1, q + 1))
        beta = float(rng.uniform(-1, 1)) / (q * N)
        if rng.random() < 0.5:
            tb = np.abs(gauss_sum_table(HYPER, a, q))
            b_star = np.unravel_index(int(np.argmax(tb)), tb.shape)
            theta = np.array(b_star, float) / q + rng.uniform(-1, 1, 2) / (8 * N)
        else:
            theta = rng.random(2)
        val = abs(smoothed_sum_direct(HYPER, w, a / q + beta, theta))
        majorant = q**-0.9 * min(float(N) ** 2, np.inf if beta == 0 else 1 / abs(beta))
        C = max(C, val / majorant)
    assert 1.0 <= C <= 5.0
