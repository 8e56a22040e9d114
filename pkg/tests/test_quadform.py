"""Integer quadratic form arithmetic, diagonalization, and signatures."""

from fractions import Fraction

import numpy as np
import pytest

from quadsums import (
    QuadraticForm,
    diagonalize_rational,
    evaluate,
    frequency_bound,
    parse_form_spec,
    signature,
    signature_by_charpoly,
)


def test_evaluate_examples():
    q = QuadraticForm(np.diag([1, 1]))
    assert evaluate(q, (1, 2)) == 5
    q2 = QuadraticForm(np.diag([3]))
    assert evaluate(q2, (2,)) == 12
    hyper = QuadraticForm(np.diag([1, -1]))
    assert evaluate(hyper, (7, 7)) == 0
    # off-diagonal entries count twice: x^2 + 2xy with M = [[1,1],[1,0]]
    mixed = QuadraticForm(np.array([[1, 1], [1, 0]]))
    assert evaluate(mixed, (2, 3)) == 4 + 12


def test_call_matches_evaluate():
    rng = np.random.default_rng(5)
    q = QuadraticForm(np.array([[2, 1], [1, -3]]))
    for p in rng.integers(-9, 10, size=(50, 2)):
        assert q(p) == evaluate(q, p)


def test_validation_errors():
    with pytest.raises(ValueError, match="not symmetric"):
        QuadraticForm(np.array([[1, 2], [0, 1]]))
    with pytest.raises(ValueError, match="must be integers"):
        QuadraticForm(np.array([[1.5]]))
    with pytest.raises(ValueError, match="degenerate"):
        QuadraticForm(np.array([[1, 1], [1, 1]]))
    with pytest.raises(ValueError, match="degenerate"):
        QuadraticForm(np.zeros((2, 2), dtype=int))


def test_signature_examples():
    assert signature(QuadraticForm(np.diag([1, -1]))) == (1, 1, 1)
    assert signature(QuadraticForm(np.diag([1, 1, 1]))) == (3, 0, 0)
    assert signature(QuadraticForm(np.array([[0, 1], [1, 0]]))) == (1, 1, 1)
    assert signature(QuadraticForm(np.diag([-2, -5]))) == (0, 2, 0)


def _random_form(rng, dim):
    while True:
        m = rng.integers(-4, 5, size=(dim, dim))
        m = m + m.T
        if round(float(np.linalg.det(m))) != 0:
            return QuadraticForm(m)


def test_signature_dual_route():
    # eigenvalue-sign counting vs characteristic-polynomial route
    rng = np.random.default_rng(11)
    for _ in range(1000):
        dim = int(rng.integers(1, 5))
        form = _random_form(rng, dim)
        assert signature(form) == signature_by_charpoly(form)


def test_diagonalize_hyperbolic_plane():
    form = QuadraticForm(np.array([[0, 1], [1, 0]]))
    diag = diagonalize_rational(form)
    assert diag.q_lat == 1
    assert [list(row) for row in diag.transform] == [[1, 1], [1, -1]]
    assert list(diag.coeffs) == [Fraction(1, 2), Fraction(-1, 2)]


def test_diagonalize_round_trip_exact():
    rng = np.random.default_rng(23)
    for _ in range(100):
        dim = int(rng.integers(1, 5))
        form = _random_form(rng, dim)
        diag = diagonalize_rational(form)
        for _ in range(10):
            v = [int(x) for x in rng.integers(-20, 21, size=dim)]
            lhs = Fraction(evaluate(form, v))
            assert diag.evaluate(v) == lhs


def test_diagonalize_signature_consistent():
    rng = np.random.default_rng(31)
    for _ in range(50):
        dim = int(rng.integers(1, 5))
        form = _random_form(rng, dim)
        diag = diagonalize_rational(form)
        pos = sum(1 for c in diag.coeffs if c > 0)
        neg = sum(1 for c in diag.coeffs if c < 0)
        assert (pos, neg, min(pos, neg)) == signature(form)


def test_frequency_bound_values():
    # 4 N^2 times the total absolute entry sum
    assert frequency_bound(QuadraticForm(np.diag([1])), 1) == 4
    assert frequency_bound(QuadraticForm(np.diag([1, -1])), 4) == 128
    assert frequency_bound(QuadraticForm(np.array([[0, 1], [1, 0]])), 2) == 32


def test_frequency_bound_dominates_range():
    # every value R(n) with |n|_inf < 2N stays inside the bound
    rng = np.random.default_rng(43)
    for _ in range(25):
        dim = int(rng.integers(1, 3))
        form = _random_form(rng, dim)
        for N in (1, 2, 4, 8):
            vals = form.values_on_grid(2 * N - 1)
            assert np.abs(vals).max() <= frequency_bound(form, N)


def test_frequency_bound_rejects_bad_N():
    with pytest.raises(ValueError):
        frequency_bound(QuadraticForm(np.diag([1])), 0)


def test_values_on_grid_matches_evaluate():
    form = QuadraticForm(np.array([[1, 2], [2, -1]]))
    r = 3
    vals = form.values_on_grid(r)
    axis = np.arange(-r, r + 1)
    for i, x in enumerate(axis):
        for j, y in enumerate(axis):
            assert vals[i, j] == evaluate(form, (x, y))


def test_parse_form_spec():
    assert parse_form_spec("diag:1,-1").matrix == ((1, 0), (0, -1))
    assert parse_form_spec("mat:2:0,1,1,0").matrix == ((0, 1), (1, 0))
    assert parse_form_spec("diag:5").matrix == ((5,),)
    with pytest.raises(ValueError, match="bad form spec"):
        parse_form_spec("diag:")
    with pytest.raises(ValueError, match="bad form spec"):
        parse_form_spec("mat:2:1,2,3")
    with pytest.raises(ValueError, match="bad form spec"):
        parse_form_spec("banana")


def test_row_abs_sum_and_is_diagonal():
    form = QuadraticForm(np.array([[1, -2], [-2, 3]]))
    assert form.row_abs_sum() == 8
    assert not form.is_diagonal()
    assert QuadraticForm(np.diag([4, 4])).is_diagonal()
