import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mna.errors import ConfigError
from mna.lattice import build_lattice
from mna.sequences import (CoefficientArray, conjugate_exponent, duality_gap, lpq_norm, random_unit_sequence,
                           read_coefficients_csv)

exponent = st.floats(0.3, 8.0) | st.just(math.inf)
finite_exponent = st.floats(1.05, 8.0)


@st.composite
def ragged(draw, min_rows=1):
    n_rows = draw(st.integers(min_rows, 5))
    rows = []
    for _ in range(n_rows):
        k = draw(st.integers(1, 6))
        re = draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k))
        im = draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k))
        rows.append(np.array(re) + 1j * np.array(im))
    return rows


def test_single_entry():
    rows = [np.zeros(3), np.array([0, 0, 3 - 4j]), np.zeros(2)]
    for p, q in [(0.5, 2), (2, 1), (math.inf, 3), (1, math.inf)]:
        assert lpq_norm(rows, p, q) == pytest.approx(5.0)


def test_mixed_example():
    assert lpq_norm([np.array([3.0, 4.0]), np.array([5.0, 12.0])], 2, 1) == pytest.approx(18.0)


@settings(max_examples=50, deadline=None)
@given(rows=ragged(), p=st.floats(0.3, 8.0))
def test_equal_exponents_flatten(rows, p):
    flat = np.concatenate(rows)
    m = np.abs(flat).max()
    expected = 0.0 if m == 0 else m * np.sum((np.abs(flat) / m) ** p) ** (1 / p)
    assert lpq_norm(rows, p, p) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_conjugate_table():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(0.5) == math.inf
    assert conjugate_exponent(1) == math.inf
    assert conjugate_exponent(math.inf) == 1
    with pytest.raises(ConfigError):
        conjugate_exponent(0)


@settings(max_examples=50, deadline=None)
@given(p=finite_exponent)
def test_conjugate_involution(p):
    assert conjugate_exponent(conjugate_exponent(p)) == pytest.approx(p, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(rows=ragged(), p=exponent, r=exponent, q=exponent)
def test_inclusion(rows, p, r, q):
    p, r = min(p, r), max(p, r)
    assert lpq_norm(rows, r, q) <= lpq_norm(rows, p, q) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(data=st.data(), p=exponent, q=exponent)
def test_quasi_triangle(data, p, q):
    a = data.draw(ragged())
    b = [row + data.draw(st.floats(-3, 3)) for row in a]
    t = min(1.0, p, q)
    s = [x + y for x, y in zip(a, b)]
    assert lpq_norm(s, p, q) ** t <= (lpq_norm(a, p, q) ** t + lpq_norm(b, p, q) ** t) * (1 + 1e-10)


def test_duality_examples():
    g = duality_gap([np.array([0, 2j]), np.zeros(3)], 3.0, 1.5)
    assert g["lower"] == pytest.approx(2.0) and g["norm"] == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    g = duality_gap(b, 2.0, 2.0)
    assert g["lower"] == pytest.approx(g["norm"], rel=1e-10)
    g = duality_gap(b, 3.0, 1.5)
    assert g["lower"] >= 0.999 * g["norm"]


@settings(max_examples=50, deadline=None)
@given(rows=ragged(), p=st.floats(0.5, 8.0) | st.just(math.inf), q=st.floats(0.5, 8.0) | st.just(math.inf))
def test_duality_lower_never_exceeds_norm(rows, p, q):
    g = duality_gap(rows, p, q, n_random=20)
    assert g["lower"] <= g["norm"] * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(rows=ragged(), p=finite_exponent, q=finite_exponent)
def test_extremizer_attains_dual_norm(rows, p, q):
    g = duality_gap(rows, p, q, n_random=0)
    assert g["lower"] >= 0.999 * g["norm"]


def test_coefficient_array_shape_checked():
    L = build_lattice(2, 2, 2)
    CoefficientArray(L, np.zeros(L.n_cells))
    CoefficientArray(L, np.zeros((L.n_cells, 4)))
    with pytest.raises(ConfigError):
        CoefficientArray(L, np.zeros(L.n_cells + 1))


def test_row_aggregates():
    L = build_lattice(2, 1, 1)
    v = np.zeros(L.n_cells, dtype=complex)
    v[0], v[9] = 3, 4j
    lam = CoefficientArray(L, v)
    assert np.allclose(lam.row_norms(2.0), [3.0, 4.0])
    assert np.allclose(lam.row_sup(), [3.0, 4.0])


@pytest.mark.parametrize("M_sub", [1, 3])
def test_csv_roundtrip(M_sub):
    L = build_lattice(2, 2, M_sub)
    rng = np.random.default_rng(2)
    shape = (L.n_cells,) if M_sub == 1 else (L.n_cells, M_sub**2)
    lam = CoefficientArray(L, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    back = read_coefficients_csv(io.StringIO(lam.to_csv()), L)
    assert np.array_equal(back.values, lam.values)


@pytest.mark.parametrize("p,q", [(2, 2), (1, 2), (4, 1), (2, 0.5), (math.inf, 1)])
def test_random_unit_sequence(p, q):
    L = build_lattice(2, 4, 1)
    lam = random_unit_sequence(L, p, q, np.random.default_rng(5))
    assert lpq_norm(lam, p, q) == pytest.approx(1.0, rel=1e-12)
