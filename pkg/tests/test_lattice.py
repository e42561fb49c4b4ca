import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mna.errors import ConfigError
from mna.lattice import build_lattice, is_separated, locate, min_separation, neighbors, pseudo_distance

L6 = build_lattice(2, 6, 1)


def _mobius(a, z):
    return (a - z) / (1 - np.conj(a) * z)


def test_cell_counts():
    assert build_lattice(2, 0, 1).n_cells == 8
    assert build_lattice(2, 2, 1).n_cells == 56
    assert build_lattice(3, 1, 2).n_subcells == (27 + 81) * 4


def test_first_cell_geometry():
    L = build_lattice(2, 2, 1)
    i = L.flat_index(0, 0)
    assert (L.r_lo[i], L.r_hi[i]) == (0.0, 0.5)
    assert L.theta_lo[i] == 0.0 and L.theta_hi[i] == pytest.approx(math.pi / 4)
    assert L.center(0, 0) == pytest.approx(0.25 * np.exp(1j * math.pi / 8))


def test_radii():
    assert np.allclose(L6.radii, 1 - 2.0 ** -np.arange(8))
    assert L6.radii[0] == 0.0


def test_cell_budget_guard():
    with pytest.raises(ConfigError, match="cells"):
        build_lattice(2, 30, 1)


@pytest.mark.parametrize("K,J,M", [(2, 6, 1), (3, 3, 3), (2, 4, 4)])
def test_partition_areas(K, J, M):
    L = build_lattice(K, J, M)
    for j in range(J + 1):
        sl = slice(L.offsets[j], L.offsets[j] + L.level_size(j))
        annulus = math.pi * (L.radii[j + 1] ** 2 - L.radii[j] ** 2)
        assert L.areas[sl].sum() == pytest.approx(annulus, rel=1e-12)
    sub = L.sub_areas.reshape(L.n_cells, M * M)
    assert np.allclose(sub.sum(axis=1), L.areas, rtol=1e-12)
    assert np.max(sub.max(axis=1) / sub.min(axis=1)) == pytest.approx(1.0, abs=1e-12)


def test_locate_examples():
    assert locate(L6, 0) == (0, 0)
    assert locate(L6, 0.6) == (1, 0)
    with pytest.raises(ConfigError, match="beyond lattice truncation"):
        locate(L6, 0.999)


def test_locate_matches_brute_force():
    rng = np.random.default_rng(0)
    z = L6.r_max * np.sqrt(rng.random(1000)) * np.exp(2j * np.pi * rng.random(1000))
    j, l = locate(L6, z)
    rho, th = np.abs(z), np.mod(np.angle(z), 2 * np.pi)
    inside = ((L6.r_lo[None, :] <= rho[:, None]) & (rho[:, None] < L6.r_hi[None, :])
              & (L6.theta_lo[None, :] <= th[:, None]) & (th[:, None] < L6.theta_hi[None, :]))
    assert np.all(inside.sum(axis=1) == 1)
    idx = inside.argmax(axis=1)
    assert np.array_equal(L6.j[idx], j) and np.array_equal(L6.l[idx], l)


def test_locate_center_identity():
    j, l = locate(L6, L6.centers)
    assert np.array_equal(j, L6.j) and np.array_equal(l, L6.l)


def test_locate_subcells():
    L = build_lattice(2, 3, 3)
    j, l, k = locate(L, L.sub_centers.ravel(), subcell=True)
    assert np.array_equal(j, np.repeat(L.j, 9)) and np.all((k >= 1) & (k <= 9))


def test_pseudo_distance_examples():
    assert pseudo_distance(0, 0.3j) == pytest.approx(0.3)
    assert pseudo_distance(0.5, 0.5) == 0.0
    assert pseudo_distance(0.5, -0.5) == pytest.approx(0.8)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 0.95), st.floats(0, 2 * math.pi)), min_size=3, max_size=3))
def test_pseudo_distance_mobius_invariant(pts):
    a, u, v = (r * np.exp(1j * t) for r, t in pts)
    assert pseudo_distance(_mobius(a, u), _mobius(a, v)) == pytest.approx(pseudo_distance(u, v), abs=1e-12)


def test_neighbors_contain_self_and_bounded():
    counts = {j: max(len(neighbors(L6, j, l)) for l in range(L6.level_size(j))) for j in range(7)}
    assert all((j, 0) in neighbors(L6, j, 0) for j in range(7))
    interior = [counts[j] for j in range(1, 5)]
    # uniform bound, identical on every interior level
    assert len(set(interior)) == 1 and interior[0] == 15
    assert max(counts.values()) <= 20
    assert neighbors(L6, 3, 2, "paper") == neighbors(L6, 3, 2, "euclidean")


def test_pseudo_neighbors_level_independent():
    # a pseudo(0.9) ball reaches about six levels either way, so the lattice must be deep enough
    L = build_lattice(2, 11, 1)

    def level_max(j):
        return max(len(neighbors(L, j, l, "pseudo(0.9)")) for l in range(0, L.level_size(j), 2 ** (j - 3)))

    m4, m5, m6 = level_max(4), level_max(5), level_max(6)
    assert m5 == m6
    # level 4 balls reach the central disc, where cells are not dyadic
    assert abs(m4 - m6) <= 0.05 * m6


def test_is_separated_examples():
    assert is_separated([0, 0.9], 0.5)
    assert not is_separated([0.5, 0.5], 1e-9)


def test_centers_separated_level_independent():
    L = build_lattice(2, 5, 1)
    delta = min_separation(L.centers)
    assert delta > 0 and is_separated(L.centers, delta)
    per_level = [min_separation(L.centers[L.offsets[j]:L.offsets[j] + L.level_size(j)]) for j in (3, 4, 5)]
    assert max(per_level) / min(per_level) < 1.05


def test_csv_export_columns():
    text = build_lattice(2, 1, 2).to_csv()
    head = io.StringIO(text).readline().strip().split(",")
    assert head == ["j", "l", "k", "r_lo", "r_hi", "theta_lo", "theta_hi", "center_re", "center_im"]
    assert len(text.strip().splitlines()) == 1 + 24 * 4
