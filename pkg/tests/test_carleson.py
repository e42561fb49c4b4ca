import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from mna.carleson import (CarlesonConfig, CarlesonEmbedding, T_function, condition_ii, condition_iii,
                          equivalence_report, estimate_operator_norm, random_measure, read_measure_csv)
from mna.errors import ConfigError
from mna.functions import DiscreteMeasure
from mna.lattice import build_lattice, pseudo_distance
from mna.weights import RadialWeight

FLAT = RadialWeight.standard_power(0.0)
L4 = build_lattice(2, 4, 1)
ZERO = DiscreteMeasure(np.zeros(0, dtype=complex), np.zeros(0))
positive = st.floats(0.1, 10.0)


def _reference_case(p, q, s):
    if s < min(p, q):
        return "a"
    if p <= s < q:
        return "b"
    if q <= s < p:
        return "c"
    return "d"


def test_case_dispatch_random_triples():
    rng = np.random.default_rng(0)
    for p, q, s in np.exp(rng.uniform(-2, 2.5, size=(1000, 3))):
        assert CarlesonConfig(p, q, s).case == _reference_case(p, q, s)


@pytest.mark.parametrize("p,q,s,case", [(2, 4, 2, "b"), (4, 2, 2, "c"), (2, 2, 2, "d"), (2, 4, 4, "d"),
                                        (2, 4, 1, "a"), (4, 2, 4, "d")])
def test_case_dispatch_ties(p, q, s, case):
    assert CarlesonConfig(p, q, s).case == case


def test_case_exponents():
    cfg = CarlesonConfig(2, 4, 3, n=1)
    assert cfg.case == "b" and cfg.uv == pytest.approx((3.5, 1.0))
    assert CarlesonConfig(4, 2, 3, n=1).uv == pytest.approx((4.0, 1.5))
    assert CarlesonConfig(2, 2, 2, n=1).uv == pytest.approx((3.0, 1.0))
    assert CarlesonConfig(4, 4, 1).uv == (1.0, 1.0)


def test_config_validation():
    for bad in [dict(p=0), dict(q=math.inf), dict(n=-1), dict(n=0.5), dict(r=1.0)]:
        args = dict(p=2, q=2, s=2, n=0, r=0.5) | bad
        with pytest.raises(ConfigError):
            CarlesonConfig(**args)


def test_T_function_examples():
    cfg = CarlesonConfig(4, 4, 1)
    assert cfg.uv == (1.0, 1.0)
    assert T_function(ZERO, FLAT, cfg, 0.3) == 0
    assert T_function(DiscreteMeasure.dirac(0), FLAT, cfg, 0) == pytest.approx(1.0)
    assert pseudo_distance(0.3, 0.6) == pytest.approx(0.3 / 0.82)
    value = T_function(DiscreteMeasure.dirac(0.6), FLAT, cfg, 0.3)
    assert value == pytest.approx(1.0 / (0.7 * FLAT.hat(0.3)))
    with pytest.raises(ConfigError):
        T_function(ZERO, FLAT, cfg, 1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), r1=st.floats(0.05, 0.9), r2=st.floats(0.05, 0.9))
def test_T_function_monotone_in_radius(seed, r1, r2):
    rng = np.random.default_rng(seed)
    mu = random_measure(L4, rng, 20)
    z = 0.9 * np.sqrt(rng.random(10)) * np.exp(2j * np.pi * rng.random(10))
    lo, hi = min(r1, r2), max(r1, r2)
    a = T_function(mu, FLAT, CarlesonConfig(2, 2, 2, r=lo), z)
    b = T_function(mu, FLAT, CarlesonConfig(2, 2, 2, r=hi), z)
    assert np.all(a <= b)


def test_condition_ii_examples():
    cfg = CarlesonConfig(2, 2, 2)
    assert condition_ii(ZERO, L4, FLAT, cfg)["norm"] == 0
    one = DiscreteMeasure(cell_masses={(0, 0): 1.0}, lattice=L4)
    assert condition_ii(one, L4, FLAT, cfg)["norm"] == pytest.approx(1.0)
    cfg1 = CarlesonConfig(2, 2, 1)
    single = condition_ii(one, L4, FLAT, cfg1)["norm"]
    two = DiscreteMeasure(cell_masses={(0, 0): 1.0, (0, 5): 1.0}, lattice=L4)
    assert condition_ii(two, L4, FLAT, cfg1)["norm"] == pytest.approx(math.sqrt(2) * single)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), c=positive, p=positive, q=positive, s=positive)
def test_condition_ii_homogeneous(seed, c, p, q, s):
    mu = random_measure(L4, np.random.default_rng(seed), 20)
    pts, ms = mu.atoms()
    cfg = CarlesonConfig(p, q, s)
    a = condition_ii(DiscreteMeasure(pts, c * ms), L4, FLAT, cfg)["norm"]
    assert a == pytest.approx(c * condition_ii(mu, L4, FLAT, cfg)["norm"], rel=1e-10)


def test_condition_ii_stray_mass():
    with pytest.raises(ConfigError, match="0.99\\+0j"):
        condition_ii(DiscreteMeasure(np.array([0.99 + 0j]), np.array([1.0])), L4, FLAT, CarlesonConfig(2, 2, 2))


def test_condition_iii_zero_and_scaling():
    cfg = CarlesonConfig(2, 4, 1)
    assert condition_iii(ZERO, FLAT, L4, cfg) == 0
    mu = random_measure(L4, np.random.default_rng(3), 10)
    pts, ms = mu.atoms()
    a = condition_iii(mu, FLAT, L4, cfg)
    assert condition_iii(DiscreteMeasure(pts, 2 * ms), FLAT, L4, cfg) == pytest.approx(2 * a, rel=1e-12)


def test_condition_iii_dirac_sup_against_dense_grid():
    # T grows toward the edge of the pseudo-disc |z| < 1/2, so the sampled sup approaches its limit from below
    cfg = CarlesonConfig(2, 2, 3)
    assert cfg.case == "d" and math.isinf(cfg.dual_exponents[0]) and math.isinf(cfg.dual_exponents[1])
    mu = DiscreteMeasure.dirac(0)
    u, v = cfg.uv
    limit = 0.5 ** -(u + v)
    value, dense = condition_iii(mu, FLAT, L4, cfg, grid=8), condition_iii(mu, FLAT, L4, cfg, grid=80)
    assert value <= dense <= limit
    assert value == pytest.approx(dense, rel=0.1) and dense == pytest.approx(limit, rel=0.01)


def test_operator_norm_examples():
    cfg = CarlesonConfig(2, 2, 2)
    assert estimate_operator_norm(ZERO, FLAT, L4, cfg) == 0
    assert estimate_operator_norm(DiscreteMeasure.dirac(0), FLAT, L4, cfg) >= FLAT.hat(0) ** -0.5 * (1 - 1e-9)
    with pytest.raises(ConfigError):
        estimate_operator_norm(DiscreteMeasure.dirac(0), FLAT, L4, cfg, trials=5)


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_operator_norm_nondecreasing_in_trials(seed):
    mu = random_measure(L4, np.random.default_rng(seed), 10)
    cfg = CarlesonConfig(2, 2, 2, n=1)
    a = estimate_operator_norm(mu, FLAT, L4, cfg, trials=10, seed=seed)
    b = estimate_operator_norm(mu, FLAT, L4, cfg, trials=20, seed=seed)
    assert b >= a * (1 - 1e-12)


def test_report_zero_measure():
    rep = equivalence_report(ZERO, FLAT, L4, CarlesonConfig(2, 2, 2))
    assert rep["opnorm_lower_s"] == rep["cond_ii_norm"] == rep["cond_iii_norm"] == 0
    assert rep["consistent"] and rep["config"]["case"] == "d"


def test_report_single_mass_sweep_trend():
    cfg = CarlesonConfig(2, 2, 2, n=1)
    rows = []
    for x in np.arange(1, 10) / 10:
        rep = equivalence_report(DiscreteMeasure(np.array([x + 0j]), np.array([1.0])), FLAT, L4, cfg)
        rows.append((rep["opnorm_lower_s"], rep["cond_ii_norm"], rep["cond_iii_norm"]))
    rows = np.array(rows)
    assert np.all(np.diff(rows, axis=0) >= 0)
    assert np.all(rows[-1] > 100 * rows[0])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_condition_ii_rotation_robust(seed):
    rng = np.random.default_rng(seed)
    mu = random_measure(L4, rng, 30)
    pts, ms = mu.atoms()
    cfg = CarlesonConfig(2, 4, 1)
    base = condition_ii(mu, L4, FLAT, cfg)["norm"]
    for angle in rng.uniform(0, 2 * np.pi, 5):
        rot = condition_ii(DiscreteMeasure(pts * np.exp(1j * angle), ms), L4, FLAT, cfg)["norm"]
        assert 0.25 <= rot / base <= 4


def test_read_measure_csv():
    mu = read_measure_csv(io.StringIO("re,im,mass\n0.1,0.2,1.5\n-0.3,0,2\n"))
    pts, ms = mu.atoms()
    assert np.allclose(pts, [0.1 + 0.2j, -0.3]) and np.allclose(ms, [1.5, 2.0])
    cells = read_measure_csv(io.StringIO("j,l,mass\n1,3,2.0\n1,3,1.0\n"), L4)
    assert cells.cell_mass_array(L4)[L4.flat_index(1, 3)] == pytest.approx(3.0)
    with pytest.raises(ConfigError, match="lattice"):
        read_measure_csv(io.StringIO("j,l,mass\n1,3,2.0\n"))
    with pytest.raises(ConfigError):
        read_measure_csv(io.StringIO("x,y\n1,2\n"))
    with pytest.raises(ConfigError):
        read_measure_csv(io.StringIO("re,im,mass\n0.1,a,1\n"))


def test_random_measure_inside_lattice():
    mu = random_measure(L4, np.random.default_rng(9), 50)
    pts, ms = mu.atoms()
    assert 1 <= pts.size <= 50 and np.all(np.abs(pts) < L4.r_max) and np.all(ms > 0)


def test_estimator():
    est = CarlesonEmbedding(J_max=3)
    assert clone(est).get_params() == est.get_params()
    mu = DiscreteMeasure(cell_masses={(0, 0): 1.0}, lattice=build_lattice(2, 3, 1))
    rep = est.fit(mu).report_
    assert rep["cond_ii_norm"] == pytest.approx(est.score(mu)) == pytest.approx(1.0)
