import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mna.atoms import AtomParameters
from mna.errors import ConfigError
from mna.hardy import (PROOF_CASES, StepWeight, build_proof_steps, hardy_ratio, muckenhoupt_A, muckenhoupt_B,
                       proof_case_table, stability)
from mna.weights import RadialWeight

FLAT = RadialWeight.standard_power(0.0)
steps = st.lists(st.floats(0.05, 20.0), min_size=1, max_size=12)
exponent = st.floats(1.2, 6.0)


def _params(p, q, w=FLAT):
    ap = AtomParameters.build(p, q, w)
    return {"p": p, "q": q, "M_exp": ap.M_exp, "eta": ap.eta, "theta": ap.theta}


FAMILY = {"1.2": (0.5, 1.0), "2.2": (2.0, 4.0), "3.2": (math.inf, 2.0)}


def test_single_interval():
    one = StepWeight(np.ones(1))
    assert muckenhoupt_A(one, one, 2.0) == pytest.approx(0.5, rel=1e-12)
    assert muckenhoupt_B(one, one, 2.0) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("N", [16, 64, 256])
def test_constant_weights_grow_with_N(N):
    # x^(1/2) (N - x)^(1/2) peaks at x = N/2
    one = StepWeight(np.ones(N))
    assert muckenhoupt_A(one, one, 2.0) == pytest.approx(N / 2, rel=1e-12)
    assert muckenhoupt_B(one, one, 2.0) == pytest.approx(N / 2, rel=1e-12)


def test_constant_weights_flagged_divergent():
    values = {n: muckenhoupt_A(StepWeight(np.ones(n)), StepWeight(np.ones(n)), 2.0) for n in (16, 32)}
    assert stability(values)["flag"] == "divergent with N"
    assert stability({16: 1.0, 32: 1.05})["stable"]


def test_step_weight_validation():
    for bad in ([], [1.0, 0.0], [1.0, math.inf]):
        with pytest.raises(ConfigError):
            StepWeight(np.array(bad))
    with pytest.raises(ConfigError):
        muckenhoupt_A(StepWeight(np.ones(2)), StepWeight(np.ones(3)), 2.0)
    with pytest.raises(ConfigError):
        muckenhoupt_A(StepWeight(np.ones(2)), StepWeight(np.ones(2)), 1.0)


@settings(max_examples=50, deadline=None)
@given(data=st.data(), s=exponent, cu=st.floats(0.1, 10), cv=st.floats(0.1, 10))
def test_scaling(data, s, cu, cv):
    u = data.draw(steps)
    v = data.draw(st.lists(st.floats(0.05, 20.0), min_size=len(u), max_size=len(u)))
    U, V = StepWeight(np.array(u)), StepWeight(np.array(v))
    for sup in (muckenhoupt_A, muckenhoupt_B):
        assert sup(U.scaled(cu), V.scaled(cv), s) == pytest.approx(cu / cv * sup(U, V, s), rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(data=st.data(), s=exponent)
def test_exact_sup_dominates_sampling(data, s):
    u = data.draw(steps)
    v = data.draw(st.lists(st.floats(0.05, 20.0), min_size=len(u), max_size=len(u)))
    U, V = StepWeight(np.array(u)), StepWeight(np.array(v))
    for sup in (muckenhoupt_A, muckenhoupt_B):
        exact, sampled = sup(U, V, s), sup(U, V, s, samples=64)
        assert sampled <= exact * (1 + 1e-12)
        assert sampled >= exact * (1 - 1e-3)


@pytest.mark.parametrize("case", PROOF_CASES)
def test_built_steps_exact_vs_sampled(case):
    U, V, _, s = build_proof_steps(case, FLAT, 2, N=32, **_params(*FAMILY[case[:3]]))
    for sup in (muckenhoupt_A, muckenhoupt_B):
        exact, sampled = sup(U, V, s), sup(U, V, s, samples=64)
        assert sampled <= exact * (1 + 1e-12) and sampled >= exact * (1 - 1e-3)


def test_proof_steps_examples():
    U, V, f, s = build_proof_steps("1.2-S1", FLAT, 2, 0.5, 1.0, 5.0, N=8)
    assert U.values[0] == pytest.approx(1.0) and s == 2.0
    U, V, f, s = build_proof_steps("3.2-S8", FLAT, 2, math.inf, 2.0, 3.0, N=8)
    assert U.values[3] == pytest.approx(2.0**-1.5) and s == 2.0


def test_proof_steps_range_errors():
    with pytest.raises(ConfigError, match="p <= 1 < q/p"):
        build_proof_steps("1.2-S1", FLAT, 2, 2.0, 1.0, 5.0)
    with pytest.raises(ConfigError, match="1 < p < q"):
        build_proof_steps("2.2-S5", FLAT, 2, 4.0, 2.0, 5.0, 0.5, 0.5)
    with pytest.raises(ConfigError, match="eta, theta"):
        build_proof_steps("2.2-S6", FLAT, 2, 2.0, 4.0, 5.0)
    with pytest.raises(ConfigError, match="p = inf"):
        build_proof_steps("3.2-S7", FLAT, 2, 2.0, 2.0, 5.0)
    with pytest.raises(ConfigError, match="unknown case"):
        build_proof_steps("9.9-S0", FLAT, 2, 2.0, 2.0, 5.0)


@settings(max_examples=50, deadline=None)
@given(data=st.data(), s=exponent)
def test_hardy_ratio_bounded_by_muckenhoupt(data, s):
    u = data.draw(steps)
    n = len(u)
    v = data.draw(st.lists(st.floats(0.05, 20.0), min_size=n, max_size=n))
    f = data.draw(st.lists(st.floats(0.05, 20.0), min_size=n, max_size=n))
    U, V, F = StepWeight(np.array(u)), StepWeight(np.array(v)), StepWeight(np.array(f))
    sp = s / (s - 1)
    C = s ** (1 / s) * sp ** (1 / sp)
    assert hardy_ratio(U, V, F, s, "tail") <= C * muckenhoupt_A(U, V, s) * (1 + 1e-10)
    assert hardy_ratio(U, V, F, s, "partial") <= C * muckenhoupt_B(U, V, s) * (1 + 1e-10)


def test_hardy_ratio_example_and_validation():
    one = StepWeight(np.ones(1))
    # int_0^1 (1 - x)^2 dx = 1/3
    assert hardy_ratio(one, one, one, 2.0, "tail") == pytest.approx(3**-0.5)
    with pytest.raises(ConfigError):
        hardy_ratio(one, one, one, 2.0, "middle")
    with pytest.raises(ConfigError):
        hardy_ratio(one, one, StepWeight(np.ones(2)), 2.0)


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0, 2.0])
def test_case_table_rows(a):
    rows = proof_case_table(RadialWeight.standard_power(a), label=f"a={a}")
    assert len(rows) == 2 * len(PROOF_CASES)
    assert all(np.isfinite(r["sup_A"]) and np.isfinite(r["sup_B"]) for r in rows)
    stable = {r["case"] for r in rows if r["stability"] == "stable"}
    assert {"1.2-S1", "1.2-S2", "2.2-S5", "3.2-S7", "3.2-S8"} <= stable


def test_case_table_deterministic():
    a = proof_case_table(FLAT)
    assert a == proof_case_table(FLAT)
