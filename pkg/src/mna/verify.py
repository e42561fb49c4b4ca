"""Acceptance checks shared by the ``verify`` command and the test suite.

Each check returns ``{"id", "name", "passed", "details", "seconds"}``;
``details`` holds the measured quantities so failures can be diagnosed
from the report alone.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from .atoms import AtomParameters, analyze, atomic_decompose, eta_theta_inequalities, min_atom_order, \
    solve_eta_theta, synthesize
from .carleson import CarlesonConfig, equivalence_report, random_measure
from .functions import AnalyticFunction, evaluate, mixed_norm
from .hardy import StepWeight, muckenhoupt_A, proof_case_table, stability
from .lattice import build_lattice
from .sequences import CoefficientArray, duality_gap, lpq_norm, random_unit_sequence
from .weights import RadialWeight, estimate_exponents

__all__ = ["CHECKS", "PAIRS", "run_checks", "test_family"]

PAIRS = ((2.0, 2.0), (1.0, 2.0), (4.0, 1.0), (2.0, 0.5))
CARLESON_TRIPLES = ((4.0, 4.0, 1.0), (1.0, 4.0, 2.0), (4.0, 1.0, 2.0), (1.0, 1.0, 2.0))
POWERS = (-0.5, 0.0, 1.0, 2.0)


def _pair_key(p, q) -> str:
    return f"p={p:g},q={q:g}"


def closed_form_norms(J: int = 8, N: int = 1024) -> dict:
    """``||z^m||`` for the unweighted ``p = q = 2`` space against ``(2m+1)^(-1/2)``."""
    w = RadialWeight.standard_power(0.0)
    L = build_lattice(2, J, 1)
    rel = []
    for m in range(9):
        got = mixed_norm(AnalyticFunction.monomial(m), 2.0, 2.0, w, L, N)
        rel.append(abs(got - (2 * m + 1) ** -0.5) * math.sqrt(2 * m + 1))
    return {"passed": max(rel) < 1e-6, "details": {"max_relative_error": max(rel), "relative_errors": rel}}


def weight_exponents(tol: float = 0.1) -> dict:
    """Estimated exponents of ``(1+a)(1-r)^a`` against ``1 + a``."""
    rows, ok = {}, True
    for a in POWERS:
        e = estimate_exponents(RadialWeight.standard_power(a))
        target = 1.0 + a
        good = all(e[k] is not None and abs(e[k] - target) <= tol for k in ("alpha", "beta", "gamma"))
        ok &= good
        rows[f"a={a:g}"] = {**e, "target": target, "passed": good}
    return {"passed": ok, "details": rows}


def test_family(J: int, seed: int = 0) -> list[tuple[str, AnalyticFunction]]:
    """Nine monomials, five kernels reaching ``r_{J-1}`` and six random 8-term polynomials."""
    rng = np.random.default_rng(seed)
    L = build_lattice(2, J, 1)
    fam = [(f"z^{m}", AnalyticFunction.monomial(m)) for m in range(9)]
    for j in np.linspace(1, J - 1, 5).round().astype(int):
        a = L.radii[j] * np.exp(2j * np.pi * rng.random())
        fam.append((f"kernel|a|=r_{j}", AnalyticFunction.kernel(a, 2.0)))
    for i in range(6):
        deg = np.sort(rng.choice(17, size=8, replace=False))
        c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        fam.append((f"poly{i}", AnalyticFunction(dict(zip(deg.tolist(), c.tolist())))))
    return fam


def analysis_equivalence(J: int = 6, bound: float = 50.0, N: int = 1024) -> dict:
    """Spread of ``||lambda(f)|| / ||f||`` over the test family for each exponent pair."""
    w = RadialWeight.standard_power(0.0)
    L = build_lattice(2, J, 1)
    fam = test_family(J)
    rows, ok = {}, True
    for p, q in PAIRS:
        r = np.array([lpq_norm(analyze(f, L, p, q, w), p, q) / mixed_norm(f, p, q, w, L, N) for _, f in fam])
        spread = float(r.max() / r.min())
        ok &= spread <= bound
        rows[_pair_key(p, q)] = {"c1": float(r.min()), "c2": float(r.max()), "spread": spread,
                                 "passed": spread <= bound}
    return {"passed": ok, "details": rows}


def synthesis_bound(J_small: int = 4, J_large: int = 8, draws: int = 50, seed: int = 7,
                    factor: float = 2.0, N: int = 4096) -> dict:
    """Max ``||F|| / ||lambda||`` over random unit coefficient arrays at two depths."""
    w = RadialWeight.standard_power(0.0)
    rows, ok = {}, True
    for p, q in PAIRS:
        P = AtomParameters.build(p, q, w)
        best = {}
        for J in (J_small, J_large):
            rng = np.random.default_rng(seed)
            L, Lq = build_lattice(2, J, 1), build_lattice(2, J + 3, 1)
            best[J] = max(mixed_norm(synthesize(random_unit_sequence(L, p, q, rng), None, P, w), p, q, w, Lq, N)
                          for _ in range(draws))
        ratio = best[J_large] / best[J_small]
        good = 1.0 / factor <= ratio <= factor
        ok &= good
        rows[_pair_key(p, q)] = {"M_exp": P.M_exp, f"max_J{J_small}": best[J_small],
                                 f"max_J{J_large}": best[J_large], "ratio": ratio, "passed": good}
    return {"passed": ok, "details": rows}


def decomposition_iteration(J: int = 5, n_iter: int = 10, N: int = 1024) -> dict:
    """Residual decay, contraction trend in ``M_sub`` and final reconstruction error."""
    w = RadialWeight.standard_power(0.0)
    fam = {"1": AnalyticFunction({0: 1.0}), "1+z/2": AnalyticFunction({0: 1.0, 1: 0.5}),
           "(1-0.5z)^-2": AnalyticFunction.kernel(0.5, 2.0)}
    out = {}
    for m_sub in (1, 4):
        L = build_lattice(2, J, m_sub)
        P = AtomParameters.build(2.0, 2.0, w, M_sub=m_sub)
        out[m_sub] = {k: atomic_decompose(f, L, P, w, n_iter, N) for k, f in fam.items()}
    rows, ok = {}, True
    for k in fam:
        hi, lo = out[4][k], out[1][k]
        h = hi["residual_history"]
        decreasing = all(h[n] < h[n - 1] for n in range(2, len(h)))
        trend = hi["fitted_ratio"] is not None and lo["fitted_ratio"] is not None \
            and hi["fitted_ratio"] < lo["fitted_ratio"]
        err = hi["reconstruction_error"]
        good = decreasing and trend and err < 0.1
        ok &= good
        rows[k] = {"residual_history": h, "ratio_Msub4": hi["fitted_ratio"], "ratio_Msub1": lo["fitted_ratio"],
                   "reconstruction_error": err, "passed": good}
    return {"passed": ok, "details": rows}


def carleson_equivalence(J: int = 5, n_measures: int = 20, seed: int = 0, C: float = 100.0,
                         bound: float = 10.0) -> dict:
    """Ratio window of the discrete and continuous conditions and the operator-norm consistency."""
    w = RadialWeight.standard_power(0.0)
    L = build_lattice(2, J, 1)
    rng = np.random.default_rng(seed)
    mus = [random_measure(L, rng) for _ in range(n_measures)]
    rows, ok = {}, True
    for p, q, s in CARLESON_TRIPLES:
        for n in (0, 1):
            cfg = CarlesonConfig(p, q, s, n)
            reps = [equivalence_report(mu, w, L, cfg, bound=bound) for mu in mus]
            r = np.array([x["ratios"]["ii_over_iii"] for x in reps])
            o = np.array([x["ratios"]["op_over_ii"] for x in reps])
            c_obs = float(max(r.max(), 1.0 / r.min()))
            good = bool(c_obs <= C and all(x["consistent"] for x in reps))
            ok &= good
            rows[f"{cfg.case}{n}"] = {"p": p, "q": q, "s": s, "n": n, "ratio_min": float(r.min()),
                                      "ratio_max": float(r.max()), "window_C": c_obs,
                                      "spread": float(r.max() / r.min()),
                                      "max_op_over_ii": float(o.max()), "passed": good}
    return {"passed": ok, "details": rows}


def muckenhoupt_suite(Ns=(16, 32)) -> dict:
    """Finite, N-stable suprema for every proof case; divergence for the constant control."""
    rows, ok = [], True
    for a in POWERS:
        for row in proof_case_table(RadialWeight.standard_power(a), 2, Ns, label=f"a={a:g}"):
            if row["N"] != Ns[-1]:
                continue
            good = row["stability"] == "stable" and math.isfinite(row["sup_A"]) and math.isfinite(row["sup_B"])
            ok &= good
            rows.append({**row, "passed": good})
    sup = {n: muckenhoupt_A(StepWeight(np.ones(n)), StepWeight(np.ones(n)), 2.0) for n in Ns}
    control = stability(sup)
    ctrl_ok = control["flag"] == "divergent with N"
    return {"passed": ok and ctrl_ok,
            "details": {"cases": rows, "negative_control": {**control, "sup_A": sup, "passed": ctrl_ok}}}


def derivative_check(n_points: int = 100, h: float = 1e-5, seed: int = 0, tol: float = 1e-6) -> dict:
    """Closed-form derivatives against a central difference of the next-lower derivative."""
    rng = np.random.default_rng(seed)
    z = 0.85 * np.sqrt(rng.random(n_points)) * np.exp(2j * np.pi * rng.random(n_points))
    a = 0.7 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
    funcs = {"kernel": AnalyticFunction.kernel(a, 2.0 + 2.0 * rng.random()),
             "monomial": AnalyticFunction.monomial(int(rng.integers(3, 9)))}
    rows, ok = {}, True
    for name, f in funcs.items():
        for n in (1, 2, 3):
            lower = f.derivative(n - 1)
            fd = (evaluate(lower, z + h) - evaluate(lower, z - h)) / (2 * h)
            exact = evaluate(f.derivative(n), z)
            rel = float(np.max(np.abs(fd - exact) / np.maximum(np.abs(exact), 1e-300)))
            ok &= rel < tol
            rows[f"{name},n={n}"] = {"max_relative_error": rel, "passed": rel < tol}
    return {"passed": ok, "details": rows}


def parameter_solver(n_cases: int = 200, seed: int = 0) -> dict:
    """Random admissible exponent sets: the solver output lies in (0,1)^2 and meets all six inequalities."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(n_cases):
        p = float(np.exp(rng.uniform(np.log(1.05), np.log(20.0))))
        q = float(np.exp(rng.uniform(np.log(0.25), np.log(20.0))))
        beta = float(rng.uniform(0.05, 4.0))
        alpha = float(rng.uniform(0.01, beta))
        gamma = float(rng.uniform(0.05, 4.0))
        M = 1 + 1 / p + (beta + gamma) / q + float(rng.uniform(1e-3, 3.0))
        try:
            eta, theta = solve_eta_theta(p, q, alpha, beta, gamma, M)
            good = 0 < eta < 1 and 0 < theta < 1 and all(eta_theta_inequalities(p, q, alpha, beta, gamma, M,
                                                                                eta, theta))
            if not good:
                failures.append({"case": i, "eta": eta, "theta": theta})
        except Exception as exc:  # any failure on admissible input is a defect
            failures.append({"case": i, "error": str(exc)})
    return {"passed": not failures, "details": {"cases": n_cases, "failures": failures[:10],
                                                "n_failures": len(failures)}}


def duality(n_arrays: int = 50, seed: int = 0, ratio: float = 0.999) -> dict:
    """Extremizer pairing against the dual mixed norm on random finite arrays."""
    rng = np.random.default_rng(seed)
    worst, bad = math.inf, []
    for i in range(n_arrays):
        p = float(np.exp(rng.uniform(np.log(1.1), np.log(10.0))))
        q = float(np.exp(rng.uniform(np.log(1.1), np.log(10.0))))
        rows = [rng.standard_normal(int(k)) + 1j * rng.standard_normal(int(k))
                for k in rng.integers(1, 20, size=int(rng.integers(1, 8)))]
        g = duality_gap(rows, p, q, n_random=0)
        r = g["lower"] / g["norm"]
        worst = min(worst, r)
        if r < ratio:
            bad.append({"array": i, "p": p, "q": q, "ratio": r})
    return {"passed": not bad, "details": {"min_lower_over_norm": worst, "failures": bad}}


CHECKS: dict[int, tuple[str, Callable[[], dict]]] = {
    1: ("closed-form norms", closed_form_norms),
    2: ("weight exponents", weight_exponents),
    3: ("analysis coefficient equivalence", analysis_equivalence),
    4: ("synthesis bound", synthesis_bound),
    5: ("decomposition iteration", decomposition_iteration),
    6: ("Carleson equivalence", carleson_equivalence),
    7: ("Muckenhoupt suite", muckenhoupt_suite),
    8: ("derivative correctness", derivative_check),
    9: ("parameter solver", parameter_solver),
    10: ("duality", duality),
}


def run_check(i: int) -> dict:
    """Run one acceptance check and time it."""
    name, fn = CHECKS[i]
    t0 = time.perf_counter()
    res = fn()
    return {"id": i, "name": name, "passed": bool(res["passed"]), "details": res["details"],
            "seconds": time.perf_counter() - t0}


def run_checks(ids=None) -> list[dict]:
    """Run the selected checks (all by default) in index order."""
    return [run_check(i) for i in sorted(ids or CHECKS)]
