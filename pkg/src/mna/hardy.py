"""Two-weight Hardy inequalities on step weights.

A step weight takes a constant positive value on each ``[k, k+1)``,
``k = 0..N-1``.  For the Hardy operators ``int_0^x f`` and ``int_x^oo f``
the two-weight bounds are governed by

    A = sup_x (int_0^x U^s)^(1/s) (int_x^N V^(-s'))^(1/s'),
    B = sup_x (int_x^N U^s)^(1/s) (int_0^x V^(-s'))^(1/s').

On a single interval the logarithm of each product is concave in ``x``,
so the supremum is located exactly from the stationarity condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sequences import conjugate_exponent
from .weights import RadialWeight

__all__ = [
    "PROOF_CASES",
    "StepWeight",
    "muckenhoupt_A",
    "muckenhoupt_B",
    "hardy_ratio",
    "build_proof_steps",
    "stability",
    "proof_case_table",
]

PROOF_CASES = ("1.2-S1", "1.2-S2", "2.2-S5", "2.2-S6", "3.2-S7", "3.2-S8")
# which supremum each case needs: A for the tail operator, B for the partial-sum operator
CASE_CONDITION = {"1.2-S1": "A", "1.2-S2": "B", "2.2-S5": "A", "2.2-S6": "B", "3.2-S7": "A", "3.2-S8": "B"}


@dataclass(frozen=True)
class StepWeight:
    """Positive values on the unit intervals ``[k, k+1)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ConfigError("step weight needs at least one interval")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ConfigError("step weight values must be positive and finite")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    def __call__(self, x):
        k = np.clip(np.floor(np.asarray(x, dtype=float)).astype(int), 0, self.N - 1)
        return self.values[k]

    def scaled(self, c: float) -> "StepWeight":
        return StepWeight(c * self.values)


def _check(U: StepWeight, V: StepWeight, s: float) -> tuple[float, float]:
    if U.N != V.N:
        raise ConfigError("U and V must have equal length")
    s = float(s)
    if not s > 1 or math.isinf(s):
        raise ConfigError("Hardy exponent must satisfy 1 < s < inf")
    return s, conjugate_exponent(s)


def _interval_sup(a, u, b, v, s, sp, samples):
    """Max over ``t in [0, 1]`` of ``(a + t u)^(1/s) (b + (1-t) v)^(1/sp)``, per interval."""
    def F(t):
        return (a + t * u) ** (1.0 / s) * (b + (1.0 - t) * v) ** (1.0 / sp)

    if samples is None:
        # log F is concave; the stationary point is the maximiser
        t = (u * sp * (b + v) - v * s * a) / (u * v * (s + sp))
        t = np.clip(t, 0.0, 1.0)
        return np.maximum(F(t), np.maximum(F(0.0), F(1.0)))
    ts = np.linspace(0.0, 1.0, int(samples) + 2)
    return np.max(np.stack([F(t) for t in ts]), axis=0)


def _sup(first: np.ndarray, second: np.ndarray, s: float, sp: float, samples) -> float:
    """Sup of ``(int_0^x first)^(1/s) (int_x^N second)^(1/sp)`` over ``x in [0, N]``."""
    left = np.concatenate([[0.0], np.cumsum(first)])[:-1]
    right = np.concatenate([np.cumsum(second[::-1])[::-1], [0.0]])[1:]
    return float(np.max(_interval_sup(left, first, right, second, s, sp, samples)))


def muckenhoupt_A(U: StepWeight, V: StepWeight, s: float, *, samples: int | None = None) -> float:
    """``sup_x (int_0^x U^s)^(1/s) (int_x^N V^(-s'))^(1/s')``.

    ``samples`` replaces the exact interior maximisation by that many
    equispaced interior points per interval (plus the endpoints).
    """
    s, sp = _check(U, V, s)
    return _sup(U.values**s, V.values ** (-sp), s, sp, samples)


def muckenhoupt_B(U: StepWeight, V: StepWeight, s: float, *, samples: int | None = None) -> float:
    """``sup_x (int_x^N U^s)^(1/s) (int_0^x V^(-s'))^(1/s')``."""
    s, sp = _check(U, V, s)
    # reflect x -> N - x to reuse the A computation
    return _sup(U.values[::-1] ** s, V.values[::-1] ** (-sp), s, sp, samples)


def _power_integral(c0: float, c1: float, s: float) -> float:
    """``int_0^1 (c0 + t (c1 - c0))^s dt`` for nonnegative endpoints."""
    if abs(c1 - c0) <= 1e-14 * max(abs(c0), abs(c1), 1e-300):
        return c0**s
    return (c1 ** (s + 1) - c0 ** (s + 1)) / ((s + 1) * (c1 - c0))


def hardy_ratio(U: StepWeight, V: StepWeight, f: StepWeight, s: float, operator: str = "tail") -> float:
    """``||U H f||_s / ||V f||_s`` for the step function ``f``, computed exactly.

    ``operator`` is ``"tail"`` for ``H f(x) = int_x^N f`` or ``"partial"``
    for ``int_0^x f``.
    """
    s, _ = _check(U, V, s)
    if f.N != U.N:
        raise ConfigError("f must have the length of the weights")
    fv = f.values
    if operator == "tail":
        ends = np.concatenate([np.cumsum(fv[::-1])[::-1], [0.0]])
    elif operator == "partial":
        ends = np.concatenate([[0.0], np.cumsum(fv)])
    else:
        raise ConfigError("operator must be 'tail' or 'partial'")
    num = sum(U.values[k] ** s * _power_integral(ends[k], ends[k + 1], s) for k in range(U.N))
    den = float(np.sum((V.values * fv) ** s))
    return float((num / den) ** (1.0 / s))


def build_proof_steps(case: str, w: RadialWeight, K: int, p: float, q: float, M_exp: float,
                      eta: float | None = None, theta: float | None = None, N: int = 32,
                      c=None):
    """Step weights ``(U, V, f, s)`` of the Hardy reduction for one case.

    ``r_k = 1 - K**-k``; ``c`` are the level coefficients entering ``f``
    (all ones by default).
    """
    if case not in PROOF_CASES:
        raise ConfigError(f"unknown case {case!r}; expected one of {', '.join(PROOF_CASES)}")
    N = int(N)
    if N < 1:
        raise ConfigError("N must be positive")
    p, q, M = float(p), float(q), float(M_exp)
    k = np.arange(N, dtype=float)
    x = float(K) ** (-k)
    hat = np.asarray(w.hat_at_distance(x), dtype=float)
    ck = np.ones(N) if c is None else np.asarray(c, dtype=float).ravel()[:N]
    family = case[:3]
    if family == "1.2":
        if not (0 < p <= 1 and q / p > 1):
            raise ConfigError("Case 1.2 requires p <= 1 < q/p")
        s = q / p
        if case == "1.2-S1":
            U = hat ** (p / q) / x ** (p * M - 1)
            V = U
            f = ck**p * x ** (p * M - 1) / hat ** (p / q)
        else:
            U = V = hat ** (p / q)
            f = ck**p / hat ** (p / q)
    elif family == "2.2":
        if not (1 < p < math.inf and p < q):
            raise ConfigError("Case 2.2 requires 1 < p < q")
        if eta is None or theta is None:
            raise ConfigError("Case 2.2 requires (eta, theta) from solve_eta_theta")
        s = q / p
        if case == "2.2-S5":
            U = hat ** (p * eta / q) / x ** (eta * (p * M - 1))
            V = U
            f = ck**p * x ** (eta * (p * M - 1)) / hat ** (p * eta / q)
        else:
            d = p * M * (eta - theta) + 1 - eta
            U = hat ** (p * eta / q) / x**d
            V = U
            f = ck**p * x**d / hat ** (p * eta / q)
    else:
        if not (math.isinf(p) and 1 < q < math.inf):
            raise ConfigError("Case 3.2 requires p = inf and 1 < q < inf")
        s = q
        if case == "3.2-S7":
            U = hat ** (1.0 / q) / x ** (M - 1)
            V = U
            f = ck * x ** (M - 1) / hat ** (1.0 / q)
        else:
            U = V = hat ** (1.0 / q)
            f = ck / hat ** (1.0 / q)
    return StepWeight(U), StepWeight(V), StepWeight(f), float(s)


def stability(values: dict[int, float], tol: float = 0.1) -> dict:
    """Compare a supremum at the two largest ``N``; ``stable`` iff the relative change is at most ``tol``."""
    ns = sorted(values)
    a, b = values[ns[-2]], values[ns[-1]]
    rel = abs(b - a) / abs(a) if a else math.inf
    stable = bool(math.isfinite(b) and rel <= tol)
    return {"relative_change": float(rel), "stable": stable,
            "flag": "stable" if stable else "divergent with N"}


def proof_case_table(w: RadialWeight, K: int = 2, Ns=(16, 32), *, label: str = "", params=None) -> list[dict]:
    """One row per proof case with both suprema at every ``N`` and a stability flag.

    ``params`` maps a case family (``"1.2"``, ``"2.2"``, ``"3.2"``) to the
    keyword arguments of :func:`build_proof_steps`; defaults use
    representative exponents for each family and the smallest admissible
    atom order.
    """
    from .atoms import AtomParameters

    if params is None:
        params = {}
        for fam, (p, q) in {"1.2": (0.5, 1.0), "2.2": (2.0, 4.0), "3.2": (math.inf, 2.0)}.items():
            ap = AtomParameters.build(p, q, w)
            params[fam] = {"p": p, "q": q, "M_exp": ap.M_exp, "eta": ap.eta, "theta": ap.theta}
    rows = []
    for case in PROOF_CASES:
        kw = params[case[:3]]
        sup_a, sup_b = {}, {}
        for n in Ns:
            U, V, _, s = build_proof_steps(case, w, K, N=n, **kw)
            sup_a[n] = muckenhoupt_A(U, V, s)
            sup_b[n] = muckenhoupt_B(U, V, s)
        cond = CASE_CONDITION[case]
        st = stability(sup_a if cond == "A" else sup_b)
        for n in Ns:
            rows.append({"case": case, "weight": label, "N": int(n), "condition": cond,
                         "sup_A": sup_a[n], "sup_B": sup_b[n], "stability": st["flag"]})
    return rows
