"""Radial weights on the unit disc.

A radial weight is stored through its density as a function of the
distance ``x = 1 - r`` to the boundary.  Working in that variable keeps
full floating-point resolution at scales where ``1 - r`` is far below
machine epsilon, which matters for tails and doubling ratios on grids
``r_i = 1 - 2**-i`` with ``i`` up to 40 and beyond.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, NumericalError

__all__ = [
    "RadialWeight",
    "omega_hat",
    "check_upper_doubling",
    "check_lower_doubling",
    "estimate_exponents",
    "weight_from_config",
    "exponential_weight",
    "log_weight",
]

TAIL_FLOOR = 1e-300
TREND_TOL = 0.02
LOWER_MARGIN = 1e-6
R_RESOLUTION = 2.0 ** -36

_MAX_HALVINGS = 1000
_DIVERGENCE_RUN = 64
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """A nonnegative integrable radial weight.

    Parameters
    ----------
    density : callable
        Vectorised map ``x -> omega(1 - x)`` on ``(0, 1]``.
    tail : callable, optional
        Closed form of ``x -> omega_hat(1 - x)``.  When absent the tail is
        obtained by quadrature.
    kind : str
        ``"standard-power"``, ``"table"`` or ``"custom"``.
    params : mapping
        Constructor parameters, kept for reports and round trips.
    """

    density: ArrayFn
    tail: ArrayFn | None = None
    kind: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)
    min_distance: float = 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.density(1.0 - r)

    def hat(self, r):
        """Shorthand for :func:`omega_hat`."""
        return omega_hat(self, r)

    def hat_at_distance(self, x) -> np.ndarray:
        """Tail integral as a function of the distance ``x = 1 - r``."""
        x = np.asarray(x, dtype=float)
        if self.tail is not None:
            return np.asarray(self.tail(x), dtype=float)
        flat = x.ravel()
        m = self.min_distance
        deep = flat < m
        out = np.empty(flat.shape)
        out[~deep] = _tails_by_quadrature(self, flat[~deep])
        if np.any(deep):
            # power-law continuation from the last resolved dyadic scale
            t0, t1 = _tails_by_quadrature(self, np.array([m, 2.0 * m]))
            slope = math.log2(t1 / t0) if t0 > 0 else 0.0
            out[deep] = t0 * (flat[deep] / m) ** slope
        return out.reshape(x.shape)

    @cached_property
    def _tail_cache(self) -> dict[float, float]:
        return {}

    @cached_property
    def exponents(self) -> dict[str, float | None]:
        """Doubling exponents, estimated once and cached."""
        return estimate_exponents(self)

    @cached_property
    def upper_doubling(self) -> dict[str, Any]:
        return check_upper_doubling(self)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, **dict(self.params)}

    # constructors -------------------------------------------------------
    @classmethod
    def standard_power(cls, a: float = 0.0) -> "RadialWeight":
        """The weight ``(1 + a)(1 - r)**a`` whose tail is ``(1 - r)**(1 + a)``."""
        a = float(a)
        if not a > -1.0:
            raise ConfigError(f"standard-power exponent must exceed -1, got {a}")

        def density(x):
            return (1.0 + a) * np.power(x, a)

        def tail(x):
            return np.power(x, 1.0 + a)

        return cls(density, tail, "standard-power", {"a": a})

    @classmethod
    def from_callable(
        cls,
        func: ArrayFn,
        tail: ArrayFn | None = None,
        *,
        distance: bool = False,
        name: str = "custom",
    ) -> "RadialWeight":
        """Wrap a user function of ``r`` (or of ``x = 1 - r`` when ``distance``)."""
        if distance:
            dens, tl = func, tail
        else:
            def dens(x):
                return func(1.0 - np.asarray(x, dtype=float))

            tl = None if tail is None else (lambda x: tail(1.0 - np.asarray(x, dtype=float)))
        # 1 - (1 - x) keeps only a few digits below this scale
        floor = 0.0 if distance else R_RESOLUTION
        return cls(dens, tl, "custom", {"name": name}, floor)

    @classmethod
    def from_table(cls, knots) -> "RadialWeight":
        """Monotone cubic interpolation through ``(r, omega(r))`` knots.

        Interpolation runs in log-log coordinates ``(-log(1 - r), log omega)``,
        which keeps the interpolant positive and reproduces power laws.
        Outside the knots the weight is constant towards the origin and
        continues the last log-log slope towards the boundary.
        """
        arr = np.asarray(knots, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ConfigError("table weight needs a list of (r, omega) knots")
        r, w = arr[:, 0], arr[:, 1]
        if np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] >= 1:
            raise ConfigError("table knots must have strictly increasing r in [0, 1)")
        if np.any(w <= 0):
            raise ConfigError("table weight values must be positive")
        u = -np.log1p(-r)
        lw = np.log(w)
        if len(r) == 1:
            slope = 0.0
            interp = None
        else:
            slope = (lw[-1] - lw[-2]) / (u[-1] - u[-2])
            interp = PchipInterpolator(u, lw, extrapolate=False)

        def density(x):
            x = np.asarray(x, dtype=float)
            uu = -np.log(x)
            out = np.where(uu <= u[0], lw[0], lw[-1] + slope * (uu - u[-1]))
            if interp is not None:
                inside = (uu > u[0]) & (uu < u[-1])
                if np.any(inside):
                    out = np.where(inside, interp(np.where(inside, uu, u[0])), out)
            return np.exp(out)

        return cls(density, None, "table", {"knots": arr.tolist()})


# ---------------------------------------------------------------------------
# tails


# dyadic piece ratios this close to 1 are treated as non-contracting
_FLOOR_CONTRACTION = 1e-4


def _piece(w: RadialWeight, lo: float, hi: float) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                lambda t: float(w.density(np.asarray(t))), lo, hi,
                epsabs=0.0, epsrel=1e-12, limit=200,
            )
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise NumericalError("weight not integrable near 1") from exc
    # roundoff warnings are harmless; a large error estimate is not.  Weights
    # given as functions of r carry their own rounding near the boundary.
    tol = 1e-6 if w.min_distance == 0.0 else 1e-3
    if not math.isfinite(val) or val < 0 or (caught and err > tol * abs(val)):
        raise NumericalError("weight not integrable near 1")
    return val


def _deep_tail(w: RadialWeight, x0: float) -> float:
    """Integral of the density over ``(0, x0]`` by dyadic descent."""
    if 0.0 < x0 < 4.0 * w.min_distance:
        top = 4.0 * w.min_distance
        return _deep_tail(w, top) - _piece(w, x0, top)
    total = 0.0
    hi = x0
    qs: list[float] = []
    prev = None
    run_ge1 = 0
    for _ in range(_MAX_HALVINGS):
        lo = hi / 2.0
        if lo < w.min_distance:
            # below the evaluator's resolution: geometric extrapolation,
            # only when the pieces clearly contract
            if qs and qs[-1] < 1.0 - _FLOOR_CONTRACTION:
                return total + prev * qs[-1] / (1.0 - qs[-1])
            if prev is None:
                return _piece(w, 0.0, hi)
            raise NumericalError("weight not integrable near 1")
        val = _piece(w, lo, hi)
        total += val
        hi = lo
        if prev is not None and prev > 0:
            q = val / prev
            qs.append(q)
            run_ge1 = run_ge1 + 1 if q >= 1.0 - _FLOOR_CONTRACTION else 0
            if run_ge1 >= _DIVERGENCE_RUN:
                raise NumericalError("weight not integrable near 1")
            if q < 1.0 - _FLOOR_CONTRACTION:
                rem = val * q / (1.0 - q)
                stable = len(qs) >= 3 and abs(qs[-1] - qs[-2]) <= 1e-9 and abs(qs[-2] - qs[-3]) <= 1e-9
                if rem <= 1e-13 * total or stable:
                    return total + rem
        if total > 0 and val <= 1e-17 * total:
            return total
        if total == 0.0 and val == 0.0 and prev == 0.0:
            return 0.0
        prev = val
    if qs and qs[-1] < 1.0:
        return total + val * qs[-1] / (1.0 - qs[-1])
    raise NumericalError("weight not integrable near 1")


def _tails_by_quadrature(w: RadialWeight, xs: np.ndarray) -> np.ndarray:
    cache = w._tail_cache
    out = np.empty(xs.shape, dtype=float)
    todo = sorted({float(x) for x in xs if float(x) not in cache})
    if todo:
        # deepest point by descent, the rest by accumulating pieces outward
        acc = cache.get(todo[0])
        if acc is None:
            acc = _deep_tail(w, todo[0])
            cache[todo[0]] = acc
        for lo, hi in zip(todo[:-1], todo[1:]):
            if hi in cache:
                acc = cache[hi]
                continue
            a = lo
            while a < hi:
                b = min(2.0 * a, hi)
                acc += _piece(w, a, b)
                a = b
            cache[hi] = acc
    for i, x in enumerate(xs):
        out[i] = cache[float(x)]
    return out


def omega_hat(w: RadialWeight, r):
    """Tail integral ``omega_hat(r) = int_r^1 omega(s) ds``.

    Uses the closed form when the weight carries one, otherwise adaptive
    Gauss-Kronrod quadrature on dyadic pieces of ``[r, 1)``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r_arr)) or np.any(r_arr < 0) or np.any(r_arr >= 1):
        raise ConfigError("omega_hat requires 0 <= r < 1")
    vals = w.hat_at_distance(1.0 - r_arr)
    return float(vals) if vals.ndim == 0 else vals


# ---------------------------------------------------------------------------
# doubling tests


def _last_quartile_slope(values: np.ndarray) -> float:
    n = len(values)
    start = min(n - 2, (3 * n) // 4)
    idx = np.arange(start, n)
    if len(idx) < 2:
        return 0.0
    return float(np.polyfit(idx, values[idx], 1)[0])


def _grid_tails(w: RadialWeight, xs: np.ndarray) -> tuple[np.ndarray, int]:
    """Tails on a decreasing distance grid, truncated at the float floor."""
    ok = xs >= w.min_distance
    tails = np.full(xs.shape, np.nan)
    tails[ok] = w.hat_at_distance(xs[ok])
    bad = np.nonzero(~(tails > TAIL_FLOOR))[0]
    n_ok = int(bad[0]) if bad.size else len(xs)
    return tails, n_ok


def check_upper_doubling(w: RadialWeight, r_samples: int = 40, trend_tol: float = TREND_TOL) -> dict[str, Any]:
    """Sampled test of ``omega_hat(r) <= C omega_hat((1 + r)/2)``.

    Returns ``member``, the largest sampled ratio ``C_hat``, the fitted
    log-ratio slope over the last quartile of the grid and the number of
    grid points actually used.
    """
    if r_samples < 16:
        raise ConfigError("r_samples must be at least 16")
    x = 2.0 ** -np.arange(r_samples + 2, dtype=float)
    tails, n_ok = _grid_tails(w, x)
    n_ratio = min(r_samples + 1, n_ok - 1)
    ratios = tails[:n_ratio] / tails[1:n_ratio + 1]
    truncated = n_ratio < r_samples + 1
    slope = _last_quartile_slope(np.log(ratios)) if n_ratio >= 2 else 0.0
    if truncated and not (n_ratio >= 8 and slope >= trend_tol):
        raise NumericalError("tail below floating-point floor; reduce r_samples")
    return {
        "member": bool(slope < trend_tol and not truncated),
        "C_hat": float(np.max(ratios)),
        "trend_slope": slope,
        "grid_used": int(n_ratio),
        "truncated": bool(truncated),
    }


def check_lower_doubling(
    w: RadialWeight,
    K: float,
    r_samples: int = 40,
    margin: float = LOWER_MARGIN,
    trend_tol: float = TREND_TOL,
) -> dict[str, Any]:
    """Sampled test of ``omega_hat(r) >= C omega_hat(1 - (1 - r)/K)`` with ``C > 1``.

    ``C_check`` is the smallest sampled ratio.  Membership also requires
    that ``log(ratio - 1)`` shows no decay trend over the last quartile,
    since ratios creeping towards 1 do not bound the infimum away from 1.
    """
    K = float(K)
    if not K > 1:
        raise ConfigError("K must exceed 1")
    x = 2.0 ** -np.arange(r_samples + 1, dtype=float)
    t_r, n1 = _grid_tails(w, x)
    t_k, n2 = _grid_tails(w, x / K)
    n_ok = min(n1, n2)
    if n_ok < r_samples + 1:
        raise NumericalError("tail below floating-point floor; reduce r_samples")
    ratios = t_r / t_k
    c_check = float(np.min(ratios))
    excess = ratios - 1.0
    if np.all(excess > 0):
        slope = _last_quartile_slope(np.log(excess))
    else:
        slope = -np.inf
    return {
        "member": bool(c_check > 1.0 + margin and slope > -trend_tol),
        "C_check": c_check,
        "K_check": K,
        "trend_slope": float(slope),
    }


# ---------------------------------------------------------------------------
# exponents

_EXP_SCALES = 96
_HALF = 2
_DECAY = 0.02
_FLAT = 1e-6
_LOG_SIGNATURE = 0.62
_BRACKET = (0.01, 64.0)
_BISECT_WIDTH = 0.005
_INFLATE = 0.05


def _bounded(log_sup: np.ndarray, steps_per_scale: int) -> bool:
    """Does a running supremum (log scale) stay bounded along the grid?

    Compares the growth over the last quarter of the grid with the growth
    over the quarter before it; bounded sequences must show geometric
    decay of the increments at rate at least ``_DECAY`` per dyadic scale.
    """
    n = len(log_sup)
    q = (n - 1) // 4
    g3 = log_sup[n - 1 - q] - log_sup[n - 1 - 2 * q]
    g4 = log_sup[n - 1] - log_sup[n - 1 - q]
    if g4 <= _FLAT:
        return True
    # logarithmic growth gives g4/g3 = log(4/3)/log(3/2) ~ 0.71 on any grid,
    # so the required decay never gets weaker than that signature
    rho = min(math.exp(-_DECAY * q / steps_per_scale), _LOG_SIGNATURE)
    return bool(g4 <= rho * g3)


def _bisect(test: Callable[[float], bool], smallest: bool) -> float | None:
    """Threshold of a monotone predicate on the exponent bracket."""
    lo, hi = _BRACKET
    if smallest:
        if not test(hi):
            return None
        if test(lo):
            return lo
        while hi - lo > _BISECT_WIDTH:
            mid = 0.5 * (lo + hi)
            if test(mid):
                hi = mid
            else:
                lo = mid
        return hi
    if not test(lo):
        return None
    if test(hi):
        return hi
    while hi - lo > _BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if test(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _gamma_pieces(w: RadialWeight, xs: np.ndarray):
    """Gauss nodes (in ``v = -log x``) for the pieces between grid distances."""
    v = -np.log(xs)
    a, b = v[:-1, None], v[1:, None]
    nodes = 0.5 * (b - a) * _GL_NODES[None, :] + 0.5 * (a + b)
    wts = 0.5 * (b - a) * _GL_WEIGHTS[None, :]
    y = np.exp(-nodes)
    return y, wts * y * w.density(y)


def estimate_exponents(w: RadialWeight) -> dict[str, float | None]:
    """Sampled doubling exponents of a weight.

    ``beta`` is the smallest ``b`` with ``omega_hat(r) <= C ((1-r)/(1-t))**b omega_hat(t)``,
    ``gamma`` the smallest ``g`` with
    ``int_0^t ((1-t)/(1-s))**g omega(s) ds <= C omega_hat(t)`` and ``alpha``
    the largest ``a`` with ``omega_hat(t) <= C ((1-t)/(1-r))**a omega_hat(r)``,
    all for ``r <= t`` on a half-dyadic grid.  ``beta`` and ``gamma`` are
    inflated by ``0.05`` so their inequalities hold strictly.  ``alpha`` is
    ``None`` when no positive exponent is found, that is when the weight
    is not in the lower doubling class at sampled resolution.
    """
    steps = _HALF
    xs = 2.0 ** (-np.arange(_EXP_SCALES * steps + 1) / steps)
    tails, n_ok = _grid_tails(w, xs)
    if n_ok < 16 * steps:
        raise NumericalError("tail below floating-point floor; reduce r_samples")
    xs, tails = xs[:n_ok], tails[:n_ok]
    lt = np.log(tails)
    u = -np.log(xs)
    upper = np.triu(np.ones((n_ok, n_ok), dtype=bool))
    dlog = lt[:, None] - lt[None, :]       # log omega_hat(r_i) / omega_hat(r_j)
    du = u[None, :] - u[:, None]           # log of (1 - r_i)/(1 - r_j)

    def running_sup(mat):
        mat = np.where(upper, mat, -np.inf)
        return np.maximum.accumulate(mat.max(axis=0))

    def beta_ok(b):
        return _bounded(running_sup(dlog - b * du), steps)

    def alpha_ok(a):
        return _bounded(running_sup(-dlog + a * du), steps)

    y, wy = _gamma_pieces(w, xs)
    # log((1 - t)/(1 - s)) for every grid t against every quadrature node s
    log_ratio = np.log(xs[1:])[:, None, None] - np.log(y)[None, :, :]
    below = np.tril(np.ones((n_ok - 1, n_ok - 1), dtype=bool))[:, :, None]
    log_ratio = np.where(below, log_ratio, -np.inf)

    def gamma_ok(g):
        acc = np.sum(wy[None, :, :] * np.exp(g * log_ratio), axis=(1, 2))
        log_r = np.log(acc) - lt[1:]
        return _bounded(np.maximum.accumulate(log_r), steps)

    beta = _bisect(beta_ok, smallest=True)
    gamma = _bisect(gamma_ok, smallest=True)
    if beta is None or gamma is None:
        raise NumericalError("weight not in D-hat at sampled resolution")
    alpha = None
    if check_lower_doubling(w, 2.0, r_samples=min(40, n_ok // steps - 1))["member"]:
        alpha = _bisect(alpha_ok, smallest=False)
    beta += _INFLATE
    gamma += _INFLATE
    if alpha is not None:
        alpha = min(alpha, beta)
    return {"alpha": alpha, "beta": float(beta), "gamma": float(gamma)}


# ---------------------------------------------------------------------------
# config

def weight_from_config(cfg: Mapping[str, Any] | None) -> RadialWeight:
    """Build a weight from ``{kind: standard-power, a}`` or ``{kind: table, knots}``."""
    if cfg is None:
        return RadialWeight.standard_power(0.0)
    if not isinstance(cfg, Mapping):
        raise ConfigError("weight config must be a mapping")
    kind = cfg.get("kind", "standard-power")
    if kind == "standard-power":
        try:
            return RadialWeight.standard_power(float(cfg.get("a", 0.0)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid exponent a: {cfg.get('a')!r}") from exc
    if kind == "table":
        if "knots" not in cfg:
            raise ConfigError("table weight needs 'knots'")
        return RadialWeight.from_table(cfg["knots"])
    if kind == "exponential":
        return exponential_weight(_positive(cfg, "c", 1.0))
    if kind == "log":
        return log_weight()
    raise ConfigError(f"unknown weight kind {kind!r}")


def _positive(cfg: Mapping[str, Any], key: str, default: float) -> float:
    try:
        v = float(cfg.get(key, default))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {key}: {cfg.get(key)!r}") from exc
    if not v > 0:
        raise ConfigError(f"{key} must be positive")
    return v


def exponential_weight(c: float = 1.0) -> RadialWeight:
    """``exp(-c / (1 - r))``, a rapidly decreasing weight outside the doubling classes."""
    def density(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, np.exp(-c / np.where(x > 0, x, 1.0)), 0.0)

    def tail(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u = c / np.where(x > 0, x, 1.0)
            return np.where(x > 0, x * np.exp(-u) - c * special.exp1(u), 0.0)

    w = RadialWeight.from_callable(density, tail, distance=True, name="exponential")
    return RadialWeight(w.density, w.tail, "exponential", {"c": float(c)})


def log_weight() -> RadialWeight:
    """``1 / ((1 - r) log^2(e / (1 - r)))`` with tail ``1 / log(e / (1 - r))``."""
    def density(x):
        x = np.asarray(x, dtype=float)
        return 1.0 / (x * np.log(np.e / x) ** 2)

    def tail(x):
        return 1.0 / np.log(np.e / np.asarray(x, dtype=float))

    return RadialWeight(density, tail, "log", {})
