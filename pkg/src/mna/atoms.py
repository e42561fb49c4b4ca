"""Atomic synthesis, lattice analysis and iterative atomic decomposition.

Atoms are kernels ``(1 - conj(a) z)**(-M)`` normalised so that a
coefficient sequence in ``l^{p,q}`` synthesises a function of comparable
``A^{p,q}_omega`` norm.  The decomposition replaces the weighted Bergman
projection by a Riemann sum over lattice subcells and iterates the
resulting operator on residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ConfigError, NumericalError
from .functions import DEFAULT_N, AnalyticFunction, KernelBlock, PointGeometry, mixed_norm
from .lattice import DyadicLattice, build_lattice, is_separated, min_separation
from .sequences import CoefficientArray, conjugate_exponent, lpq_norm
from .weights import RadialWeight, weight_from_config

__all__ = [
    "ORDER_MARGIN",
    "AtomParameters",
    "min_atom_order",
    "eta_theta_inequalities",
    "solve_eta_theta",
    "cell_geometry",
    "subcell_geometry",
    "synthesize",
    "cell_sup",
    "analyze",
    "apply_S_eta",
    "atomic_decompose",
    "AtomicDecomposition",
]

ORDER_MARGIN = 0.5
_ABORT_RUN = 3


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _order_threshold(p: float, q: float, beta: float, gamma: float) -> float:
    return 1.0 + _inv(p) + (beta + gamma) / q


def min_atom_order(p: float, q: float, w: RadialWeight) -> float:
    """Smallest kernel power used for atoms: the admissibility threshold plus 0.5."""
    ex = w.exponents
    return _order_threshold(float(p), float(q), ex["beta"], ex["gamma"]) + ORDER_MARGIN


def eta_theta_inequalities(p, q, alpha, beta, gamma, M, eta, theta) -> list[bool]:
    """The six strict inequalities that ``(eta, theta)`` must satisfy, in order."""
    ip = 1.0 / p
    pc = conjugate_exponent(p)
    return [
        M * (1 - theta) * pc > 1,
        M * (eta - theta) + (1 - eta) * ip > 0,
        pc * (1 - eta) * (M - ip - beta / q) > 1,
        p * M * theta > 1,
        q * eta * (M - ip) > gamma,
        M * (eta - theta) + (1 - eta) * ip < alpha * eta / q,
    ]


def solve_eta_theta(p, q, alpha, beta, gamma, M_exp) -> tuple[float, float]:
    """Midpoint choice of ``(eta, theta)`` in the admissible intervals.

    Raises
    ------
    ConfigError
        If ``p`` is not in ``(1, inf)`` or the midpoints violate any of the
        six inequalities (the message lists which ones).
    """
    p, q, M = float(p), float(q), float(M_exp)
    if not (1 < p < math.inf):
        raise ConfigError("solve_eta_theta needs 1 < p < inf")
    if alpha is None:
        raise ConfigError("alpha is undefined for this weight")
    if alpha > beta:
        raise ConfigError("alpha must not exceed beta")
    ip, pc = 1.0 / p, conjugate_exponent(p)
    s = M - ip
    eta_lo = gamma / (q * s)
    with np.errstate(divide="ignore"):
        d = pc * (s - beta / q)
        cap = 1.0 - 1.0 / d if d > 0 else -math.inf
    eta_hi = min(cap, (M - 1.0) / s)
    eta = 0.5 * (eta_lo + eta_hi)
    theta_lo = ((s - alpha / q) * eta + ip) / M
    theta_hi = (s * eta + ip) / M
    theta = 0.5 * (theta_lo + theta_hi)
    ok = eta_theta_inequalities(p, q, alpha, beta, gamma, M, eta, theta)
    bad = [i + 1 for i, v in enumerate(ok) if not v]
    if not (0 < eta < 1 and 0 < theta < 1) and not bad:
        bad = [0]
    if bad:
        raise ConfigError(
            "no admissible (eta, theta): violated inequality " + ", ".join(map(str, bad))
        )
    return float(eta), float(theta)


@dataclass(frozen=True)
class AtomParameters:
    """Exponents and auxiliary indices for synthesis and decomposition.

    ``eta`` and ``theta`` are the interpolation indices from
    :func:`solve_eta_theta` (``None`` outside ``1 < p < inf`` or without
    ``alpha``); ``eta_proj`` is the index of the reproducing kernel
    ``(1 - conj(zeta) z)**(-(eta_proj + 2))``.
    """

    p: float
    q: float
    M_exp: float
    eta: float | None = None
    theta: float | None = None
    eta_proj: float | None = None
    M_sub: int = 1
    alpha: float | None = None
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0) or math.isinf(self.q):
            raise ConfigError("need p > 0 and 0 < q < inf")
        if not self.M_exp > _order_threshold(self.p, self.q, self.beta, self.gamma):
            raise ConfigError("kernel power below the admissibility threshold")
        if self.eta_proj is not None and not self.eta_proj > self.beta / self.q + _inv(self.p) - 1:
            raise ConfigError("projection index too small for the weight")

    @classmethod
    def build(cls, p, q, w: RadialWeight, *, M_exp=None, eta_proj=None, M_sub: int = 1) -> "AtomParameters":
        ex = w.exponents
        M = min_atom_order(p, q, w) if M_exp is None else float(M_exp)
        eta = theta = None
        if 1 < p < math.inf and ex["alpha"] is not None:
            eta, theta = solve_eta_theta(p, q, ex["alpha"], ex["beta"], ex["gamma"], M)
        if eta_proj is None:
            eta_proj = min_atom_order(p, q, w)
        return cls(float(p), float(q), M, eta, theta, float(eta_proj), int(M_sub),
                   ex["alpha"], ex["beta"], ex["gamma"])

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("p", "q", "M_exp", "eta", "theta", "eta_proj", "M_sub", "alpha", "beta", "gamma")}


# lattice point geometry --------------------------------------------------

def cell_geometry(L: DyadicLattice) -> PointGeometry:
    """Cell centers grouped by level."""
    if "cell_geometry" not in L.cache:
        groups = []
        for j in range(L.J_max + 1):
            rm = 0.5 * (L.radii[j] + L.radii[j + 1])
            groups.append((rm, L.level_size(j), np.arange(L.offsets[j], L.offsets[j + 1])))
        L.cache["cell_geometry"] = PointGeometry(groups)
    return L.cache["cell_geometry"]


def subcell_geometry(L: DyadicLattice) -> PointGeometry:
    """Subcell centers grouped by (level, ring), flat order ``cell * M_sub**2 + k - 1``."""
    if "subcell_geometry" not in L.cache:
        m = L.M_sub
        groups = []
        for j in range(L.J_max + 1):
            c0 = int(L.offsets[j])
            n = L.level_size(j) * m
            s = np.arange(n)
            for ring in range(m):
                rm = 0.5 * (L.sub_r_lo[c0, ring * m] + L.sub_r_hi[c0, ring * m])
                idx = (c0 + s // m) * m * m + ring * m + s % m
                groups.append((rm, n, idx))
        L.cache["subcell_geometry"] = PointGeometry(groups)
    return L.cache["subcell_geometry"]


def _level_hat(L: DyadicLattice, w: RadialWeight) -> np.ndarray:
    """``omega_hat(r_j)`` per cell."""
    return np.asarray(w.hat(L.radii[:-1]), dtype=float)[L.j]


def _lattice_delta(L: DyadicLattice, triple: bool) -> float:
    key = ("delta", triple)
    if key not in L.cache:
        pts = L.sub_centers.ravel() if triple else L.centers
        L.cache[key] = min_separation(pts) * (1.0 - 1e-9)
    return L.cache[key]


# synthesis ---------------------------------------------------------------

def synthesize(lam: CoefficientArray, points=None, params: AtomParameters = None,
               w: RadialWeight = None) -> AnalyticFunction:
    """Atom sum ``sum lam_i (1-|z_i|)**(M-1/p) omega_hat(z_i)**(-1/q) (1 - conj(z_i) z)**(-M)``.

    Without ``points`` the atoms sit at the cell (or subcell, for triple
    arrays) centers of ``lam.lattice`` and evaluate through the fast ring
    path.  Explicit ``points`` are aligned with ``lam.values.ravel()`` and
    must be separated at least as well as those centers.
    """
    if params is None or w is None:
        raise ConfigError("synthesize needs params and a weight")
    vals = np.asarray(lam.values).ravel()
    if not np.all(np.isfinite(vals)):
        raise ConfigError("coefficients must be finite")
    M = params.M_exp
    if points is None:
        geom = subcell_geometry(lam.lattice) if lam.triple else cell_geometry(lam.lattice)
        z = geom.points
    else:
        z = np.asarray(points, dtype=complex).ravel()
        if z.shape != vals.shape:
            raise ConfigError("points must align with coefficients")
        if np.any(np.abs(z) >= 1):
            raise ConfigError("atom points must lie in the unit disc")
        if not is_separated(z, _lattice_delta(lam.lattice, lam.triple)):
            raise ConfigError("sequence not separated")
    rho = np.abs(z)
    scale = (1.0 - rho) ** (M - _inv(params.p)) * np.asarray(w.hat(rho), dtype=float) ** (-1.0 / params.q)
    coef = vals * scale
    if points is None:
        return AnalyticFunction.from_blocks([KernelBlock(geom, coef, M)])
    keep = coef != 0
    return AnalyticFunction.from_arrays(ker_a=z[keep], ker_M=np.full(keep.sum(), M), ker_c=coef[keep])


# analysis ----------------------------------------------------------------

def cell_sup(f: AnalyticFunction, L: DyadicLattice, sup_grid: int = 9) -> np.ndarray:
    """Max of ``|f|`` over a ``sup_grid x sup_grid`` polar grid per cell, edges and corners included."""
    g = int(sup_grid)
    if g < 4:
        raise ConfigError("sup_grid must be at least 4")
    out = np.zeros(L.n_cells)
    for j in range(L.J_max + 1):
        n = L.level_size(j)
        best = np.zeros(n)
        for r in np.linspace(L.radii[j], L.radii[j + 1], g):
            a = np.abs(f.circle_values(float(r), n * (g - 1))).reshape(n, g - 1)
            best = np.maximum(best, np.maximum(a.max(axis=1), np.roll(a[:, 0], -1)))
        out[L.offsets[j]:L.offsets[j + 1]] = best
    return out


def analyze(f: AnalyticFunction, L: DyadicLattice, p: float, q: float, w: RadialWeight,
            sup_grid: int = 9) -> CoefficientArray:
    """Coefficients ``K**(-j/p) omega_hat(r_j)**(1/q) sup_{Q_jl} |f|``."""
    sup = cell_sup(f, L, sup_grid)
    scale = float(L.K) ** (-L.j * _inv(p)) * _level_hat(L, w) ** (1.0 / q)
    return CoefficientArray(L, scale * sup)


# decomposition -----------------------------------------------------------

def _sub_data(L: DyadicLattice, w: RadialWeight):
    geom = subcell_geometry(L)
    one_minus = 1.0 - np.abs(geom.points) ** 2
    # normalised area measure dA / pi, the one for which the projection reproduces
    area = L.sub_areas.ravel() / math.pi
    hat = np.repeat(_level_hat(L, w), L.M_sub**2)
    return geom, one_minus, area, hat


def apply_S_eta(f: AnalyticFunction, L: DyadicLattice, params: AtomParameters,
                w: RadialWeight) -> dict:
    """Riemann sum of the weighted Bergman projection over lattice subcells.

    Returns ``{"g": AnalyticFunction, "a": CoefficientArray}`` where
    ``a = f(zeta) (1-|zeta|^2)**(1/p) omega_hat(r_j)**(1/q)`` per subcell.
    """
    eta = params.eta_proj
    if eta is None or not eta > params.beta / params.q + _inv(params.p) - 1:
        raise ConfigError("projection index too small for the weight")
    geom, one_minus, area, hat = _sub_data(L, w)
    vals = geom.values_of(f)
    a = vals * one_minus ** _inv(params.p) * hat ** (1.0 / params.q)
    coef = (eta + 1.0) * vals * one_minus**eta * area
    g = AnalyticFunction.from_blocks([KernelBlock(geom, coef, eta + 2.0)])
    return {"g": g, "a": CoefficientArray(L, a.reshape(L.n_cells, L.M_sub**2))}


def _reconstruct(b: CoefficientArray, params: AtomParameters, w: RadialWeight):
    L = b.lattice
    eta = params.eta_proj
    M = eta + 2.0
    geom, one_minus, area, hat = _sub_data(L, w)
    lam = (eta + 1.0) * b.values.ravel() * area / one_minus**2
    coef = lam * one_minus ** (M - _inv(params.p)) * hat ** (-1.0 / params.q)
    rec = AnalyticFunction.from_blocks([KernelBlock(geom, coef, M)])
    return rec, CoefficientArray(L, lam.reshape(L.n_cells, L.M_sub**2))


def _fitted_ratio(hist: list[float]) -> float | None:
    h = np.asarray(hist[1:], dtype=float)
    if h.size < 2 or np.any(h <= 0):
        return None
    slope = np.polyfit(np.arange(h.size), np.log(h), 1)[0]
    return float(math.exp(slope))


def atomic_decompose(f: AnalyticFunction, L: DyadicLattice, params: AtomParameters,
                     w: RadialWeight, n_iter: int = 10, N: int = DEFAULT_N) -> dict:
    """Iterate ``f_n = S(f - f_1 - ... - f_{n-1})`` and accumulate subcell coefficients.

    Returns
    -------
    dict
        ``b`` (accumulated coefficients), ``residual_history`` (entry ``n``
        is the truncated norm of ``f - f_1 - ... - f_n``; entry 0 is that of
        ``f``), ``reconstruction`` (atom sum from ``b``), ``coefficients``
        (normalised atom coefficients), ``coefficient_norm``,
        ``reconstruction_error`` (relative) and ``fitted_ratio``.

    Raises
    ------
    NumericalError
        When the residual grows three iterations in a row.
    """
    if int(n_iter) != n_iter or n_iter < 1:
        raise ConfigError("n_iter must be a positive integer")

    def norm(g):
        return mixed_norm(g, params.p, params.q, w, L, N, include_tail=False)

    resid = f
    hist = [norm(f)]
    b = CoefficientArray.zeros(L, triple=True)
    ups = 0
    for _ in range(int(n_iter)):
        step = apply_S_eta(resid, L, params, w)
        resid = resid - step["g"]
        b.values += step["a"].values
        hist.append(norm(resid))
        ups = ups + 1 if hist[-1] > hist[-2] else 0
        if ups >= _ABORT_RUN:
            raise NumericalError("M_sub too small for contraction")
    rec, lam = _reconstruct(b, params, w)
    base = hist[0]
    err = norm(f - rec) / base if base > 0 else 0.0
    return {
        "b": b,
        "residual_history": [float(x) for x in hist],
        "reconstruction": rec,
        "coefficients": lam,
        "coefficient_norm": lpq_norm(lam, params.p, params.q),
        "reconstruction_error": float(err),
        "fitted_ratio": _fitted_ratio(hist),
    }


class AtomicDecomposition(BaseEstimator):
    """Estimator wrapper around the lattice decomposition.

    ``fit(f)`` runs :func:`atomic_decompose`; ``transform(f)`` returns the
    analysis coefficients and ``inverse_transform(lam)`` synthesises.
    """

    def __init__(self, p=2.0, q=2.0, K=2, J_max=6, M_sub=4, weight=None, n_iter=10,
                 N=DEFAULT_N, sup_grid=9):
        self.p = p
        self.q = q
        self.K = K
        self.J_max = J_max
        self.M_sub = M_sub
        self.weight = weight
        self.n_iter = n_iter
        self.N = N
        self.sup_grid = sup_grid

    def _setup(self):
        w = self.weight if isinstance(self.weight, RadialWeight) else weight_from_config(self.weight)
        L = build_lattice(self.K, self.J_max, self.M_sub)
        return w, L, AtomParameters.build(self.p, self.q, w, M_sub=self.M_sub)

    def fit(self, f: AnalyticFunction, y=None):
        w, L, params = self._setup()
        res = atomic_decompose(f, L, params, w, self.n_iter, self.N)
        self.weight_, self.lattice_, self.params_ = w, L, params
        self.coefficients_ = res["coefficients"]
        self.residual_history_ = res["residual_history"]
        self.reconstruction_ = res["reconstruction"]
        self.reconstruction_error_ = res["reconstruction_error"]
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise ConfigError("estimator is not fitted")

    def transform(self, f: AnalyticFunction) -> CoefficientArray:
        self._check_fitted()
        L = build_lattice(self.K, self.J_max, 1)
        return analyze(f, L, self.p, self.q, self.weight_, self.sup_grid)

    def inverse_transform(self, lam: CoefficientArray) -> AnalyticFunction:
        self._check_fitted()
        return synthesize(lam, None, self.params_, self.weight_)
