"""Boundedness of differentiation operators into Lebesgue spaces of discrete measures.

``D^(n) f = f^(n)`` maps ``A^{p,q}_omega`` boundedly into ``L^s_mu`` iff a
lattice sequence built from ``mu(Q_jl)`` lies in a mixed sequence space,
iff the averaging function ``T_{r,u,v}(z) = mu(Delta(z,r)) / ((1-|z|)^u
omega_hat(z)^v)`` lies in a mixed Lebesgue space.  This module evaluates
both quantities and a lower bound for the operator norm.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator

from .atoms import AtomParameters, cell_geometry, synthesize
from .errors import ConfigError
from .functions import (
    DEFAULT_N,
    GAUSS_NODES,
    AnalyticFunction,
    DiscreteMeasure,
    derivative,
    evaluate,
    mixed_norm,
)
from .lattice import DyadicLattice, build_lattice, locate
from .sequences import CoefficientArray, conjugate_exponent, lpq_norm, random_unit_sequence
from .weights import RadialWeight

__all__ = [
    "CarlesonConfig",
    "T_function",
    "condition_ii",
    "condition_iii",
    "estimate_operator_norm",
    "equivalence_report",
    "read_measure_csv",
    "random_measure",
    "CarlesonEmbedding",
]

_EXTRA_LEVELS = 2


@dataclass(frozen=True)
class CarlesonConfig:
    """Exponents ``p, q, s``, derivative order ``n`` and pseudohyperbolic radius ``r``."""

    p: float
    q: float
    s: float
    n: int = 0
    r: float = 0.5

    def __post_init__(self):
        for name in ("p", "q", "s"):
            v = getattr(self, name)
            if not (0 < v < math.inf):
                raise ConfigError(f"{name} must be a positive finite real")
        if int(self.n) != self.n or self.n < 0:
            raise ConfigError("n must be a nonnegative integer")
        if not 0 < self.r < 1:
            raise ConfigError("r must lie in (0, 1)")

    @property
    def case(self) -> str:
        p, q, s = self.p, self.q, self.s
        if s < min(p, q):
            return "a"
        if p <= s < q:
            return "b"
        if q <= s < p:
            return "c"
        return "d"

    @property
    def uv(self) -> tuple[float, float]:
        s, n, p, q = self.s, self.n, self.p, self.q
        return {
            "a": (s * n + 1.0, 1.0),
            "b": (s * n + 1.0 / p, 1.0),
            "c": (s * n + 1.0, s / q),
            "d": (s * (n + 1.0 / p), s / q),
        }[self.case]

    @property
    def dual_exponents(self) -> tuple[float, float]:
        """``((p/s)', (q/s)')``."""
        return conjugate_exponent(self.p / self.s), conjugate_exponent(self.q / self.s)

    def to_dict(self) -> dict:
        u, v = self.uv
        P, Q = self.dual_exponents
        return {"p": self.p, "q": self.q, "s": self.s, "n": int(self.n), "r": self.r,
                "case": self.case, "u": u, "v": v, "P": P, "Q": Q}


def T_function(mu: DiscreteMeasure, w: RadialWeight, cfg: CarlesonConfig, z):
    """``mu(Delta(z, r)) / ((1-|z|)^u omega_hat(|z|)^v)`` at a point or array of points."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) >= 1):
        raise ConfigError("T is defined on the unit disc")
    u, v = cfg.uv
    rho = np.abs(z_arr.ravel())
    mass = mu.disc_mass(z_arr.ravel(), cfg.r)
    out = mass / ((1.0 - rho) ** u * np.asarray(w.hat(rho), dtype=float) ** v)
    return float(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)


def condition_ii(mu: DiscreteMeasure, L: DyadicLattice, w: RadialWeight, cfg: CarlesonConfig) -> dict:
    """Sequence ``mu(Q_jl) K^{s j (n + 1/p)} omega_hat(r_j)^{-s/q}`` and its ``l^{(p/s)', (q/s)'}`` norm."""
    m = mu.cell_mass_array(L)
    hat = np.asarray(w.hat(L.radii[:-1]), dtype=float)[L.j]
    seq = m * float(L.K) ** (cfg.s * L.j * (cfg.n + 1.0 / cfg.p)) * hat ** (-cfg.s / cfg.q)
    P, Q = cfg.dual_exponents
    arr = CoefficientArray(L, seq)
    return {"sequence": arr, "norm": lpq_norm(arr, P, Q)}


_GL = np.polynomial.legendre.leggauss


def _sample_grid(L: DyadicLattice, grid: int):
    """Radial Gauss nodes per annulus and angular counts per level, on a lattice extended by two levels."""
    x, wt = _GL(int(grid))
    levels = []
    K = float(L.K)
    for j in range(L.J_max + 1 + _EXTRA_LEVELS):
        a, b = 1.0 - K**-j, 1.0 - K ** -(j + 1)
        nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
        levels.append((nodes, 0.5 * (b - a) * wt, int(grid) * L.K ** (j + 3)))
    return levels


def _disc_mass_samples(mu: DiscreteMeasure, L: DyadicLattice, r: float, grid: int):
    """Cached ``mu(Delta(z, r))`` on the sampling grid."""
    cache = mu.__dict__.setdefault("_disc_cache", {})
    key = (L.K, L.J_max, float(r), int(grid))
    if key not in cache:
        out = []
        for nodes, wts, n_ang in _sample_grid(L, grid):
            th = 2.0 * np.pi * (np.arange(n_ang) + 0.5) / n_ang
            z = (nodes[:, None] * np.exp(1j * th)[None, :]).ravel()
            out.append((nodes, wts, mu.disc_mass(z, r).reshape(nodes.size, n_ang)))
        cache[key] = out
    return cache[key]


def _mean(vals: np.ndarray, P: float) -> np.ndarray:
    """Circle means along the last axis (max for ``P = inf``)."""
    if math.isinf(P):
        return vals.max(axis=-1)
    m = vals.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return np.where(m[..., 0] > 0, safe[..., 0] * np.mean((vals / safe) ** P, axis=-1) ** (1.0 / P), 0.0)


def condition_iii(mu: DiscreteMeasure, w: RadialWeight, L: DyadicLattice, cfg: CarlesonConfig,
                  grid: int = 8) -> float:
    """Mixed ``L^{(p/s)', (q/s)'}_omega`` norm of ``T_{r,u,v}``.

    ``T`` is sampled on ``grid`` Gauss radii per annulus and
    ``grid * K**(j+3)`` angles per level, over the lattice extended by two
    levels so that pseudo-discs around the deepest masses are covered.
    Infinite exponents become maxima over the samples.
    """
    u, v = cfg.uv
    P, Q = cfg.dual_exponents
    radial_means, radial_w, radii = [], [], []
    for nodes, wts, mass in _disc_mass_samples(mu, L, cfg.r, grid):
        scale = (1.0 - nodes) ** (-u) * np.asarray(w.hat(nodes), dtype=float) ** (-v)
        radial_means.append(_mean(mass, P) * scale)
        radial_w.append(wts)
        radii.append(nodes)
    g = np.concatenate(radial_means)
    if math.isinf(Q):
        return float(g.max())
    dens = w(np.concatenate(radii))
    return float(np.sum(g**Q * dens * np.concatenate(radial_w)) ** (1.0 / Q))


@lru_cache(maxsize=32)
def _test_family(K: int, J_max: int, p: float, q: float, w: RadialWeight, trials: int, seed: int, N: int):
    """Constant, atoms per level and seeded random-sign combinations, with their ``A^{p,q}_omega`` norms."""
    L = build_lattice(K, J_max, 1)
    Lq = build_lattice(K, J_max + _EXTRA_LEVELS, 1)
    params = AtomParameters.build(p, q, w)
    geom = cell_geometry(L)
    # single atoms: the norm depends on the level only (rotation invariance)
    level_norms = []
    for j in range(J_max + 1):
        v = np.zeros(L.n_cells)
        v[L.offsets[j]] = 1.0
        level_norms.append(mixed_norm(synthesize(CoefficientArray(L, v), None, params, w), p, q, w, Lq, N))
    combos = [(AnalyticFunction({0: 1.0}), mixed_norm(AnalyticFunction({0: 1.0}), p, q, w, Lq, N))]
    rng = np.random.default_rng(seed)
    for _ in range(int(trials)):
        lam = random_unit_sequence(L, p, q, rng)
        signs = rng.choice([-1.0, 1.0], size=L.n_cells)
        lam = CoefficientArray(L, np.abs(lam.values) * signs)
        F = synthesize(lam, None, params, w)
        combos.append((F, mixed_norm(F, p, q, w, Lq, N)))
    return L, params, geom.points, np.array(level_norms), combos


def estimate_operator_norm(mu: DiscreteMeasure, w: RadialWeight, L: DyadicLattice, cfg: CarlesonConfig,
                           trials: int = 10, seed: int = 0, N: int = 1024) -> float:
    """Lower bound for ``||D^(n)||`` from ``A^{p,q}_omega`` to ``L^s_mu``.

    Maximum of ``||f^(n)||_{L^s_mu} / ||f||`` over the constant function,
    single atoms at every cell center and ``trials`` random-sign atom
    combinations (seeded).
    """
    if int(trials) < 10:
        raise ConfigError("trials must be at least 10")
    pts, ms = mu.atoms()
    if pts.size == 0 or not np.any(ms > 0):
        return 0.0
    Lf, params, centers, level_norms, combos = _test_family(
        L.K, L.J_max, float(cfg.p), float(cfg.q), w, int(trials), int(seed), int(N))
    n, s, M = int(cfg.n), cfg.s, params.M_exp
    # atom derivatives at the mass points, all centers at once
    rho = np.abs(centers)
    scale = (1.0 - rho) ** (M - 1.0 / cfg.p) * np.asarray(w.hat(rho), dtype=float) ** (-1.0 / cfg.q)
    poch = math.prod(M + i for i in range(n))
    best = 0.0
    step = max(1, 2_000_000 // max(pts.size, 1))
    for c0 in range(0, centers.size, step):
        a = centers[c0:c0 + step, None]
        vals = np.abs(scale[c0:c0 + step, None] * poch * np.conj(a) ** n
                      * np.exp(-(M + n) * np.log(1.0 - np.conj(a) * pts[None, :])))
        lp = (vals**s @ ms) ** (1.0 / s) / level_norms[Lf.j[c0:c0 + step]]
        best = max(best, float(lp.max()))
    for F, nrm in combos:
        vals = np.abs(evaluate(derivative(F, n), pts))
        best = max(best, float(np.sum(ms * vals**s) ** (1.0 / s)) / nrm)
    return best


def equivalence_report(mu: DiscreteMeasure, w: RadialWeight, L: DyadicLattice, cfg: CarlesonConfig,
                       *, trials: int = 10, seed: int = 0, grid: int = 8, bound: float = 10.0) -> dict:
    """The three quantities of the characterisation and their pairwise ratios.

    ``consistent`` records whether ``opnorm_lower**s <= bound * cond_ii``.
    """
    ii = condition_ii(mu, L, w, cfg)["norm"]
    iii = condition_iii(mu, w, L, cfg, grid)
    op = estimate_operator_norm(mu, w, L, cfg, trials, seed) ** cfg.s

    def ratio(a, b):
        return float(a / b) if b > 0 else (1.0 if a == 0 else math.inf)

    return {
        "config": cfg.to_dict(),
        "opnorm_lower_s": float(op),
        "cond_ii_norm": float(ii),
        "cond_iii_norm": float(iii),
        "ratios": {"ii_over_iii": ratio(ii, iii), "op_over_ii": ratio(op, ii), "op_over_iii": ratio(op, iii)},
        "consistent": bool(op <= bound * ii * (1 + 1e-12)),
        "lattice": {"K": L.K, "J_max": L.J_max},
    }


def read_measure_csv(path_or_buf, L: DyadicLattice | None = None) -> DiscreteMeasure:
    """Point masses from ``re, im, mass`` rows or cell masses from ``j, l, mass`` rows."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    cols = set(reader.fieldnames or [])
    rows = list(reader)
    try:
        if {"re", "im", "mass"} <= cols:
            pts = np.array([complex(float(r["re"]), float(r["im"])) for r in rows], dtype=complex)
            ms = np.array([float(r["mass"]) for r in rows])
            return DiscreteMeasure(pts, ms)
        if {"j", "l", "mass"} <= cols:
            if L is None:
                raise ConfigError("per-cell measure needs a lattice")
            cells: dict = {}
            for r in rows:
                key = (int(r["j"]), int(r["l"]))
                cells[key] = cells.get(key, 0.0) + float(r["mass"])
            return DiscreteMeasure(cell_masses=cells, lattice=L)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed measure row: {exc}") from exc
    raise ConfigError("measure CSV needs columns (re, im, mass) or (j, l, mass)")


def random_measure(L: DyadicLattice, rng: np.random.Generator, max_atoms: int = 50) -> DiscreteMeasure:
    """Random point masses inside the lattice: level uniform, position uniform in the level, mass log-uniform."""
    k = int(rng.integers(1, max_atoms + 1))
    j = rng.integers(0, L.J_max + 1, size=k)
    lo, hi = L.radii[j], L.radii[j + 1]
    rad = lo + (hi - lo) * rng.random(k)
    pts = rad * np.exp(2j * np.pi * rng.random(k))
    masses = np.exp(rng.uniform(-3, 0, size=k) * math.log(10.0))
    return DiscreteMeasure(pts, masses)


class CarlesonEmbedding(BaseEstimator):
    """Estimator wrapper: ``fit(mu)`` computes the equivalence report."""

    def __init__(self, p=2.0, q=2.0, s=2.0, n=0, r=0.5, K=2, J_max=6, weight=None,
                 trials=10, seed=0, grid=8):
        self.p = p
        self.q = q
        self.s = s
        self.n = n
        self.r = r
        self.K = K
        self.J_max = J_max
        self.weight = weight
        self.trials = trials
        self.seed = seed
        self.grid = grid

    def fit(self, mu: DiscreteMeasure, y=None):
        from .weights import weight_from_config

        w = self.weight if isinstance(self.weight, RadialWeight) else weight_from_config(self.weight)
        L = build_lattice(self.K, self.J_max, 1)
        cfg = CarlesonConfig(self.p, self.q, self.s, self.n, self.r)
        self.report_ = equivalence_report(mu, w, L, cfg, trials=self.trials, seed=self.seed, grid=self.grid)
        return self

    def score(self, mu: DiscreteMeasure, y=None) -> float:
        """Condition (ii) norm of ``mu`` (a boundedness score)."""
        from .weights import weight_from_config

        w = self.weight if isinstance(self.weight, RadialWeight) else weight_from_config(self.weight)
        L = build_lattice(self.K, self.J_max, 1)
        return condition_ii(mu, L, w, CarlesonConfig(self.p, self.q, self.s, self.n, self.r))["norm"]
