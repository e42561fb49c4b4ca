"""Dyadic polar decomposition of the disc and pseudohyperbolic geometry.

Level ``j`` is the annulus ``r_j <= |z| < r_{j+1}`` with ``r_j = 1 - K**-j``,
cut into ``K**(j+3)`` equal angular sectors.  Cells are indexed by
``(j, l)``; optional subcells ``k = 1..M_sub**2`` split every cell into
``M_sub`` angular slices times ``M_sub`` rings of equal area.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

__all__ = [
    "CELL_BUDGET",
    "DyadicLattice",
    "build_lattice",
    "locate",
    "pseudo_distance",
    "neighbors",
    "is_separated",
    "min_separation",
]

CELL_BUDGET = 10**7
TWO_PI = 2.0 * math.pi
_DIST_RTOL = 1e-9


def pseudo_distance(a, z):
    """Pseudohyperbolic distance ``|a - z| / |1 - conj(a) z|`` (vectorised)."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    num = np.abs(a - z)
    # |1 - conj(a) z|^2 = |a - z|^2 + (1 - |a|^2)(1 - |z|^2) avoids cancellation
    den = np.sqrt(num**2 + (1.0 - np.abs(a) ** 2) * (1.0 - np.abs(z) ** 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(num == 0, 0.0, num / np.where(den == 0, 1.0, den))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DyadicLattice:
    """Truncated dyadic lattice with levels ``0..J_max``.

    Attributes
    ----------
    K, J_max, M_sub : int
        Base, deepest level and subcell factor.
    radii : ndarray
        ``r_0, ..., r_{J_max+1}``; ``r_{J_max+1}`` is the truncation radius.
    """

    K: int
    J_max: int
    M_sub: int = 1
    _neighbor_cache: dict = field(default_factory=dict, repr=False)
    cache: dict = field(default_factory=dict, repr=False)

    # geometry ---------------------------------------------------------
    @cached_property
    def radii(self) -> np.ndarray:
        j = np.arange(self.J_max + 2, dtype=float)
        return 1.0 - float(self.K) ** (-j)

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def level_size(self, j: int) -> int:
        return self.K ** (j + 3)

    @cached_property
    def offsets(self) -> np.ndarray:
        sizes = [self.level_size(j) for j in range(self.J_max + 1)]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @property
    def n_cells(self) -> int:
        return int(self.offsets[-1])

    @property
    def n_subcells(self) -> int:
        return self.n_cells * self.M_sub**2

    def flat_index(self, j, l):
        return self.offsets[np.asarray(j)] + np.asarray(l)

    @cached_property
    def j(self) -> np.ndarray:
        return np.repeat(np.arange(self.J_max + 1), np.diff(self.offsets))

    @cached_property
    def l(self) -> np.ndarray:
        return np.arange(self.n_cells) - self.offsets[self.j]

    @cached_property
    def r_lo(self) -> np.ndarray:
        return self.radii[self.j]

    @cached_property
    def r_hi(self) -> np.ndarray:
        return self.radii[self.j + 1]

    @cached_property
    def theta_lo(self) -> np.ndarray:
        n = float(self.K) ** (self.j + 3)
        return TWO_PI * self.l / n

    @cached_property
    def theta_hi(self) -> np.ndarray:
        n = float(self.K) ** (self.j + 3)
        return TWO_PI * (self.l + 1) / n

    @cached_property
    def centers(self) -> np.ndarray:
        """Polar midpoints of the cells."""
        rm = 0.5 * (self.r_lo + self.r_hi)
        tm = 0.5 * (self.theta_lo + self.theta_hi)
        return rm * np.exp(1j * tm)

    @cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * (self.theta_hi - self.theta_lo) * (self.r_hi**2 - self.r_lo**2)

    def center(self, j: int, l: int) -> complex:
        return complex(self.centers[self.flat_index(j, l)])

    # subcells ---------------------------------------------------------
    @cached_property
    def _sub_geometry(self):
        m = self.M_sub
        t = np.arange(m + 1) / m
        # equal-area rings: r^2 interpolates linearly
        rr = np.sqrt(self.r_lo[:, None] ** 2 + t[None, :] * (self.r_hi**2 - self.r_lo**2)[:, None])
        tt = self.theta_lo[:, None] + t[None, :] * (self.theta_hi - self.theta_lo)[:, None]
        ring = np.repeat(np.arange(m), m)
        slc = np.tile(np.arange(m), m)
        r_lo, r_hi = rr[:, ring], rr[:, ring + 1]
        t_lo, t_hi = tt[:, slc], tt[:, slc + 1]
        return r_lo, r_hi, t_lo, t_hi

    @property
    def sub_r_lo(self) -> np.ndarray:
        return self._sub_geometry[0]

    @property
    def sub_r_hi(self) -> np.ndarray:
        return self._sub_geometry[1]

    @property
    def sub_theta_lo(self) -> np.ndarray:
        return self._sub_geometry[2]

    @property
    def sub_theta_hi(self) -> np.ndarray:
        return self._sub_geometry[3]

    @cached_property
    def sub_centers(self) -> np.ndarray:
        """Polar midpoints of subcells, shape ``(n_cells, M_sub**2)``."""
        r_lo, r_hi, t_lo, t_hi = self._sub_geometry
        return 0.5 * (r_lo + r_hi) * np.exp(0.5j * (t_lo + t_hi))

    @cached_property
    def sub_areas(self) -> np.ndarray:
        r_lo, r_hi, t_lo, t_hi = self._sub_geometry
        return 0.5 * (t_hi - t_lo) * (r_hi**2 - r_lo**2)

    # sampling for set distances ----------------------------------------
    def boundary_samples(self, idx) -> np.ndarray:
        """Four corners, four edge midpoints and the center of each cell."""
        idx = np.atleast_1d(idx)
        r0, r1 = self.r_lo[idx], self.r_hi[idx]
        t0, t1 = self.theta_lo[idx], self.theta_hi[idx]
        rm, tm = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
        rs = np.stack([r0, r0, r1, r1, r0, r1, rm, rm, rm], axis=1)
        ts = np.stack([t0, t1, t0, t1, tm, tm, t0, t1, tm], axis=1)
        return rs * np.exp(1j * ts)

    # export -------------------------------------------------------------
    def to_csv(self, path_or_buf=None) -> str:
        """Write one row per subcell (``k = 1..M_sub**2``)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "l", "k", "r_lo", "r_hi", "theta_lo", "theta_hi", "center_re", "center_im"])
        r_lo, r_hi, t_lo, t_hi = self._sub_geometry
        zc = self.sub_centers
        for c in range(self.n_cells):
            for k in range(self.M_sub**2):
                w.writerow([
                    int(self.j[c]), int(self.l[c]), k + 1,
                    repr(float(r_lo[c, k])), repr(float(r_hi[c, k])),
                    repr(float(t_lo[c, k])), repr(float(t_hi[c, k])),
                    repr(float(zc[c, k].real)), repr(float(zc[c, k].imag)),
                ])
        text = buf.getvalue()
        if path_or_buf is not None:
            if hasattr(path_or_buf, "write"):
                path_or_buf.write(text)
            else:
                with open(path_or_buf, "w", newline="") as fh:
                    fh.write(text)
        return text


def build_lattice(K: int = 2, J_max: int = 6, M_sub: int = 1) -> DyadicLattice:
    """Build a lattice after checking the cell budget."""
    if int(K) != K or K < 2:
        raise ConfigError(f"K must be an integer >= 2, got {K}")
    if int(J_max) != J_max or J_max < 0:
        raise ConfigError(f"J_max must be a nonnegative integer, got {J_max}")
    if int(M_sub) != M_sub or M_sub < 1:
        raise ConfigError(f"M_sub must be a positive integer, got {M_sub}")
    K, J_max, M_sub = int(K), int(J_max), int(M_sub)
    count = sum(K ** (j + 3) for j in range(J_max + 1)) * M_sub**2
    if count > CELL_BUDGET:
        raise ConfigError(f"cell budget exceeded: {count} cells > {CELL_BUDGET}")
    return DyadicLattice(K, J_max, M_sub)


def _level_of(L: DyadicLattice, rho: np.ndarray) -> np.ndarray:
    radii = L.radii
    j = np.searchsorted(radii, rho, side="right") - 1
    return j


def locate(L: DyadicLattice, z, *, subcell: bool = False):
    """Index ``(j, l)`` (or ``(j, l, k)``) of the cell containing ``z``.

    Works on scalars and arrays.  Cells are closed at the inner radius and
    the starting angle, open at the outer radius and the final angle.
    """
    z_arr = np.asarray(z, dtype=complex)
    rho = np.abs(z_arr)
    if np.any(rho >= L.r_max):
        raise ConfigError("beyond lattice truncation")
    j = _level_of(L, rho)
    n = float(L.K) ** (j + 3)
    theta = np.mod(np.angle(z_arr), TWO_PI)
    l = np.floor(theta * n / TWO_PI).astype(np.int64)
    nn = n.astype(np.int64)
    # correct rounding against the exact boundary angles
    l = np.where(TWO_PI * l / n > theta, l - 1, l)
    l = np.where(TWO_PI * (l + 1) / n <= theta, l + 1, l)
    l = np.mod(l, nn)
    if not subcell:
        if z_arr.ndim == 0:
            return int(j), int(l)
        return j, l
    c = L.flat_index(j, l)
    m = L.M_sub
    r_lo, r_hi = L.r_lo[c], L.r_hi[c]
    frac_r = (rho**2 - r_lo**2) / (r_hi**2 - r_lo**2)
    ring = np.clip(np.floor(frac_r * m).astype(np.int64), 0, m - 1)
    t_lo, t_hi = L.theta_lo[c], L.theta_hi[c]
    frac_t = (theta - t_lo) / (t_hi - t_lo)
    frac_t = np.where(frac_t < 0, frac_t + TWO_PI / (t_hi - t_lo), frac_t)
    slc = np.clip(np.floor(frac_t * m).astype(np.int64), 0, m - 1)
    k = ring * m + slc + 1
    if z_arr.ndim == 0:
        return int(j), int(l), int(k)
    return j, l, k


def _angular_candidates(L: DyadicLattice, c: int, i: int, window: float) -> np.ndarray:
    """Flat indices at level ``i`` whose sectors lie within ``window`` radians of cell ``c``."""
    n = L.level_size(i)
    if window >= math.pi:
        return L.offsets[i] + np.arange(n)
    lo = L.theta_lo[c] - window
    hi = L.theta_hi[c] + window
    m0 = math.floor(lo * n / TWO_PI) - 1
    m1 = math.ceil(hi * n / TWO_PI) + 1
    ms = np.unique(np.mod(np.arange(m0, m1 + 1), n))
    return L.offsets[i] + ms


def _set_distance(L: DyadicLattice, c: int, cand: np.ndarray, metric: str) -> np.ndarray:
    a = L.boundary_samples(c)[0]
    b = L.boundary_samples(cand)
    if metric == "euclid":
        d = np.abs(a[None, :, None] - b[:, None, :])
    else:
        d = pseudo_distance(a[None, :, None], b[:, None, :])
    return d.reshape(len(cand), -1).min(axis=1)


def _parse_mode(mode) -> tuple[str, float | None]:
    if isinstance(mode, tuple):
        name, r = mode
        return str(name), float(r)
    mode = str(mode)
    if mode in ("euclidean", "paper"):
        return "euclidean", None
    if mode.startswith("pseudo"):
        inner = mode[len("pseudo"):].strip("()= ")
        return "pseudo", float(inner) if inner else 0.5
    raise ConfigError(f"unknown neighbor mode {mode!r}")


def neighbors(L: DyadicLattice, j: int, l: int, mode="euclidean") -> list[tuple[int, int]]:
    """Neighbor index set of the cell ``(j, l)``.

    ``mode="euclidean"`` (alias ``"paper"``) keeps cells at Euclidean set
    distance at most ``K**-(j+1) * (1 - 1/K)``; ``mode=("pseudo", r)`` or
    ``"pseudo(r)"`` keeps cells at pseudohyperbolic set distance below ``r``.
    Set distances are sampled on corners, edge midpoints and centers.
    """
    name, r = _parse_mode(mode)
    key = (name, r, int(j), int(l))
    if key in L._neighbor_cache:
        return L._neighbor_cache[key]
    if not (0 <= j <= L.J_max and 0 <= l < L.level_size(j)):
        raise ConfigError(f"cell ({j}, {l}) not in lattice")
    c = int(L.flat_index(j, l))
    K = L.K
    out: list[int] = []
    if name == "euclidean":
        thr = K ** (-(j + 1)) * (1.0 - 1.0 / K) * (1.0 + _DIST_RTOL)
        levels = range(max(0, j - 1), min(L.J_max, j + 2) + 1)
        for i in levels:
            rho = min(L.radii[i], L.radii[j])
            window = math.pi if rho <= thr else 0.5 * math.pi * thr / rho
            cand = _angular_candidates(L, c, i, window)
            d = _set_distance(L, c, cand, "euclid")
            out.extend(cand[d <= thr].tolist())
    else:
        # pseudo distance < r forces (1-|z|)/(1-|a|) within a factor (1+r)/(1-r)
        spread = math.log((1 + r) / (1 - r)) / math.log(K) + 2
        lo_i = max(0, int(math.floor(j - spread)))
        hi_i = min(L.J_max, int(math.ceil(j + spread)))
        bound = r / math.sqrt(1 - r * r)
        for i in range(lo_i, hi_i + 1):
            rho = min(L.radii[i], L.radii[j])
            # Euclidean reach allowed by the pseudo ball, using its outer points
            reach = bound * math.sqrt((1 - L.radii[j] ** 2) * (1 - L.radii[i] ** 2))
            window = math.pi if rho <= reach else 0.5 * math.pi * reach / rho
            cand = _angular_candidates(L, c, i, window)
            d = _set_distance(L, c, cand, "pseudo")
            out.extend(cand[d < r].tolist())
    res = sorted({(int(L.j[x]), int(L.l[x])) for x in out})
    L._neighbor_cache[key] = res
    return res


def neighbor_union(L: DyadicLattice, j: int, l: int, mode="euclidean") -> np.ndarray:
    """Flat indices of the cells forming the union over the neighbor set."""
    idx = neighbors(L, j, l, mode)
    return np.array([L.flat_index(a, b) for a, b in idx], dtype=np.int64)


def min_separation(points: Sequence[complex] | np.ndarray, chunk: int = 2048) -> float:
    """Smallest pairwise pseudohyperbolic distance between distinct indices."""
    z = np.asarray(points, dtype=complex).ravel()
    if z.size < 2:
        return math.inf
    best = math.inf
    for s in range(0, z.size, chunk):
        block = z[s:s + chunk]
        d = pseudo_distance(block[:, None], z[None, :])
        rows = np.arange(block.size)
        d[rows, s + rows] = np.inf
        best = min(best, float(d.min()))
    return best


def is_separated(points: Iterable[complex], delta: float) -> bool:
    """True iff every pair of distinct points is at pseudo distance >= ``delta``."""
    pts = np.asarray(list(points), dtype=complex)
    if np.any(np.abs(pts) >= 1):
        raise ConfigError("points must lie in the unit disc")
    return bool(min_separation(pts) >= delta)
