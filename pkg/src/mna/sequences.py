"""Mixed norm sequence spaces indexed by the dyadic lattice."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .lattice import DyadicLattice

__all__ = [
    "CoefficientArray",
    "lpq_norm",
    "conjugate_exponent",
    "duality_gap",
    "read_coefficients_csv",
    "random_unit_sequence",
]


@dataclass(eq=False)
class CoefficientArray:
    """Complex coefficients on a lattice.

    ``values`` has shape ``(n_cells,)`` for double indices ``(j, l)`` or
    ``(n_cells, M_sub**2)`` for triple indices ``(j, l, k)``, in the flat
    cell order of the lattice.
    """

    lattice: DyadicLattice
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.lattice.n_cells
        ok = self.values.shape == (n,) or self.values.shape == (n, self.lattice.M_sub**2)
        if not ok:
            raise ConfigError(
                f"coefficient shape {self.values.shape} does not match lattice with {n} cells"
            )

    @classmethod
    def zeros(cls, L: DyadicLattice, triple: bool = False) -> "CoefficientArray":
        shape = (L.n_cells, L.M_sub**2) if triple else (L.n_cells,)
        return cls(L, np.zeros(shape, dtype=complex))

    @property
    def triple(self) -> bool:
        return self.values.ndim == 2

    def rows(self) -> list[np.ndarray]:
        """Entries grouped by level ``j``."""
        off = self.lattice.offsets
        return [self.values[off[j]:off[j + 1]].ravel() for j in range(self.lattice.J_max + 1)]

    def row_norms(self, p: float) -> np.ndarray:
        return np.array([_lp(r, p) for r in self.rows()])

    def row_sup(self) -> np.ndarray:
        return self.row_norms(math.inf)

    def __getitem__(self, key):
        j, l = key[0], key[1]
        c = self.lattice.flat_index(j, l)
        if len(key) == 3:
            return self.values[c, key[2] - 1]
        return self.values[c]

    def copy(self) -> "CoefficientArray":
        return CoefficientArray(self.lattice, self.values.copy())

    def to_csv(self, path_or_buf=None) -> str:
        """Lattice CSV schema with ``re, im`` value columns."""
        L = self.lattice
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "l", "k", "r_lo", "r_hi", "theta_lo", "theta_hi",
                    "center_re", "center_im", "re", "im"])
        vals = self.values if self.triple else self.values[:, None]
        if self.triple:
            r_lo, r_hi = L.sub_r_lo, L.sub_r_hi
            t_lo, t_hi = L.sub_theta_lo, L.sub_theta_hi
            zc = L.sub_centers
        else:
            r_lo, r_hi = L.r_lo[:, None], L.r_hi[:, None]
            t_lo, t_hi = L.theta_lo[:, None], L.theta_hi[:, None]
            zc = L.centers[:, None]
        for c in range(L.n_cells):
            for k in range(vals.shape[1]):
                w.writerow([
                    int(L.j[c]), int(L.l[c]), k + 1 if self.triple else 0,
                    repr(float(r_lo[c, k])), repr(float(r_hi[c, k])),
                    repr(float(t_lo[c, k])), repr(float(t_hi[c, k])),
                    repr(float(zc[c, k].real)), repr(float(zc[c, k].imag)),
                    repr(float(vals[c, k].real)), repr(float(vals[c, k].imag)),
                ])
        text = buf.getvalue()
        if path_or_buf is not None:
            if hasattr(path_or_buf, "write"):
                path_or_buf.write(text)
            else:
                with open(path_or_buf, "w", newline="") as fh:
                    fh.write(text)
        return text


def read_coefficients_csv(path_or_buf, L: DyadicLattice) -> CoefficientArray:
    """Inverse of :meth:`CoefficientArray.to_csv`; absent rows are zero."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    rows = list(reader)
    triple = any(int(r.get("k", 0) or 0) > 0 for r in rows)
    arr = CoefficientArray.zeros(L, triple=triple)
    for r in rows:
        try:
            j, l = int(r["j"]), int(r["l"])
            v = complex(float(r["re"]), float(r["im"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"malformed coefficient row {r!r}") from exc
        if not (0 <= j <= L.J_max and 0 <= l < L.level_size(j)):
            raise ConfigError(f"coefficient index ({j}, {l}) outside lattice")
        c = L.flat_index(j, l)
        if triple:
            k = int(r["k"])
            if not 1 <= k <= L.M_sub**2:
                raise ConfigError(f"subcell index {k} outside lattice")
            arr.values[c, k - 1] = v
        else:
            arr.values[c] = v
    return arr


def _lp(x: np.ndarray, p: float) -> float:
    a = np.abs(np.asarray(x)).ravel()
    if a.size == 0:
        return 0.0
    m = float(a.max())
    if math.isinf(p) or m == 0.0:
        return m
    return m * float(np.sum((a / m) ** p)) ** (1.0 / p)


def _as_rows(lam) -> list[np.ndarray]:
    if isinstance(lam, CoefficientArray):
        return lam.rows()
    if isinstance(lam, np.ndarray) and lam.ndim == 2:
        return [row for row in lam]
    return [np.asarray(row).ravel() for row in lam]


def lpq_norm(lam, p: float, q: float) -> float:
    """``l^{p,q}`` (quasi-)norm: ``l^p`` within each level, ``l^q`` across levels.

    ``lam`` is a :class:`CoefficientArray`, a 2-D array (rows are levels) or
    a ragged sequence of rows.
    """
    p, q = float(p), float(q)
    if not (p > 0 and q > 0):
        raise ConfigError("exponents must be positive")
    rows = _as_rows(lam)
    return _lp(np.array([_lp(r, p) for r in rows]), q)


def conjugate_exponent(p: float) -> float:
    """Dual exponent: ``inf`` for ``p <= 1``, ``p/(p-1)`` for ``1 < p < inf``, ``1`` for ``inf``."""
    p = float(p)
    if not p > 0:
        raise ConfigError("exponent must be positive")
    if p <= 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _row_profile(b: np.ndarray, P: float, p: float) -> np.ndarray:
    """Unit ``l^p`` vector ``u`` with ``<u, b> = ||b||_P`` (``P`` dual to ``p``)."""
    a = np.abs(b)
    if a.max() == 0:
        return np.zeros_like(b)
    # via the angle, so subnormal entries do not overflow
    phase = np.where(a > 0, np.exp(-1j * np.angle(b)), 0.0)
    if math.isinf(P):
        u = np.zeros_like(b)
        i = int(np.argmax(a))
        u[i] = phase[i]
        return u
    if P == 1.0:
        return phase.astype(complex)
    mag = (a / a.max()) ** (P - 1.0)
    u = phase * mag
    return u / _lp(u, p)


def _extremizer(rows: Sequence[np.ndarray], p: float, q: float) -> list[np.ndarray]:
    P, Q = conjugate_exponent(p), conjugate_exponent(q)
    prof = [_row_profile(r, P, p) for r in rows]
    norms = np.array([_lp(r, P) for r in rows])
    if norms.max() == 0:
        return prof
    if math.isinf(Q):
        t = np.zeros_like(norms)
        t[int(np.argmax(norms))] = 1.0
    elif Q == 1.0:
        t = np.ones_like(norms)
    else:
        t = (norms / norms.max()) ** (Q - 1.0)
        t = t / _lp(t, q)
    return [tj * u for tj, u in zip(t, prof)]


def duality_gap(b, p: float, q: float, n_random: int = 200, seed: int | None = 0) -> dict[str, float]:
    """Compare ``||b||_{l^{p',q'}}`` with pairings against unit vectors of ``l^{p,q}``.

    ``lower`` is the best of the Hölder-aligned extremizer and
    ``n_random`` random unit-norm probes; ``norm`` is the dual norm.
    """
    rows = _as_rows(b)
    P, Q = conjugate_exponent(p), conjugate_exponent(q)
    norm = lpq_norm(rows, P, Q)

    def pairing(c):
        return abs(sum(complex(np.sum(cj * bj)) for cj, bj in zip(c, rows)))

    best = pairing(_extremizer(rows, p, q))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        c = [rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape) for r in rows]
        nc = lpq_norm(c, p, q)
        if nc > 0:
            best = max(best, pairing([cj / nc for cj in c]))
    # rounding can put the exact extremizer a hair above the norm
    lower = min(best, norm) if best <= norm * (1 + 1e-12) else best
    return {"lower": float(lower), "norm": float(norm)}


def random_unit_sequence(L: DyadicLattice, p: float, q: float, rng: np.random.Generator,
                         concentration: float = 0.2) -> CoefficientArray:
    """Random coefficients of unit ``l^{p,q}`` norm.

    Each level carries a complex Gaussian direction scaled to unit
    ``l^p`` norm; level weights ``t_j`` are Dirichlet with the given
    ``concentration`` and rows get ``l^p`` norm ``t_j**(1/q)``.  Small
    concentrations make most draws dominated by a few levels, so coarse
    and fine levels are probed equally often at any depth.
    """
    t = rng.dirichlet(np.full(L.J_max + 1, float(concentration)))
    v = np.zeros(L.n_cells, dtype=complex)
    for j in range(L.J_max + 1):
        n = L.level_size(j)
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v[L.offsets[j]:L.offsets[j + 1]] = g / _lp(g, p) * t[j] ** (1.0 / q)
    lam = CoefficientArray(L, v)
    lam.values /= lpq_norm(lam, p, q)
    return lam
