"""Analytic test functions, circle means and weighted norms."""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, NumericalError
from .lattice import DyadicLattice, locate, pseudo_distance
from .weights import RadialWeight

__all__ = [
    "AnalyticFunction",
    "PointGeometry",
    "KernelBlock",
    "DiscreteMeasure",
    "evaluate",
    "derivative",
    "integral_mean",
    "mixed_norm",
    "lebesgue_norm",
    "function_from_config",
]

DEFAULT_N = 4096
GAUSS_NODES = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_NODES)
_CHUNK = 4_000_000


def _complex_arg(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


class PointGeometry:
    """Kernel base points grouped into equispaced rings.

    Group ``g`` holds ``n_g`` points ``rho_g * exp(2 pi i (m + 1/2) / n_g)``
    stored at flat positions ``idx_g``.  Rings let circle samples of a
    kernel sum be computed as circular convolutions.
    """

    def __init__(self, groups: list[tuple[float, int, np.ndarray]]):
        self.groups = [(float(r), int(n), np.asarray(idx, dtype=np.int64)) for r, n, idx in groups]
        size = sum(n for _, n, _ in self.groups)
        self.points = np.zeros(size, dtype=complex)
        for r, n, idx in self.groups:
            self.points[idx] = r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)

    @property
    def size(self) -> int:
        return self.points.size

    def values_of(self, f) -> np.ndarray:
        """Values of ``f`` at every point, through circle samples."""
        out = np.zeros(self.size, dtype=complex)
        for r, n, idx in self.groups:
            out[idx] = f.circle_values(r, 2 * n)[1::2]
        return out


class KernelBlock:
    """Kernel sum ``sum_m c_m (1 - conj(a_m) z)**(-M)`` over a :class:`PointGeometry`."""

    _MAX_FFT = 1 << 22

    def __init__(self, geometry: PointGeometry, coef, M: float):
        self.geometry = geometry
        self.coef = np.asarray(coef, dtype=complex).ravel()
        if self.coef.size != geometry.size:
            raise ConfigError("block coefficients do not match geometry")
        self.M = float(M)
        self._spectra: dict = {}
        self._nonzero = [bool(np.any(self.coef[idx])) for _, _, idx in geometry.groups]

    def scaled(self, c: complex) -> "KernelBlock":
        return KernelBlock(self.geometry, c * self.coef, self.M)

    def compatible(self, other: "KernelBlock") -> bool:
        return other.geometry is self.geometry and other.M == self.M

    def derivative(self, n: int) -> "KernelBlock":
        poch = 1.0
        for i in range(n):
            poch *= self.M + i
        c = self.coef * poch * np.conj(self.geometry.points) ** n
        return KernelBlock(self.geometry, c, self.M + n)

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        a = self.geometry.points
        out = np.zeros(z.shape, dtype=complex)
        step = max(1, _CHUNK // a.size)
        ca = np.conj(a)[None, :]
        for s in range(0, z.size, step):
            base = 1.0 - ca * z[s:s + step, None]
            out[s:s + step] = np.exp(-self.M * np.log(base)) @ self.coef
        return out

    def _spectrum(self, g: int, n_eff: int) -> np.ndarray:
        key = (g, n_eff)
        if key not in self._spectra:
            rho, n, idx = self.geometry.groups[g]
            spikes = np.zeros(n_eff, dtype=complex)
            spikes[:: n_eff // n] = self.coef[idx]
            self._spectra[key] = np.fft.fft(spikes)
        return self._spectra[key]

    def circle_values(self, r: float, N: int) -> np.ndarray:
        return self.circle_values_batch(np.array([float(r)]), N)[0]

    def circle_values_batch(self, radii: np.ndarray, N: int) -> np.ndarray:
        """Circle samples for several radii at once, shape ``(len(radii), N)``."""
        radii = np.asarray(radii, dtype=float).ravel()
        out = np.zeros((radii.size, N), dtype=complex)
        theta = None
        for g, (rho, n, idx) in enumerate(self.geometry.groups):
            n_eff = N * n // math.gcd(N, n)
            if not self._nonzero[g]:
                continue
            if n_eff > self._MAX_FFT:
                if theta is None:
                    theta = 2.0 * np.pi * np.arange(N) / N
                sub = KernelBlock(PointGeometry([(rho, n, np.arange(n))]), self.coef[idx], self.M)
                for i, r in enumerate(radii):
                    out[i] += sub.evaluate(r * np.exp(1j * theta))
                continue
            spec = self._spectrum(g, n_eff)[None, :]
            step = max(1, _CHUNK // (4 * n_eff))
            for s0 in range(0, radii.size, step):
                H = _kernel_dft(rho * radii[s0:s0 + step], self.M, n_eff, n)
                out[s0:s0 + step] += np.fft.ifft(spec * H, axis=1)[:, :: n_eff // N]
        return out


_SERIES_DEPTH = 38.0


@lru_cache(maxsize=64)
def _log_binomial_series(M: float, k_max: int) -> np.ndarray:
    """``log c_k`` for ``(1 - t)**(-M) = sum_k c_k t**k``, ``k = 0..k_max``."""
    i = np.arange(k_max, dtype=float)
    return np.concatenate([[0.0], np.cumsum(np.log((M + i) / (i + 1.0)))])


def _series_length(x: float, M: float) -> int:
    """Number of terms after which ``c_k x**k`` falls below ``exp(-38)`` of its peak."""
    if x <= 0.0:
        return 1
    lx = math.log(x)
    peak = max(0.0, (M - 1.0) * x / (1.0 - x))
    k = int(2 * peak) + 64
    while True:
        lc = _log_binomial_series(M, k)
        tau = lc + np.arange(k + 1) * lx
        if tau[-1] < tau.max() - _SERIES_DEPTH and tau[-1] < tau[-2]:
            return k + 1
        k *= 2


def _kernel_dft(x: np.ndarray, M: float, n_eff: int, n: int) -> np.ndarray:
    """DFT of ``t -> (1 - x exp(2 pi i (t - s/2) / n_eff))**(-M)``, ``s = n_eff / n``, one row per ``x``.

    Built from the binomial series folded modulo ``n_eff``, which avoids
    sampling the kernel.
    """
    x = np.asarray(x, dtype=float).ravel()
    k_len = max(_series_length(float(x.max()), M), 1)
    lc = _log_binomial_series(M, k_len - 1)
    k = np.arange(k_len)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)[:, None]
        terms = np.exp(lc[None, :] + k[None, :] * lx) * np.exp(-1j * np.pi * k / n)[None, :]
    if x.min() == 0.0:
        terms[x == 0.0, 1:] = 0.0
        terms[x == 0.0, 0] = 1.0
    pad = (-k_len) % n_eff
    if pad:
        terms = np.concatenate([terms, np.zeros((x.size, pad), dtype=complex)], axis=1)
    return n_eff * terms.reshape(x.size, -1, n_eff).sum(axis=1)


class AnalyticFunction:
    """Finite sum of monomials ``c z**m`` and kernels ``c (1 - conj(a) z)**(-M)``.

    Parameters
    ----------
    monomials : mapping or iterable of (degree, coefficient)
    kernels : iterable of (a, M, c)
    """

    def __init__(self, monomials=None, kernels=None):
        mono: dict[int, complex] = {}
        items = monomials.items() if isinstance(monomials, Mapping) else (monomials or [])
        for m, c in items:
            if int(m) != m or m < 0:
                raise ConfigError(f"monomial degree must be a nonnegative integer, got {m}")
            mono[int(m)] = mono.get(int(m), 0j) + complex(c)
        self.degrees = np.array(sorted(mono), dtype=np.int64)
        self.mono_coef = np.array([mono[m] for m in sorted(mono)], dtype=complex)
        kern = list(kernels or [])
        if kern:
            a, M, c = (np.asarray(x) for x in zip(*kern))
        else:
            a, M, c = np.zeros(0), np.zeros(0), np.zeros(0)
        self._set_kernels(np.asarray(a, dtype=complex), np.asarray(M, dtype=float), np.asarray(c, dtype=complex))
        self.blocks: list[KernelBlock] = []

    @classmethod
    def from_blocks(cls, blocks) -> "AnalyticFunction":
        f = cls()
        f.blocks = list(blocks)
        return f

    def _set_kernels(self, a, M, c):
        if np.any(np.abs(a) >= 1):
            raise ConfigError("kernel base points must satisfy |a| < 1")
        if np.any(M <= 0):
            raise ConfigError("kernel exponents must be positive")
        self.ker_a, self.ker_M, self.ker_c = a.ravel(), M.ravel(), c.ravel()

    @classmethod
    def from_arrays(cls, degrees=(), mono_coef=(), ker_a=(), ker_M=(), ker_c=()) -> "AnalyticFunction":
        f = cls(zip(np.asarray(degrees).tolist(), np.asarray(mono_coef).tolist()))
        f._set_kernels(np.asarray(ker_a, dtype=complex), np.asarray(ker_M, dtype=float),
                       np.asarray(ker_c, dtype=complex))
        return f

    @classmethod
    def monomial(cls, m: int, c: complex = 1.0) -> "AnalyticFunction":
        return cls({m: c})

    @classmethod
    def kernel(cls, a: complex, M: float, c: complex = 1.0) -> "AnalyticFunction":
        return cls(kernels=[(a, M, c)])

    @property
    def n_terms(self) -> int:
        return len(self.degrees) + len(self.ker_a) + sum(b.geometry.size for b in self.blocks)

    # algebra -------------------------------------------------------------
    def _combine(self, other: "AnalyticFunction", sign: float) -> "AnalyticFunction":
        mono = dict(zip(self.degrees.tolist(), self.mono_coef.tolist()))
        for m, c in zip(other.degrees.tolist(), other.mono_coef.tolist()):
            mono[m] = mono.get(m, 0j) + sign * c
        out = AnalyticFunction(mono)
        out._set_kernels(
            np.concatenate([self.ker_a, other.ker_a]),
            np.concatenate([self.ker_M, other.ker_M]),
            np.concatenate([self.ker_c, sign * other.ker_c]),
        )
        blocks = list(self.blocks)
        for b in other.blocks:
            b = b.scaled(sign)
            for i, a in enumerate(blocks):
                if a.compatible(b):
                    blocks[i] = KernelBlock(a.geometry, a.coef + b.coef, a.M)
                    break
            else:
                blocks.append(b)
        out.blocks = blocks
        return out

    def __add__(self, other):
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        return self._combine(other, 1.0)

    def __sub__(self, other):
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        return self._combine(other, -1.0)

    def __mul__(self, c):
        c = complex(c)
        out = AnalyticFunction.from_arrays(self.degrees, c * self.mono_coef,
                                           self.ker_a, self.ker_M, c * self.ker_c)
        out.blocks = [b.scaled(c) for b in self.blocks]
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # evaluation ------------------------------------------------------------
    def __call__(self, z):
        return evaluate(self, z)

    def circle_values(self, r: float, N: int) -> np.ndarray:
        """Values at ``r exp(2 pi i k / N)``, ``k = 0..N-1``."""
        theta = 2.0 * np.pi * np.arange(N) / N
        out = evaluate(self, r * np.exp(1j * theta), blocks=False)
        for b in self.blocks:
            out += b.circle_values(r, N)
        return out

    def circle_values_batch(self, radii, N: int) -> np.ndarray:
        """Circle samples for several radii, shape ``(len(radii), N)``."""
        radii = np.asarray(radii, dtype=float).ravel()
        theta = 2.0 * np.pi * np.arange(N) / N
        z = radii[:, None] * np.exp(1j * theta)[None, :]
        out = evaluate(self, z, blocks=False)
        for b in self.blocks:
            out += b.circle_values_batch(radii, N)
        return out

    def derivative(self, n: int = 1) -> "AnalyticFunction":
        return derivative(self, n)

    def to_config(self) -> dict[str, Any]:
        ker = [(self.ker_a, self.ker_M, self.ker_c)]
        ker += [(b.geometry.points, np.full(b.geometry.size, b.M), b.coef) for b in self.blocks]
        a, M, c = (np.concatenate(x) for x in zip(*ker))
        return {
            "monomials": [[int(m), [c.real, c.imag]] for m, c in zip(self.degrees, self.mono_coef)],
            "kernels": [
                {"a": [a.real, a.imag], "M": float(M), "c": [c.real, c.imag]}
                for a, M, c in zip(a, M, c)
                if c != 0
            ],
        }

    def __repr__(self) -> str:
        nk = len(self.ker_a) + sum(b.geometry.size for b in self.blocks)
        return f"AnalyticFunction(monomials={len(self.degrees)}, kernels={nk})"


def evaluate(f: AnalyticFunction, z, *, blocks: bool = True):
    """Exact finite-sum evaluation at a point or an array of points."""
    z_arr = np.asarray(z, dtype=complex)
    flat = z_arr.ravel()
    if np.any(np.abs(flat) >= 1):
        raise ConfigError("evaluation points must lie in the unit disc")
    out = np.zeros(flat.shape, dtype=complex)
    if len(f.degrees):
        out += np.polynomial.polynomial.polyval(flat, _dense(f.degrees, f.mono_coef))
    nk = len(f.ker_a)
    if nk:
        step = max(1, _CHUNK // nk)
        ca = np.conj(f.ker_a)[None, :]
        M = f.ker_M[None, :]
        for s in range(0, flat.size, step):
            zz = flat[s:s + step, None]
            base = 1.0 - ca * zz
            out[s:s + step] += np.exp(-M * np.log(base)) @ f.ker_c
    if blocks:
        for b in f.blocks:
            out += b.evaluate(flat)
    if z_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(z_arr.shape)


def _dense(degrees: np.ndarray, coef: np.ndarray) -> np.ndarray:
    dense = np.zeros(int(degrees.max()) + 1, dtype=complex)
    np.add.at(dense, degrees, coef)
    return dense


def derivative(f: AnalyticFunction, n: int) -> AnalyticFunction:
    """``n``-th derivative, again a finite sum of monomials and kernels."""
    if int(n) != n or n < 0:
        raise ConfigError("derivative order must be a nonnegative integer")
    n = int(n)
    if n == 0:
        return f
    keep = f.degrees >= n
    degs = f.degrees[keep] - n
    coef = f.mono_coef[keep] * np.array([math.perm(int(m), n) for m in f.degrees[keep]], dtype=float)
    poch = np.ones_like(f.ker_M)
    for i in range(n):
        poch = poch * (f.ker_M + i)
    kc = f.ker_c * poch * np.conj(f.ker_a) ** n
    out = AnalyticFunction.from_arrays(degs, coef, f.ker_a, f.ker_M + n, kc)
    out.blocks = [b.derivative(n) for b in f.blocks]
    return out


def _check_samples(p: float, N: int) -> None:
    if N < 256:
        raise ConfigError("circle sample count must be at least 256")
    if math.isfinite(p) and (N & (N - 1)):
        raise ConfigError("circle sample count must be a power of two for finite p")


def _mean_from_values(vals: np.ndarray, p: float) -> float:
    a = np.abs(vals)
    if math.isinf(p):
        return float(a.max())
    m = float(a.max())
    if m == 0.0:
        return 0.0
    # scale before powering to avoid overflow for large p
    return m * float(np.mean((a / m) ** p)) ** (1.0 / p)


def integral_mean(f, r: float, p: float, N: int = DEFAULT_N) -> float:
    """Circle mean ``M_p(r, f)`` by the ``N``-point trapezoid rule (max for ``p = inf``)."""
    p = float(p)
    if not p > 0:
        raise ConfigError("p must be positive")
    if not 0 <= r < 1:
        raise ConfigError("radius must lie in [0, 1)")
    _check_samples(p, N)
    return _mean_from_values(f.circle_values(float(r), int(N)), p)


def _circle_batch(f, radii: np.ndarray, N: int) -> np.ndarray:
    if hasattr(f, "circle_values_batch"):
        return f.circle_values_batch(radii, N)
    return np.array([f.circle_values(float(r), N) for r in radii])


def _annulus_nodes(L: DyadicLattice):
    radii = L.radii
    a, b = radii[:-1, None], radii[1:, None]
    nodes = 0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)
    wts = 0.5 * (b - a) * _GL_W[None, :]
    return nodes, wts


def _tail_integral(g_fit: np.poly1d, w: RadialWeight, eps: float, pieces: int = 80) -> float:
    """``int_{1-eps}^1 g(r) omega(r) dr`` with ``g`` given in the variable ``x = 1 - r``."""
    hi = eps * 2.0 ** -np.arange(pieces, dtype=float)
    lo = hi / 2.0
    x = 0.5 * (hi - lo)[:, None] * _GL_X[None, :] + 0.5 * (hi + lo)[:, None]
    wt = 0.5 * (hi - lo)[:, None] * _GL_W[None, :]
    vals = g_fit(x) * w.density(x)
    return float(np.sum(wt * vals)) + float(g_fit(0.0)) * float(w.hat_at_distance(lo[-1]))


def mixed_norm(
    f,
    p: float,
    q: float,
    w: RadialWeight,
    L: DyadicLattice,
    N: int = DEFAULT_N,
    *,
    include_tail: bool = True,
    details: bool = False,
):
    """Weighted mixed norm ``(int_0^1 M_p(r, f)**q omega(r) dr)**(1/q)``.

    The radial integral runs over the lattice annuli with 16 Gauss nodes
    each up to ``r_max = r_{J_max+1}``.  The remaining tail is estimated by
    extrapolating ``M_p(r, f)**q`` with a low-degree polynomial fitted on
    the last annulus, never below the monotone lower bound
    ``M_p(r_max, f)**q * omega_hat(r_max)``.

    Returns the norm, or a dict with quadrature metadata when ``details``.
    """
    p, q = float(p), float(q)
    if math.isinf(q):
        raise ConfigError("q = inf is unsupported")
    if not (p > 0 and q > 0):
        raise ConfigError("p and q must be positive")
    _check_samples(p, N)
    nodes, wts = _annulus_nodes(L)
    means = np.array([_mean_from_values(v, p) for v in _circle_batch(f, nodes.ravel(), N)]).reshape(nodes.shape)
    g = means**q
    dens = w(nodes)
    truncated = float(np.sum(g * dens * wts))
    eps = 1.0 - L.r_max
    g_edge = _mean_from_values(f.circle_values(L.r_max, N), p) ** q
    tail_lower = g_edge * float(w.hat_at_distance(eps))
    x_last = 1.0 - nodes[-1]
    deg = min(6, GAUSS_NODES - 1)
    fit = np.poly1d(np.polyfit(x_last / eps, g[-1], deg))
    g_fit = np.poly1d(fit.coeffs / eps ** np.arange(deg, -1, -1))
    tail_extra = _tail_integral(g_fit, w, eps)
    tail = tail_lower if not (math.isfinite(tail_extra) and tail_extra > tail_lower) else tail_extra
    total = truncated + tail if include_tail else truncated
    if not math.isfinite(total):
        raise NumericalError("mixed norm overflow")
    norm = total ** (1.0 / q)
    if not details:
        return norm
    return {
        "norm": norm,
        "truncated_norm": truncated ** (1.0 / q),
        "tail_estimate": tail,
        "tail_lower_bound": tail_lower,
        "near_divergent_tail": bool(tail > 0.1 * max(truncated, 1e-300)),
        "r_max": L.r_max,
        "N": int(N),
        "J_max": L.J_max,
        "nodes_per_annulus": GAUSS_NODES,
    }


@dataclass
class DiscreteMeasure:
    """Finite positive measure: point masses plus optional per-cell masses.

    Cell masses are keyed by ``(j, l)`` and are treated as sitting at the
    cell center whenever a point evaluation is needed.
    """

    points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cell_masses: dict = field(default_factory=dict)
    lattice: DyadicLattice | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        self.masses = np.asarray(self.masses, dtype=float).ravel()
        if self.points.shape != self.masses.shape:
            raise ConfigError("points and masses must have equal length")
        if np.any(self.masses < 0) or any(m < 0 for m in self.cell_masses.values()):
            raise ConfigError("masses must be nonnegative")
        if np.any(np.abs(self.points) >= 1):
            raise ConfigError("mass points must lie in the unit disc")
        if not np.all(np.isfinite(self.masses)):
            raise ConfigError("masses must be finite")
        if self.cell_masses and self.lattice is None:
            raise ConfigError("cell masses need a lattice")

    @classmethod
    def dirac(cls, z: complex, mass: float = 1.0) -> "DiscreteMeasure":
        return cls(np.array([z]), np.array([mass]))

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum() + sum(self.cell_masses.values()))

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """All masses as (points, masses), cell masses placed at centers."""
        if not self.cell_masses:
            return self.points, self.masses
        L = self.lattice
        keys = list(self.cell_masses)
        zc = np.array([L.center(j, l) for j, l in keys])
        mc = np.array([self.cell_masses[k] for k in keys], dtype=float)
        return np.concatenate([self.points, zc]), np.concatenate([self.masses, mc])

    def cell_mass_array(self, L: DyadicLattice) -> np.ndarray:
        """``mu(Q_{j,l})`` for every lattice cell, in flat lattice order."""
        out = np.zeros(L.n_cells)
        if self.points.size:
            stray = np.abs(self.points) >= L.r_max
            if np.any(stray):
                z = self.points[stray][0]
                raise ConfigError(f"measure has mass outside the lattice at {z.real:.6g}{z.imag:+.6g}j")
            j, l = locate(L, self.points)
            np.add.at(out, L.flat_index(j, l), self.masses)
        for (j, l), m in self.cell_masses.items():
            if not (0 <= j <= L.J_max and 0 <= l < L.level_size(j)):
                raise ConfigError(f"measure has mass outside the lattice at cell ({j}, {l})")
            if self.lattice is not None and self.lattice is not L and (
                self.lattice.K != L.K or self.lattice.J_max < j
            ):
                raise ConfigError("cell masses refer to a different lattice")
            out[L.flat_index(j, l)] += m
        return out

    def disc_mass(self, centers, r: float) -> np.ndarray:
        """``mu(Delta(z, r))`` for each ``z`` in ``centers``."""
        z = np.asarray(centers, dtype=complex).ravel()
        pts, ms = self.atoms()
        out = np.zeros(z.size)
        if pts.size == 0:
            return out
        step = max(1, _CHUNK // pts.size)
        for s in range(0, z.size, step):
            d = pseudo_distance(z[s:s + step, None], pts[None, :])
            out[s:s + step] = (d < r) @ ms
        return out


def lebesgue_norm(f: AnalyticFunction, s: float, mu: DiscreteMeasure, n: int = 0) -> float:
    """``(int |f^(n)|**s dmu)**(1/s)`` for a discrete measure."""
    s = float(s)
    if not s > 0:
        raise ConfigError("s must be positive")
    pts, ms = mu.atoms()
    if pts.size == 0:
        return 0.0
    vals = np.abs(evaluate(derivative(f, n), pts))
    return float(np.sum(ms * vals**s)) ** (1.0 / s)


def function_from_config(cfg: Mapping[str, Any]) -> AnalyticFunction:
    """Build from ``{monomials: [[m, c], ...], kernels: [{a, M, c}, ...]}``."""
    if not isinstance(cfg, Mapping):
        raise ConfigError("function config must be a mapping")
    mono = []
    for item in cfg.get("monomials", []) or []:
        if isinstance(item, Mapping):
            mono.append((int(item["degree"]), _complex_arg(item.get("c", 1.0))))
        else:
            m, c = item
            mono.append((int(m), _complex_arg(c)))
    kern = []
    for item in cfg.get("kernels", []) or []:
        if not isinstance(item, Mapping) or "a" not in item or "M" not in item:
            raise ConfigError("kernel terms need 'a' and 'M'")
        kern.append((_complex_arg(item["a"]), float(item["M"]), _complex_arg(item.get("c", 1.0))))
    if not mono and not kern:
        raise ConfigError("function config has no terms")
    return AnalyticFunction(mono, kern)
