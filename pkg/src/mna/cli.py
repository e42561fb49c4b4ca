"""Batch command line: ``mna <subcommand> --config FILE [--out DIR]``.

A config is one YAML or JSON document.  Recognised sections::

    weight:     {kind: standard-power, a: 0}   # or table / exponential / log
    lattice:    {K: 2, J_max: 6, M_sub: 1}
    exponents:  {p: 2, q: 2, s: 2, n: 0}
    function:   {monomials: [[0, 1]], kernels: [{a: 0.5, M: 2, c: 1}]}
    measure:    {csv: masses.csv} or {random: {atoms: 50}}
    coefficients: {csv: coef.csv} or {random: true}
    quadrature: {N_circle: 1024, nodes_per_annulus: 16}
    atoms:      {M_exp: null, eta_proj: null, n_iter: 10, sup_grid: 9}
    carleson:   {r: 0.5, trials: 10, grid: 8}
    hardy:      {K: 2, N: [16, 32]}
    verify:     {checks: [1, 2, 3]}
    seed: 0

Every subcommand writes ``<name>.json`` (deterministic report) and
``<name>.meta.json`` (timing and versions) into ``--out``, plus CSV files
where relevant.  Without ``--out`` the report is printed.  Exit status is
0 on success, 1 when an asserted check fails, 2 for configuration errors
and 3 for numerical aborts.
"""

from __future__ import annotations

import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Mapping

import click
import numpy as np
import yaml

from . import __version__
from .atoms import AtomParameters, analyze as analyze_function, atomic_decompose, synthesize
from .carleson import CarlesonConfig, equivalence_report, random_measure, read_measure_csv
from .errors import ConfigError, NumericalError
from .functions import DEFAULT_N, function_from_config, lebesgue_norm, mixed_norm
from .hardy import PROOF_CASES, proof_case_table
from .lattice import build_lattice
from .sequences import lpq_norm, random_unit_sequence, read_coefficients_csv
from .verify import CHECKS, run_checks
from .weights import check_lower_doubling, check_upper_doubling, omega_hat, weight_from_config

log = logging.getLogger("mna")

EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 1, 2, 3


# config helpers --------------------------------------------------------------

def _section(cfg: Mapping, name: str) -> dict:
    sec = cfg.get(name) or {}
    if not isinstance(sec, Mapping):
        raise ConfigError(f"{name}: must be a mapping")
    return dict(sec)


def _number(sec: Mapping, key: str, where: str, default=None, *, allow_inf: bool = False) -> float:
    v = sec.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "oo"):
        v = math.inf
    try:
        v = float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: not a number ({v!r})") from exc
    if math.isnan(v) or v <= 0 or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{where}.{key}: must be a positive{'' if allow_inf else ' finite'} number")
    return v


def _integer(sec: Mapping, key: str, where: str, default: int, lo: int = 0) -> int:
    v = sec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < lo:
        raise ConfigError(f"{where}.{key}: must be an integer >= {lo}")
    return int(v)


def _path(base: Path, value: Any, where: str) -> Path:
    p = Path(str(value))
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"{where}: file not found: {p}")
    return p


class Context:
    """Parsed config plus the output settings shared by every subcommand."""

    def __init__(self, config: Path | None, out: Path | None, seed: int | None):
        self.base = config.parent if config else Path.cwd()
        if config is None:
            self.cfg: dict = {}
        else:
            try:
                doc = yaml.safe_load(config.read_text())
            except yaml.YAMLError as exc:
                raise ConfigError(f"config: cannot parse {config}: {exc}") from exc
            if doc is None:
                doc = {}
            if not isinstance(doc, Mapping):
                raise ConfigError("config: top level must be a mapping")
            self.cfg = dict(doc)
        self.out = out
        self.seed = int(seed if seed is not None else _integer(self.cfg, "seed", "config", 0))

    def weight(self):
        return weight_from_config(self.cfg.get("weight"))

    def lattice(self):
        sec = _section(self.cfg, "lattice")
        K = _integer(sec, "K", "lattice", 2, lo=2)
        J = _integer(sec, "J_max", "lattice", 6)
        M_sub = _integer(sec, "M_sub", "lattice", 1, lo=1)
        return build_lattice(K, J, M_sub)

    def exponents(self, *, need_s: bool = False) -> dict:
        sec = _section(self.cfg, "exponents")
        e = {"p": _number(sec, "p", "exponents", 2.0, allow_inf=True),
             "q": _number(sec, "q", "exponents", 2.0)}
        if need_s or "s" in sec:
            e["s"] = _number(sec, "s", "exponents", 2.0)
        e["n"] = _integer(sec, "n", "exponents", 0)
        return e

    def quad_N(self) -> int:
        return _integer(_section(self.cfg, "quadrature"), "N_circle", "quadrature", DEFAULT_N, lo=1)

    def function(self):
        if "function" not in self.cfg:
            raise ConfigError("function: required for this subcommand")
        return function_from_config(self.cfg["function"])

    def measure(self, L):
        sec = _section(self.cfg, "measure")
        if "csv" in sec:
            return read_measure_csv(_path(self.base, sec["csv"], "measure.csv"), L)
        rnd = sec.get("random", {"atoms": 50})
        rnd = rnd if isinstance(rnd, Mapping) else {}
        n = _integer(rnd, "atoms", "measure.random", 50, lo=1)
        return random_measure(L, np.random.default_rng(self.seed), max_atoms=n)

    def params(self, p, q, w, L) -> AtomParameters:
        sec = _section(self.cfg, "atoms")
        kw = {k: sec[k] for k in ("M_exp", "eta_proj") if sec.get(k) is not None}
        return AtomParameters.build(p, q, w, M_sub=L.M_sub, **kw)

    def emit(self, name: str, report: dict, meta: dict, csvs: dict[str, str] | None = None) -> None:
        text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
        if self.out is None:
            click.echo(text, nl=False)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / f"{name}.json").write_text(text)
        (self.out / f"{name}.meta.json").write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
        for fname, body in (csvs or {}).items():
            (self.out / fname).write_text(body)
        log.info("wrote %s", self.out / f"{name}.json")


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# commands --------------------------------------------------------------------

def _common(f):
    f = click.option("--seed", type=int, default=None, help="Seed overriding the config value.")(f)
    f = click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
                     help="Upper bound on numerical library threads.")(f)
    f = click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Directory for JSON and CSV reports.")(f)
    f = click.option("--config", "config", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     default=None, help="YAML or JSON experiment config.")(f)
    return f


def _run(name: str, body, config, out, threads, seed) -> None:
    """Shared driver: parse, run under a thread limit, emit, map errors to exit codes."""
    from threadpoolctl import threadpool_limits

    t0 = time.perf_counter()
    try:
        ctx = Context(config, out, seed)
        with threadpool_limits(limits=threads):
            report, csvs, status = body(ctx)
        meta = {"command": name, "version": __version__, "seconds": time.perf_counter() - t0,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "threads": threads,
                "config": str(config) if config else None}
        ctx.emit(name, report, meta, csvs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(status)


@click.group()
@click.version_option(__version__)
def main():
    """Weighted mixed norm spaces on the disc: norms, atoms, Carleson and Hardy checks."""
    logging.basicConfig(level=os.environ.get("MNA_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_common
def weight(config, out, threads, seed):
    """Doubling class membership and exponents of a weight."""
    def body(ctx):
        w = ctx.weight()
        up = check_upper_doubling(w)
        try:
            low = check_lower_doubling(w, 2.0)
        except NumericalError as exc:
            low = {"member": False, "error": str(exc)}
        try:
            exps, note = w.exponents, None
        except NumericalError as exc:
            exps, note = {"alpha": None, "beta": None, "gamma": None}, str(exc)
        report = {"weight": w.describe(), "omega_hat_0": float(omega_hat(w, 0.0)),
                  "member_Dhat": up["member"], "member_Dcheck": low["member"],
                  "upper_doubling": up, "lower_doubling": low, "exponents": exps}
        if note:
            report["exponents_note"] = note
        return report, {}, 0
    _run("weight", body, config, out, threads, seed)


@main.command()
@_common
def lattice(config, out, threads, seed):
    """Build the dyadic lattice and export its cells."""
    def body(ctx):
        L = ctx.lattice()
        report = {"K": L.K, "J_max": L.J_max, "M_sub": L.M_sub, "n_cells": L.n_cells,
                  "n_subcells": L.n_subcells, "radii": L.radii.tolist(),
                  "level_sizes": [L.level_size(j) for j in range(L.J_max + 1)]}
        return report, {"lattice.csv": L.to_csv()}, 0
    _run("lattice", body, config, out, threads, seed)


@main.command()
@_common
def norm(config, out, threads, seed):
    """Mixed norm of a function, sequence norm of coefficients or L^s(mu) norm."""
    def body(ctx):
        e = ctx.exponents()
        w, L = ctx.weight(), ctx.lattice()
        report: dict[str, Any] = {"exponents": e, "weight": w.describe()}
        if "function" in ctx.cfg:
            f = ctx.function()
            report["mixed_norm"] = mixed_norm(f, e["p"], e["q"], w, L, ctx.quad_N())
            if "s" in e and "measure" in ctx.cfg:
                report["lebesgue_norm"] = lebesgue_norm(f, e["s"], ctx.measure(L), e["n"])
        coef = _section(ctx.cfg, "coefficients")
        if "csv" in coef:
            lam = read_coefficients_csv(_path(ctx.base, coef["csv"], "coefficients.csv"), L)
            report["lpq_norm"] = lpq_norm(lam, e["p"], e["q"])
        if len(report) == 2:
            raise ConfigError("norm: config needs a function or coefficients.csv")
        return report, {}, 0
    _run("norm", body, config, out, threads, seed)


@main.command()
@_common
def synth(config, out, threads, seed):
    """Synthesize an atom sum from lattice coefficients."""
    def body(ctx):
        e = ctx.exponents()
        w, L = ctx.weight(), ctx.lattice()
        P = ctx.params(e["p"], e["q"], w, L)
        coef = _section(ctx.cfg, "coefficients")
        if "csv" in coef:
            lam = read_coefficients_csv(_path(ctx.base, coef["csv"], "coefficients.csv"), L)
        else:
            lam = random_unit_sequence(L, e["p"], e["q"], np.random.default_rng(ctx.seed))
        F = synthesize(lam, None, P, w)
        Lq = build_lattice(L.K, L.J_max + 3, 1)
        report = {"params": P.to_dict(), "coefficient_norm": lpq_norm(lam, e["p"], e["q"])}
        if math.isfinite(e["p"]):
            report["function_norm"] = mixed_norm(F, e["p"], e["q"], w, Lq, ctx.quad_N())
            report["ratio"] = report["function_norm"] / report["coefficient_norm"]
        return report, {"coefficients.csv": lam.to_csv()}, 0
    _run("synth", body, config, out, threads, seed)


@main.command()
@_common
def analyze(config, out, threads, seed):
    """Analysis coefficients of a function and their sequence norm."""
    def body(ctx):
        e = ctx.exponents()
        w, L = ctx.weight(), ctx.lattice()
        f = ctx.function()
        g = _integer(_section(ctx.cfg, "atoms"), "sup_grid", "atoms", 9, lo=4)
        lam = analyze_function(f, L, e["p"], e["q"], w, g)
        report = {"exponents": e, "coefficient_norm": lpq_norm(lam, e["p"], e["q"])}
        if math.isfinite(e["p"]):
            report["function_norm"] = mixed_norm(f, e["p"], e["q"], w, L, ctx.quad_N())
            report["ratio"] = report["coefficient_norm"] / report["function_norm"]
        return report, {"coefficients.csv": lam.to_csv()}, 0
    _run("analyze", body, config, out, threads, seed)


@main.command()
@_common
def decompose(config, out, threads, seed):
    """Iterative atomic decomposition of a function."""
    def body(ctx):
        e = ctx.exponents()
        w, L = ctx.weight(), ctx.lattice()
        f = ctx.function()
        P = ctx.params(e["p"], e["q"], w, L)
        n_iter = _integer(_section(ctx.cfg, "atoms"), "n_iter", "atoms", 10, lo=1)
        res = atomic_decompose(f, L, P, w, n_iter, ctx.quad_N())
        report = {"params": P.to_dict(), "residual_history": res["residual_history"],
                  "coefficient_norm": res["coefficient_norm"],
                  "reconstruction_error": res["reconstruction_error"], "fitted_ratio": res["fitted_ratio"]}
        return report, {"coefficients.csv": res["coefficients"].to_csv()}, 0
    _run("decompose", body, config, out, threads, seed)


@main.command()
@_common
def carleson(config, out, threads, seed):
    """Discrete and continuous Carleson conditions and an operator-norm lower bound."""
    def body(ctx):
        e = ctx.exponents(need_s=True)
        w, L = ctx.weight(), ctx.lattice()
        sec = _section(ctx.cfg, "carleson")
        cfg = CarlesonConfig(e["p"], e["q"], e["s"], e["n"], float(sec.get("r", 0.5)))
        mu = ctx.measure(L)
        rep = equivalence_report(mu, w, L, cfg, trials=_integer(sec, "trials", "carleson", 10, lo=10),
                                 seed=ctx.seed, grid=_integer(sec, "grid", "carleson", 8, lo=1))
        pts, mass = mu.atoms()
        csv = "re,im,mass\n" + "".join(f"{z.real:.17g},{z.imag:.17g},{m:.17g}\n" for z, m in zip(pts, mass))
        return rep, {"measure.csv": csv}, 0 if rep["consistent"] else EXIT_FAIL
    _run("carleson", body, config, out, threads, seed)


@main.command()
@_common
def hardy(config, out, threads, seed):
    """Muckenhoupt suprema for every proof case with an N-stability flag."""
    def body(ctx):
        sec = _section(ctx.cfg, "hardy")
        K = _integer(sec, "K", "hardy", 2, lo=2)
        Ns = tuple(int(n) for n in sec.get("N", (16, 32)))
        if len(Ns) < 2 or min(Ns) < 1:
            raise ConfigError("hardy.N: need at least two positive lengths")
        w = ctx.weight()
        rows = proof_case_table(w, K, Ns, label=w.kind)
        click.echo(f"{'case':8} {'weight':16} {'N':>4} {'sup_A':>14} {'sup_B':>14}  stability", err=True)
        for r in rows:
            click.echo(f"{r['case']:8} {r['weight']:16} {r['N']:>4} {r['sup_A']:>14.6g} {r['sup_B']:>14.6g}  "
                       f"{r['stability']}", err=True)
        csv = "case,weight,N,condition,sup_A,sup_B,stability\n" + "".join(
            f"{r['case']},{r['weight']},{r['N']},{r['condition']},{r['sup_A']:.17g},{r['sup_B']:.17g},"
            f"{r['stability']}\n" for r in rows)
        return {"cases": list(PROOF_CASES), "rows": rows}, {"hardy.csv": csv}, 0
    _run("hardy", body, config, out, threads, seed)


@main.command()
@_common
@click.option("--check", "checks", type=click.IntRange(1, len(CHECKS)), multiple=True,
              help="Run only this acceptance check (repeatable).")
def verify(config, out, threads, seed, checks):
    """Run the acceptance suite and print one PASS/FAIL line per check."""
    def body(ctx):
        ids = checks or tuple(_section(ctx.cfg, "verify").get("checks", ())) or None
        results = run_checks(ids)
        for r in results:
            click.echo(f"{'PASS' if r['passed'] else 'FAIL'}  {r['id']:>2}  {r['name']}  ({r['seconds']:.1f}s)",
                       err=True)
        report = {"all_passed": all(r["passed"] for r in results),
                  "checks": [{k: r[k] for k in ("id", "name", "passed", "details")} for r in results]}
        return report, {}, 0 if report["all_passed"] else EXIT_FAIL
    _run("verify", body, config, out, threads, seed)


if __name__ == "__main__":
    main()
