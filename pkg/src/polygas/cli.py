"""Batch command-line front-end.

Every subcommand writes one report (JSON by default, CSV for tables) that
embeds the full run configuration, the package version and the truncation
parameters in force.  Reports are byte-deterministic for a given
configuration.  Failures produce a JSON error object and a nonzero exit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import click

SCHEMA = "polygas/1"


class ConfigError(ValueError):
    """Invalid or infeasible run configuration."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    alpha: float = 2.0
    betas: tuple[float, ...] = (1.0,)
    m_param: float = 2.0
    lam: tuple[int, int] = (0, 0)
    order: int | None = None
    max_diam: int | None = None
    seed: int = 0
    output: str = "-"
    fmt: str = "json"
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        d["lam"] = f"{self.lam[0]}..{self.lam[1]}"
        d.pop("output")
        return d

    def params(self, beta: float | None = None, **kw):
        from .lattice import ModelParams

        return ModelParams.interval(self.lam[0], self.lam[1], alpha=self.alpha,
                                    beta=self.betas[0] if beta is None else beta,
                                    m_param=self.m_param, **kw)


def parse_lambda(spec: str) -> tuple[int, int]:
    try:
        a, b = spec.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ConfigError(f"box must look like 'a..b', got {spec!r}") from None
    if hi < lo:
        raise ConfigError(f"empty box {spec!r}")
    return lo, hi


def parse_betas(spec: str) -> tuple[float, ...]:
    """A single value or a grid ``start:stop:step`` (stop included up to rounding)."""
    parts = spec.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad beta specification {spec!r}") from None
    if len(nums) == 1:
        grid = (nums[0],)
    elif len(nums) == 3:
        start, stop, step = nums
        if step <= 0 or stop < start:
            raise ConfigError(f"bad beta grid {spec!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = tuple(round(start + k * step, 12) for k in range(count))
    else:
        raise ConfigError(f"beta must be a number or start:stop:step, got {spec!r}")
    if any(b < 0 for b in grid):
        raise ConfigError("beta must be nonnegative")
    return grid


def parse_sites(spec: str) -> tuple[int, ...]:
    try:
        return tuple(sorted({int(s) for s in spec.replace(" ", "").split(",") if s}))
    except ValueError:
        raise ConfigError(f"bad site list {spec!r}") from None


def version_string() -> str:
    try:
        from importlib.metadata import version

        base = version("artifact")
    except Exception:  # pragma: no cover - uninstalled source tree
        base = "0.0.0"
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
                              capture_output=True, text=True, timeout=5)
        tag = desc.stdout.strip()
        if desc.returncode == 0 and tag:
            return f"{base}+g{tag}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def _clean(x: Any) -> Any:
    """Convert numbers (numpy, mpmath) and containers into JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    try:
        f = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isnan(f) or math.isinf(f):
        return repr(f)
    return f


def _emit(cfg: RunConfig, body: dict, table: list[dict] | None = None) -> None:
    if cfg.fmt == "csv":
        if table is None:
            raise ConfigError(f"subcommand {cfg.subcommand!r} has no tabular output; use --format json")
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA} version={version_string()}\n")
        buf.write("# config=" + json.dumps(_clean(cfg.as_dict()), sort_keys=True) + "\n")
        cols = list(table[0].keys()) if table else []
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for row in table:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in _clean(row).items()})
        text = buf.getvalue()
    else:
        doc = {"schema": SCHEMA, "version": version_string(), "config": cfg.as_dict(), **body}
        text = json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"
    if cfg.output == "-":
        click.echo(text, nl=False)
    else:
        Path(cfg.output).write_text(text)


def _fail(subcommand: str, exc: Exception) -> None:
    doc = {"schema": SCHEMA, "version": version_string(), "subcommand": subcommand,
           "error": {"type": type(exc).__name__, "message": str(exc)}}
    click.echo(json.dumps(doc, sort_keys=True, indent=2))
    sys.exit(2)


def _run(cfg: RunConfig, fn) -> None:
    try:
        fn(cfg)
    except (ValueError, RuntimeError, OverflowError) as exc:
        _fail(cfg.subcommand, exc)


# -- subcommand bodies -------------------------------------------------------------------

def _do_exact(cfg: RunConfig) -> None:
    from .oracle import MAX_ORACLE_SITES, log_partition_function, magnetization

    runs, table = [], []
    for b in cfg.betas:
        p = cfg.params(b)
        log_z = log_partition_function(p)
        mags = {x: magnetization(p, x) for x in p.volume}
        z = math.exp(log_z) if log_z < 700 else math.inf
        runs.append({"beta": b, "Z": z, "log_Z": log_z, "magnetizations": mags})
        for x, m in mags.items():
            table.append({"beta": b, "site": x, "magnetization": m, "log_Z": log_z})
    _emit(cfg, {"results": runs, "truncation": {"method": "exhaustive", "max_sites": MAX_ORACLE_SITES}}, table)


def _do_polymer_z(cfg: RunConfig) -> None:
    from .oracle import exact_partition_function
    from .polymer import MAX_POLYMER_VOLUME, polymer_partition_function

    runs, table = [], []
    for b in cfg.betas:
        p = cfg.params(b)
        zp = float(polymer_partition_function(p))
        zo = float(exact_partition_function(p))
        row = {"beta": b, "Z_polymer": zp, "Z_oracle": zo, "residual": abs(zp - zo) / zo}
        runs.append(row)
        table.append(row)
    _emit(cfg, {"results": runs, "truncation": {"method": "exhaustive", "max_volume": MAX_POLYMER_VOLUME}}, table)


def _do_expand(cfg: RunConfig) -> None:
    from .cluster import truncated_log_z
    from .oracle import log_partition_function

    dps = int(cfg.extra.get("dps", 80))
    order = cfg.order or 3
    runs, table = [], []
    for b in cfg.betas:
        p = cfg.params(b, dps=dps)
        exact = log_partition_function(p)
        series = truncated_log_z(p, order)
        errs = series.errors(exact)
        rel = [e / abs(exact) if exact != 0 else math.inf for e in errs]
        decreasing = all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))
        runs.append({"beta": b, "log_Z": exact, "partial_sums": series.partial_sums, "errors": errs,
                     "relative_errors": rel, "strictly_decreasing": decreasing})
        for n, (s, e) in enumerate(zip(series.partial_sums, errs), start=1):
            table.append({"beta": b, "order": n, "partial_sum": s, "error": e})
    _emit(cfg, {"results": runs, "truncation": {"order": order, "dps": dps, "polymers": "all in box"}}, table)


def _do_correlate(cfg: RunConfig) -> None:
    from .oracle import correlation_table, decay_fit, wick_product
    from .sitebounds import correlation_bound_report

    sites = cfg.extra["sites"]
    origin = sites[0]
    runs, table = [], []
    for b in cfg.betas:
        p = cfg.params(b)
        tab = correlation_table(p)
        rows = tab.as_rows(origin)
        entry = {"beta": b, "wick": wick_product(p, sites),
                 "two_point": {str(r): v for r, v in rows}}
        try:
            r_max = min(6, max(r for r, _ in rows))
            slope, intercept, resid = decay_fit(tab, 2, r_max, origin)
            entry["decay_fit"] = {"r_min": 2, "r_max": r_max, "slope": slope, "intercept": intercept, "residual": resid}
        except ValueError as exc:
            entry["decay_fit"] = {"error": str(exc)}
        runs.append(entry)
        for r, v in rows:
            table.append({"beta": b, "r": r, "corr": v, "corr_times_r_alpha": v * r ** cfg.alpha})
    report = correlation_bound_report(cfg.params(cfg.betas[0]), sites, cfg.betas) if len(sites) >= 2 else None
    body = {"results": runs, "bound_report": report.as_dict() if report else None,
            "truncation": {"method": "exhaustive"}}
    _emit(cfg, body, table)


def _do_verify(cfg: RunConfig) -> None:
    from .contour import enumerate_contours, verify_hypotheses
    from .polymer import positive_polymers
    from .sitebounds import (chain_bound_sweep, contour_point_sweep, detector_witness_sweep,
                             summed_chain_bound_sweep)
    from .treesum import restricted_tree_count
    from .trees import count_labeled_trees

    max_diam = cfg.max_diam or 8
    samples = int(cfg.extra.get("samples", 200))
    p = cfg.params()
    rep = verify_hypotheses(p, max_diam, cfg.betas)
    window = p.replace(volume=range(0, max_diam))
    sweeps = [
        chain_bound_sweep(samples, cfg.seed),
        summed_chain_bound_sweep(samples, cfg.seed),
        detector_witness_sweep(p.replace(volume=range(0, 7)), positive_polymers(p.replace(volume=range(0, 7))),
                               samples, cfg.seed),
        contour_point_sweep(window, list(enumerate_contours(window, max_diam)), rep.c0_fit, samples, cfg.seed),
    ]
    trees = {"cayley": {str(n): count_labeled_trees(n) for n in range(1, 9)},
             "restricted_beyond_bound": {str(m): [restricted_tree_count(n, m) for n in range(2 * m - 1, 2 * m + 3)]
                                         for m in range(2, 7)}}
    body = {"hypotheses": rep.as_dict(), "sweeps": [s.as_dict() for s in sweeps], "trees": trees,
            "ok": rep.ok and all(s.ok for s in sweeps),
            "truncation": {"max_diam": max_diam, "samples": samples}}
    _emit(cfg, body, [{"sweep": s.name, "samples": s.samples, "violations": len(s.violations),
                       "max_ratio": s.max_ratio} for s in sweeps])


def _do_decompose(cfg: RunConfig) -> None:
    from .contour import m_partition
    from .lattice import SpinFlipConfig
    from .polymer import coarsest_decomposition

    bonds = cfg.extra["bonds"]
    flips = SpinFlipConfig.from_half(bonds)
    p = cfg.params()
    part = m_partition(flips, p)
    poly = coarsest_decomposition(part, p)

    def node(c):
        return {"bonds": c.half(), "interior": list(c.interior), "diam": c.diam}

    body = {"flips": flips.half(),
            "contours": [node(c) for c in part],
            "polymers": [{"contours": [node(c) for c in pl]} for pl in poly],
            "truncation": {"method": "exact search"}}
    _emit(cfg, body)


def _do_trees(cfg: RunConfig) -> None:
    from .treesum import restricted_tree_count
    from .trees import count_labeled_trees, labeled_trees

    n = int(cfg.extra["n"])
    if not 1 <= n <= 12:
        raise ConfigError("tree counts are reported for 1 <= n <= 12")
    enumerated = sum(1 for _ in labeled_trees(n)) if n <= 8 else None
    restricted = {str(m): restricted_tree_count(n, m) for m in range(2, n + 1)} if n >= 2 else {}
    body = {"n": n, "count": count_labeled_trees(n), "enumerated": enumerated, "restricted": restricted,
            "truncation": {"enumeration_limit": 8}}
    _emit(cfg, body, [{"n": n, "m": int(m), "restricted": c} for m, c in restricted.items()])


# -- click wiring ----------------------------------------------------------------------------

def _common(f):
    opts = [
        click.option("--alpha", type=float, default=2.0, show_default=True, help="decay exponent in (1, 2]"),
        click.option("--beta", "beta", type=str, default="1", show_default=True, help="value or start:stop:step"),
        click.option("--M", "m_param", type=float, default=2.0, show_default=True, help="contour constant"),
        click.option("--lambda", "lam", type=str, default="0..0", show_default=True, help="box a..b"),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--output", "-o", type=str, default="-", show_default=True),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _config(name: str, alpha, beta, m_param, lam, seed, output, fmt, **extra) -> RunConfig:
    try:
        return RunConfig(subcommand=name, alpha=alpha, betas=parse_betas(beta), m_param=m_param,
                         lam=parse_lambda(lam), seed=seed, output=output, fmt=fmt,
                         order=extra.pop("order", None), max_diam=extra.pop("max_diam", None), extra=extra)
    except ConfigError as exc:
        _fail(name, exc)


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Exact enumeration, polymer expansion and bound sweeps for the long-range Ising chain."""


@main.command()
@_common
def exact(**kw):
    """Oracle partition function and magnetizations."""
    _run(_config("exact", **kw), _do_exact)


@main.command("polymer-z")
@_common
def polymer_z(**kw):
    """Polymer-gas partition function against the oracle."""
    _run(_config("polymer-z", **kw), _do_polymer_z)


@main.command()
@_common
@click.option("--order", type=int, default=3, show_default=True)
@click.option("--dps", type=int, default=80, show_default=True, help="working decimal digits")
def expand(dps, **kw):
    """Truncated cluster expansion against exact log Z."""
    _run(_config("expand", dps=dps, **kw), _do_expand)


@main.command()
@_common
@click.option("--set", "a_set", type=str, required=True, help="comma separated sites")
def correlate(a_set, **kw):
    """Wick products, two-point decay fit and bound report."""
    cfg = _config("correlate", **kw)
    try:
        sites = parse_sites(a_set)
        if not sites:
            raise ConfigError("empty site set")
    except ConfigError as exc:
        _fail("correlate", exc)
    _run(RunConfig(**{**asdict(cfg), "extra": {"sites": sites}}), _do_correlate)


@main.command()
@_common
@click.option("--max-diam", "max_diam", type=int, default=8, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
def verify(samples, **kw):
    """Hypothesis sweeps, site-bound sweeps and tree-family checks."""
    _run(_config("verify", samples=samples, **kw), _do_verify)


@main.command()
@_common
@click.option("--config", "flip_list", type=str, required=True, help="comma separated half-integer bonds")
def decompose(flip_list, **kw):
    """Contour partition and coarsest polymer decomposition of a flip set."""
    bonds = tuple(s for s in flip_list.replace(" ", "").split(",") if s)
    _run(_config("decompose", bonds=bonds, **kw), _do_decompose)


@main.command()
@_common
@click.option("--n", "n", type=int, required=True)
def trees(n, **kw):
    """Labeled and restricted tree counts."""
    _run(_config("trees", n=n, **kw), _do_trees)


if __name__ == "__main__":  # pragma: no cover
    main()
