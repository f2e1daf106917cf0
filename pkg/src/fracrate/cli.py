"""Command-line front end: ``fracrate {symbols,energies,flow,verify}``.

Configuration comes from built-in defaults, then an optional JSON file
(``--config``), then flags; unknown keys are rejected before any work.

Exit codes: 0 success, 1 a check failed, 2 numerical failure, 3 bad config.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from . import acceptance
from . import symbols as sym
from .energies import FOURIER, REALSPACE, MAX_DIRECT_M, decompose_rate, dirichlet_energy, gagliardo_direct, gagliardo_fourier
from .fields import DEFAULT_GRIDS, GridSpec, ResolutionWarning, make_profile, sample, smooth_bump
from .flows import FlowOverflowError, FlowSpec, convergence_study, dissipation_audit, evolve
from .operators import first_variation_check, limit_operator, rate_operator, report_json
from .quadrature import QuadratureConfig, QuadratureError

log = logging.getLogger("fracrate")

EXIT_OK, EXIT_CHECK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2, 3
COMMANDS = ("symbols", "energies", "flow", "verify")


class ConfigError(ValueError):
    pass


def fmt(v):
    """12 significant digits, locale independent."""
    return f"{float(v):.12g}"


@dataclass
class RunConfig:
    command: str
    grid: GridSpec
    profile: dict
    s_values: list
    quadrature: QuadratureConfig
    output_dir: str = "fracrate_out"
    format: str = "csv"
    xi: list | None = None
    T: float = 1.0
    sample_times: list = field(default_factory=lambda: [0.0, 0.1, 0.5, 1.0])
    methods: list | None = None


_TOP_KEYS = {"command", "grid", "profile", "s_values", "quadrature", "output_dir", "format",
             "xi", "T", "sample_times", "methods"}
_GRID_KEYS = {"N", "L", "M"}
_QUAD_KEYS = {f.name for f in dc_fields(QuadratureConfig)}
_DEFAULT_S = {"symbols": [0.9, 0.99, 0.999], "energies": [0.6, 0.75, 0.9, 0.99],
              "flow": [0.9, 0.99, 0.999], "verify": []}


def _strict(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def build_config(command, raw=None, overrides=None):
    """Merge defaults, file contents and flag overrides into a RunConfig."""
    raw = dict(raw or {})
    _strict(raw, _TOP_KEYS, "config")
    if "command" in raw and raw["command"] != command:
        raise ConfigError(f"config is for {raw['command']!r}, not {command!r}")
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "grid_M":
            raw["grid"] = dict(raw.get("grid", {}), M=v)
        elif k == "profile":
            raw["profile"] = {"name": v}
        else:
            raw[k] = v

    g = raw.get("grid", {})
    _strict(g, _GRID_KEYS, "grid")
    try:
        N = int(g.get("N", 1))
        L0, M0 = DEFAULT_GRIDS.get(N, (None, None))
        grid = GridSpec(N, float(g.get("L", L0)), int(g.get("M", M0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc

    prof = raw.get("profile", {"name": "gaussian"})
    if not isinstance(prof, dict) or "name" not in prof:
        raise ConfigError("profile must be an object with a name")
    params = {k: v for k, v in prof.items() if k != "name"}
    if not params:
        params = {"gaussian": {"sigma": 1.0}, "smooth_bump": {"r": 1.0},
                  "spectral_decay": {"beta": 3.0}}.get(prof["name"], {})
    try:
        make_profile(prof["name"], **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad profile: {exc}") from exc
    profile = {"name": prof["name"], **params}

    s_values = [float(s) for s in raw.get("s_values", _DEFAULT_S[command])]
    for s in s_values:
        if not 0.0 < s < sym.S_MAX:
            raise ConfigError(f"s = {s} outside (0, 1 - 1e-6)")

    q = raw.get("quadrature", {})
    _strict(q, _QUAD_KEYS, "quadrature")
    try:
        quad = QuadratureConfig(**q)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature settings: {exc}") from exc

    fmt_ = raw.get("format", "csv")
    if fmt_ not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    xi = raw.get("xi")
    if xi is not None:
        xi = [float(x) for x in np.atleast_1d(xi)]
        if not xi:
            raise ConfigError("xi grid is empty")
        if any(not np.isfinite(x) or x < 0 for x in xi):
            raise ConfigError("xi values must be finite and non-negative")
    methods = raw.get("methods")
    if methods is not None:
        methods = [str(m).upper() for m in methods]
        if any(m not in (FOURIER, REALSPACE) for m in methods):
            raise ConfigError("methods must be FOURIER or REALSPACE")
    try:
        T = float(raw.get("T", 1.0))
        times = [float(t) for t in raw.get("sample_times", [0.0, 0.1, 0.5, 1.0])]
        if command == "flow":
            FlowSpec(limit_operator(), T, tuple(times))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad flow settings: {exc}") from exc
    return RunConfig(command, grid, profile, s_values, quad, str(raw.get("output_dir", "fracrate_out")),
                     fmt_, xi, T, times, methods)


def _threads():
    try:
        return max(1, int(os.environ.get("FRACRATE_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = min(_threads(), max(1, len(items)))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _write_rows(path_base, header, rows, fmt_):
    if fmt_ == "json":
        path = path_base + ".json"
        with open(path, "w") as fh:
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=2, default=_plain)
            fh.write("\n")
    else:
        path = path_base + ".csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([x if isinstance(x, str) else fmt(x) for x in r])
    return path


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")
    return path


def _field(cfg):
    prof = make_profile(cfg.profile["name"], **{k: v for k, v in cfg.profile.items() if k != "name"})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return prof, sample(prof, cfg.grid)


# ---------------------------------------------------------------------------
# subcommands

def cmd_symbols(cfg):
    N = cfg.grid.N
    if cfg.xi is None:
        xi = np.unique(np.concatenate([np.unique(cfg.grid.xi_axis[cfg.grid.xi_axis > 0]), sym.DEFAULT_PROBES]))
    else:
        xi = np.asarray(cfg.xi)
    labels = list(cfg.s_values) + [sym.LIMIT]
    tables = _map(lambda s: sym.build_table(N, s, xi, cfg.quadrature), labels)
    files = []
    for s, tab in zip(labels, tables):
        tag = "limit" if s == sym.LIMIT else f"s{fmt(s)}"
        files.append(_write_rows(os.path.join(cfg.output_dir, f"symbols_N{N}_{tag}"),
                                 list(sym._TABLE_COLUMNS), tab.rows(), cfg.format))
    pos = xi[xi > 0]
    report = sym.check_m_bounds(N, pos, cfg.quadrature) if pos.size else {"N": N, "rows": [], "all_pass": True}
    files.append(_write_json(os.path.join(cfg.output_dir, f"bounds_N{N}.json"), report))
    return (EXIT_OK if report["all_pass"] else EXIT_CHECK), files


ENERGY_HEADER = ["profile", "N", "s", "method", "a_term", "b_term", "j_term", "total", "G1", "Gs"]


def cmd_energies(cfg):
    prof, u = _field(cfg)
    N = cfg.grid.N
    methods = cfg.methods or ([FOURIER, REALSPACE] if N == 1 and cfg.grid.M <= MAX_DIRECT_M else [FOURIER])
    if REALSPACE in methods and N != 1:
        raise ConfigError("REALSPACE energies are one-dimensional")
    G1 = dirichlet_energy(u)
    label = cfg.profile["name"]
    rows, ok = [], True

    def one(job):
        s, m = job
        br = decompose_rate(u, s, cfg.quadrature, m)
        if s == 1.0:
            Gs = G1
        else:
            Gs = gagliardo_fourier(u, s, cfg.quadrature) if m == FOURIER else gagliardo_direct(u, s, cfg.quadrature)
        return br, Gs

    jobs = [(s, m) for m in methods for s in list(cfg.s_values) + [1.0]]
    for (s, m), (br, Gs) in zip(jobs, _map(one, jobs)):
        rows.append([label, N, s, m, br.a_term, br.b_term, br.j_term, br.total, G1, Gs])
        ok &= br.j_term >= -1e-10
        if m == FOURIER:
            ok &= br.identity_residual() <= 1e-10
        else:
            ok &= br.identity_residual() <= 1e-3
    files = [_write_rows(os.path.join(cfg.output_dir, f"energies_{label}_N{N}"), ENERGY_HEADER, rows, cfg.format)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        phi = sample(smooth_bump(0.5), cfg.grid)
    reps = [first_variation_check(rate_operator(s), u, phi, cfg=cfg.quadrature) for s in cfg.s_values if s > 0.5]
    reps.append(first_variation_check(limit_operator(), u, phi, cfg=cfg.quadrature))
    path = os.path.join(cfg.output_dir, f"first_variation_{label}_N{N}.json")
    with open(path, "w") as fh:
        fh.write(report_json(reps) + "\n")
    files.append(path)
    ok &= all(r["pass"] for r in reps)
    return (EXIT_OK if ok else EXIT_CHECK), files


def cmd_flow(cfg):
    _, u0 = _field(cfg)
    for s in cfg.s_values:
        if not 0.5 < s:
            raise ConfigError("flow s values must exceed 1/2")
    times = tuple(cfg.sample_times)
    tab = convergence_study(u0, cfg.s_values, cfg.T, times, cfg.quadrature)
    files = [_write_rows(os.path.join(cfg.output_dir, "convergence"), list(tab.columns), tab.rows, cfg.format)]
    ok = True
    audits = {}
    ops = [(f"s{fmt(s)}", rate_operator(s)) for s in cfg.s_values] + [("limit", limit_operator())]
    for tag, op in ops:
        tr = evolve(FlowSpec(op, cfg.T, times), u0, cfg.quadrature)
        files.append(tr.export(os.path.join(cfg.output_dir, f"flow_{tag}")))
        aud = dissipation_audit(tr)
        audits[tag] = {"max_residual": aud["max_residual"], "energy_monotone": tr.energy_monotone(),
                       "growth": tr.growth}
        ok &= aud["max_residual"] <= 1e-8 and tr.energy_monotone()
    files.append(_write_json(os.path.join(cfg.output_dir, "flow_audit.json"), audits))
    return (EXIT_OK if ok else EXIT_CHECK), files


def cmd_verify(cfg):
    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            results = acceptance.run_all(cfg.quadrature, ex)
    else:
        results = acceptance.run_all(cfg.quadrature)
    for r in results:
        print(r.line())
    manifest = {
        "checks": [{"name": r.name, "measured": r.measured, "tolerance": r.tolerance,
                    "pass": r.passed, "detail": r.detail} for r in results],
        "all_pass": all(r.passed for r in results),
    }
    path = _write_json(os.path.join(cfg.output_dir, "manifest.json"), manifest)
    return (EXIT_OK if manifest["all_pass"] else EXIT_CHECK), [path]


HANDLERS = {"symbols": cmd_symbols, "energies": cmd_energies, "flow": cmd_flow, "verify": cmd_verify}


def _parser():
    p = argparse.ArgumentParser(prog="fracrate", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--s", type=float, nargs="+", dest="s_values", help="fractional orders")
    p.add_argument("--grid-M", type=int, dest="grid_M", help="points per axis")
    p.add_argument("--profile", help="gaussian, smooth_bump or spectral_decay")
    p.add_argument("--xi", type=float, nargs="*", help="wavenumber magnitudes for symbols")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = {}
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
        overrides = {k: getattr(args, k) for k in ("s_values", "grid_M", "profile", "xi", "output_dir", "format")}
        cfg = build_config(args.command, raw, overrides)
        os.makedirs(cfg.output_dir, exist_ok=True)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, files = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, FlowOverflowError, sym.PrecisionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in files:
        print(f)
    if code == EXIT_CHECK:
        print("one or more checks failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
