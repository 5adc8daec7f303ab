"""Command-line entry point for reproducible experiments.

Subcommands: branches, asymptotics, bound-correction, density-profile,
count-compare, billiard, portraits, validate.  Every output file carries a
header with the tool version, a hash of the resolved configuration, and the
discretization fingerprint; no timestamps are written, so identical configs
produce byte-identical files.  Flags win over the optional JSON config file;
MAGSPEC_CACHE sets the default cache directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cache import BranchCache, default_cache_dir
from .core import BoundaryCondition, MagspecError, ModelParams, PotentialField
from .counting import EdgeQuad, bound_correction_branch, bound_correction_eigfn
from .experiments import count_compare_sweep
from .model2d import defect_profile
from .oscillator import OscillatorGrid, SpectrumCache, branch_sample
from . import asymptotics as asym
from . import dynamics as dyn
from .validation import run_checks


def _parse_int_range(text):
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",")]


def _parse_float_range(text):
    """'lo..hi:step' or comma list."""
    if ".." in text:
        span, _, step = text.partition(":")
        a, b = span.split("..")
        a, b = float(a), float(b)
        step = float(step) if step else (b - a) / 50.0
        n = int(round((b - a) / step))
        return [a + k * step for k in range(n + 1)]
    return [float(t) for t in text.split(",")]


def _config_hash(args) -> str:
    skip = {"func", "config"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _grid(args) -> OscillatorGrid:
    return OscillatorGrid(step=args.grid_step, left_cut=12.0, richardson_levels=2)


def _header(args, grid) -> str:
    return (
        f"# magspec {__version__} config={_config_hash(args)} grid={grid.fingerprint}"
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: str, columns, rows):
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_json(path: Path, args, grid, payload):
    doc = {
        "tool": "magspec",
        "version": __version__,
        "config": _config_hash(args),
        "grid": grid.fingerprint,
        "results": payload,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _spectrum_cache(bc, grid, args):
    cache = SpectrumCache(bc, grid)
    cache_dir = args.cache or default_cache_dir()
    if cache_dir:
        cache.disk_cache = BranchCache(Path(cache_dir))
    return cache


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_branches(args) -> int:
    grid = _grid(args)
    bc = BoundaryCondition.parse(args.bc)
    ns = _parse_int_range(args.n)
    etas = _parse_float_range(args.eta)
    cache = _spectrum_cache(bc, grid, args)

    def one(n):
        return n, branch_sample(bc, n, etas, grid, cache=cache)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            branches = dict(pool.map(one, ns))
    else:
        branches = dict(one(n) for n in ns)

    rows = []
    for n in sorted(branches):
        br = branches[n]
        for k in range(len(br.eta_samples)):
            rows.append(
                (
                    bc.label,
                    n,
                    float(br.eta_samples[k]),
                    float(br.lambda_samples[k]),
                    float(br.boundary_values[k]),
                    float(br.boundary_derivatives[k]),
                )
            )
    out = _out_dir(args) / "branches.csv"
    _write_csv(out, _header(args, grid), ["bc", "n", "eta", "lambda", "u", "du"], rows)
    print(out)
    return 0


def cmd_asymptotics(args) -> int:
    grid = _grid(args)
    bc = BoundaryCondition.parse(args.bc)
    ns = _parse_int_range(args.n)
    lo, hi = (float(t) for t in args.window.split(":"))
    cache = _spectrum_cache(bc, grid, args)
    results = []
    for n in ns:
        etas = np.linspace(lo, hi, args.samples)
        br = branch_sample(bc, n, etas, grid, cache=cache)
        c0, c1 = asym.fit_leading_coefficient(br, (lo, hi))
        theory = asym.gap_coefficient(n)
        entry = {
            "bc": bc.label,
            "n": n,
            "window": [lo, hi],
            "c0_fit": c0,
            "c1_fit": c1,
            "c0_theory": theory,
            "rel_error": abs(c0 - theory) / theory,
            "airy_zero_Ai": asym.airy_zero("Ai", n + 1),
            "airy_zero_AiPrime": asym.airy_zero("AiPrime", n + 1),
            "deep_wall_at_-8": asym.lambda_neg_asymptote(bc, n, -8.0)
            if bc.label in ("dirichlet", "neumann")
            else None,
        }
        if bc.label == "neumann":
            wide = branch_sample(bc, n, np.linspace(-2.0, 3.0, 51), grid, cache=cache)
            entry["inflection_estimate"] = asym.neumann_inflection(wide)
        results.append(entry)
    out = _out_dir(args) / "asymptotics.json"
    _write_json(out, args, grid, results)
    print(out)
    return 0


def cmd_bound_correction(args) -> int:
    grid = _grid(args)
    bc = BoundaryCondition.parse(args.bc)
    taus = _parse_float_range(args.tau)
    hbars = _parse_float_range(args.hbar)
    cache = _spectrum_cache(bc, grid, args)
    methods = ["branch", "eigfn"] if args.method == "both" else [args.method]
    records = []
    rows = []
    for tau in taus:
        for hb in hbars:
            for method in methods:
                if method == "branch":
                    corr = bound_correction_branch(bc, tau, hb, grid, cache=cache)
                else:
                    corr = bound_correction_eigfn(bc, tau, hb, grid, EdgeQuad(), cache=cache)
                records.append(
                    {
                        "bc": corr.bc,
                        "tau": corr.tau,
                        "hbar": corr.hbar,
                        "method": corr.method,
                        "value": corr.value,
                        "quad_error": corr.quad_error,
                        "truncation": corr.truncation,
                    }
                )
                rows.append((corr.bc, corr.tau, corr.hbar, corr.method, corr.value, corr.quad_error))
    out = _out_dir(args)
    _write_json(out / "bound_correction.json", args, grid, records)
    _write_csv(
        out / "bound_correction.csv",
        _header(args, grid),
        ["bc", "tau", "hbar", "method", "value", "quad_error"],
        rows,
    )
    print(out / "bound_correction.json")
    return 0


def cmd_density_profile(args) -> int:
    grid = _grid(args)
    bc = BoundaryCondition.parse(args.bc)
    params = ModelParams(mu=args.mu, h=args.h)
    x1 = np.array(_parse_float_range(args.x1))
    cache = _spectrum_cache(bc, grid, args)
    prof = defect_profile(args.tau, params, bc, x1, grid, cache=cache)
    out = _out_dir(args) / "density_profile.csv"
    _write_csv(
        out,
        _header(args, grid),
        ["x1", "value"],
        [(float(a), float(b)) for a, b in prof],
    )
    print(out)
    return 0


def cmd_count_compare(args) -> int:
    grid = _grid(args)
    bc = BoundaryCondition.parse(args.bc)
    hs = _parse_float_range(args.h)
    if args.mu is not None:
        rule = lambda h: args.mu
    else:
        rule = lambda h: h**-0.5
    reports = count_compare_sweep(hs, mu_rule=rule, tau=args.tau, bc=bc, grid=grid)
    payload = []
    rows = []
    for r in reports:
        payload.append(
            {
                "h": r.h,
                "mu": r.mu,
                "tau": r.tau,
                "grid": [r.n1, r.n2],
                "oracle_base": r.oracle_base,
                "oracle_doubled": r.oracle_doubled,
                "bulk_only": r.bulk_only,
                "two_term": r.two_term,
                "err_two_term": r.err_two_term,
                "err_bulk": r.err_bulk,
                "win": r.win,
                "doubling_gap": r.doubling_gap,
            }
        )
        rows.append(
            (r.h, r.mu, r.tau, r.oracle_doubled, r.bulk_only, r.two_term, r.err_two_term, r.err_bulk, int(r.win))
        )
    out = _out_dir(args)
    _write_json(out / "count_compare.json", args, grid, payload)
    _write_csv(
        out / "count_compare.csv",
        _header(args, grid),
        ["h", "mu", "tau", "oracle", "bulk_only", "two_term", "err_two_term", "err_bulk", "win"],
        rows,
    )
    print(out / "count_compare.json")
    return 0


def cmd_billiard(args) -> int:
    grid = _grid(args)
    a = args.a
    eta = args.eta
    mu = args.mu
    xi2 = eta * a
    xi1 = math.sqrt(max(a * a - xi2 * xi2, 0.0))
    _, _, thop = dyn.hop_metrics(a, eta, mu)
    traj = dyn.integrate_flow(
        dyn.PhaseState(0.0, 0.0, xi1, xi2), None, mu, T=args.hops * thop * 1.05, tol=args.tol
    )
    out = _out_dir(args)
    refl_times = {r.t for r in traj.reflections}
    rows = []
    for row in traj.samples:
        rows.append(
            (
                float(row[0]),
                float(row[1]),
                float(row[2]),
                float(row[3]),
                float(row[4]),
                int(row[0] in refl_times),
            )
        )
    _write_csv(
        out / "trajectory.csv",
        _header(args, grid),
        ["t", "x1", "x2", "xi1", "xi2", "event_flag"],
        rows,
    )
    hop_rows = [
        (h.t_start, h.t_end, h.dx2, h.apex_x1, h.apex_t) for h in traj.hops
    ]
    _write_csv(
        out / "hops.csv",
        _header(args, grid),
        ["t_start", "t_end", "dx2", "apex_x1", "apex_t"],
        hop_rows,
    )
    print(out / "trajectory.csv")
    return 0


def cmd_portraits(args) -> int:
    grid = _grid(args)
    cases = (
        [f"{c}-{s}" for c in "abcd" for s in ("linear", "quadratic")]
        if args.case == "all"
        else args.case.split(",")
    )
    out = _out_dir(args)
    index = []
    for case in cases:
        bundle = dyn.portrait(case, mu=args.mu)
        base = f"portrait_{case}"
        _write_csv(
            out / f"{base}_hops.csv",
            _header(args, grid),
            ["t", "x1", "x2", "xi1", "xi2"],
            [tuple(float(v) for v in row) for row in bundle.hop_track.samples],
        )
        for k, track in enumerate(bundle.drift_tracks):
            _write_csv(
                out / f"{base}_drift{k}.csv",
                _header(args, grid),
                ["t", "x1", "x2"],
                [tuple(float(v) for v in row) for row in track],
            )
        index.append(
            {
                "case": case,
                "expected": bundle.expected,
                "observed": bundle.observed,
                "consistent": bundle.consistent,
                "eta_trend": bundle.eta_trend,
                "files": [f"{base}_hops.csv"]
                + [f"{base}_drift{k}.csv" for k in range(len(bundle.drift_tracks))],
            }
        )
    _write_json(out / "portraits_index.json", args, grid, index)
    bad = [e["case"] for e in index if not e["consistent"]]
    print(out / "portraits_index.json")
    if bad:
        print(f"sign check failed for: {', '.join(bad)}", file=sys.stderr)
        return 1
    return 0


def cmd_validate(args) -> int:
    grid = _grid(args)
    names = args.only.split(",") if args.only else None
    results = run_checks(names, grid)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:{width}s}  {r.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="magspec",
        description="Boundary spectral asymptotics toolkit for the 2D magnetic "
        "Schrodinger operator",
    )
    p.add_argument("--config", help="JSON file with defaults; explicit flags win")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--cache", default=None, help="branch cache directory (default: $MAGSPEC_CACHE)")
    p.add_argument("--grid-step", dest="grid_step", type=float, default=5e-3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("branches", help="sample eigenvalue branches to CSV")
    q.add_argument("--bc", required=True)
    q.add_argument("--n", default="0..2")
    q.add_argument("--eta", default="-2..6:0.05")
    q.set_defaults(func=cmd_branches)

    q = sub.add_parser("asymptotics", help="gap-coefficient fits and Airy data")
    q.add_argument("--bc", required=True)
    q.add_argument("--n", default="0,1")
    q.add_argument("--window", default="2.5:3.5")
    q.add_argument("--samples", type=int, default=11)
    q.set_defaults(func=cmd_asymptotics)

    q = sub.add_parser("bound-correction", help="boundary corrections, both forms")
    q.add_argument("--bc", required=True)
    q.add_argument("--tau", default="1.0")
    q.add_argument("--hbar", default="0.2,0.1,0.05")
    q.add_argument("--method", choices=["branch", "eigfn", "both"], default="both")
    q.set_defaults(func=cmd_bound_correction)

    q = sub.add_parser("density-profile", help="kernel defect profile to CSV")
    q.add_argument("--bc", required=True)
    q.add_argument("--tau", type=float, default=1.0)
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--h", type=float, required=True)
    q.add_argument("--x1", default="0..1:0.01")
    q.set_defaults(func=cmd_density_profile)

    q = sub.add_parser("count-compare", help="oracle count vs two-term formula")
    q.add_argument("--bc", default="dirichlet")
    q.add_argument("--h", default="0.2,0.14,0.1,0.07,0.05")
    q.add_argument("--mu", type=float, default=None, help="fixed mu (default: h^-1/2)")
    q.add_argument("--tau", type=float, default=0.0)
    q.set_defaults(func=cmd_count_compare)

    q = sub.add_parser("billiard", help="hop trajectory CSVs")
    q.add_argument("--a", type=float, default=1.0)
    q.add_argument("--eta", type=float, default=0.0)
    q.add_argument("--mu", type=float, default=10.0)
    q.add_argument("--hops", type=int, default=20)
    q.set_defaults(func=cmd_billiard)

    q = sub.add_parser("portraits", help="hop/drift portrait bundles")
    q.add_argument("--case", default="all")
    q.add_argument("--mu", type=float, default=30.0)
    q.set_defaults(func=cmd_portraits)

    q = sub.add_parser("validate", help="run the invariant suite")
    q.add_argument("--only", default=None, help="comma-separated check names")
    q.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            defaults = json.load(fh)
        sentinel = build_parser().parse_args(argv)
        for key, val in defaults.items():
            key = key.replace("-", "_")
            if hasattr(args, key) and getattr(sentinel, key) == parser.get_default(key):
                setattr(args, key, val)
    try:
        return args.func(args)
    except MagspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
