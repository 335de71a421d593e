"""Command-line interface.

Exit codes: 0 pass, 1 violations found (or minimizer not converged), 2 usage,
configuration or domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import acceptance, fem, lab
from .errors import DomainError, ParameterError
from .figures import FIGURES, GRID_POINTS, figure_csv
from .models import MODEL_NAMES, RECORD_KEYS, MaterialParameters, build_model, original_of
from .tensor import check_gl_plus

PARAM_FLAGS = {  # flag -> record key
    "mu": "mu",
    "lambda": "lambda",
    "alpha": "alpha",
    "gamma": "gamma",
    "k": "k",
    "k_hat": "k_hat",
    "epsilon": "epsilon",
}
SCAN_KEYS = ("seed", "samples", "lo", "hi", "step", "threshold", "n", "directions", "chunk", "workers")
MINIMIZE_KEYS = ("resolution", "seed", "amplitude", "method", "gtol", "max_iter", "memory")
SCAN_KINDS = ("rank-one", "segment", "ellipticity", "coercivity", "agreement")


class UsageError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("material parameters")
    g.add_argument("--mu", type=float, help="shear modulus (default 1)")
    g.add_argument("--lambda", dest="lambda", type=float, help="first Lame parameter (default 0)")
    g.add_argument("--alpha", type=float, help="Euclidean extension parameter in (1/2, 1] (default 1)")
    g.add_argument("--gamma", type=float, help="geodesic extension parameter <= 1 (default 1/3)")
    g.add_argument("--k", type=float, help="exponentiated Hencky shear exponent (default 1)")
    g.add_argument("--k-hat", dest="k_hat", type=float, help="exponentiated Hencky volumetric exponent (default 1)")
    g.add_argument("--epsilon", type=float, help="Valanis-Landel half-width (default: selected automatically)")
    p.add_argument("--config", type=Path, help="JSON file with parameters and options; flags override it")


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampling")
    g.add_argument("--seed", type=int, help="base seed (default 0)")
    g.add_argument("--samples", type=int, help="number of samples (default 10000)")
    g.add_argument("--lo", type=float, help="smallest singular value (default 0.05)")
    g.add_argument("--hi", type=float, help="largest singular value (default 20)")
    g.add_argument("--step", type=float, help="relative finite-difference step (default 1e-3)")
    g.add_argument("--threshold", type=float, help="violation threshold (default 1e-8)")
    g.add_argument("--n", type=int, help="dimension (default 3)")
    g.add_argument("--directions", type=int, help="directions per grid cell (default 64)")
    g.add_argument("--chunk", type=int, help="samples per RNG stream (default 4096)")
    g.add_argument("--workers", type=int, help="worker processes; results do not depend on it (default 1)")


def _load_config(path: Optional[Path], allowed: Sequence[str]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def _merge(args: argparse.Namespace, keys: Sequence[str], file_values: dict) -> dict:
    out = {k: file_values[k] for k in keys if k in file_values}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _material(args, file_values: dict) -> MaterialParameters:
    rec = _merge(args, RECORD_KEYS[1:], file_values)
    rec["model"] = args.model
    return MaterialParameters.from_dict(rec)


def _scan_config(args, file_values: dict) -> lab.ScanConfig:
    return lab.ScanConfig(**_merge(args, SCAN_KEYS, file_values))


def _matrix(entries: Sequence[float]) -> np.ndarray:
    m = len(entries)
    n = int(round(math.sqrt(m)))
    if n * n != m or n not in (2, 3):
        raise UsageError(f"expected 4 or 9 matrix entries (row-major), got {m}")
    return np.array(entries, dtype=float).reshape(n, n)


def _write(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    file_values = _load_config(args.config, RECORD_KEYS[1:])
    rec = _material(args, file_values)
    F = _matrix(args.entries)
    check_gl_plus(F)
    model = build_model(rec, n=F.shape[0])
    W, overflow = model.evaluate(F)
    G = model.gradient(F)
    if args.json:
        out = {"model": rec.model, "value": float(W), "overflow": bool(overflow), "gradient": G.tolist()}
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"{float(W):.15g}")
        if overflow:
            print("warning: exponential saturated, value is a lower bound", file=sys.stderr)
        for row in G:
            print(" ".join(f"{v:.15g}" for v in row))
    return 0


def cmd_plot_data(args) -> int:
    Lambda = 2.0 if args.Lambda is None else args.Lambda
    if args.points < 3:
        raise UsageError("need at least 3 grid points")
    _write(args.output, figure_csv(args.figure, args.points, Lambda))
    return 0


def _run_scan(args, model, cfg: lab.ScanConfig, rec: MaterialParameters) -> lab.ScanReport:
    kind = args.kind
    if kind == "rank-one":
        return lab.rank_one_convexity_scan(model, cfg, directed=args.directed)
    if kind == "segment":
        return lab.segment_convexity_scan(model, cfg)
    if kind == "ellipticity":
        lo, hi, count = args.grid if args.grid else (cfg.lo, cfg.hi, 10)
        if count != int(count) or count < 1:
            raise UsageError("grid count must be a positive integer")
        emap = lab.ellipticity_probe(model, (lo, hi, int(count)), cfg, log_spacing=args.log_grid)
        return emap.to_report(model.name)
    if kind == "coercivity":
        return lab.coercivity_check(model, cfg)
    # agreement: one side must be an extension with a known agreement region
    other_name = args.against
    if other_name is None:
        other = original_of(rec.model, rec)
        original, extension = other, model
    else:
        other = build_model(MaterialParameters.from_dict({**rec.to_dict(), "model": other_name}), n=cfg.n)
        original, extension = (model, other) if other.agreement is not None else (other, model)
    region = tuple(args.region) if args.region else None
    if region is None and extension.agreement is None:
        raise UsageError("neither model has an agreement region; pass --region LO HI")
    return lab.extension_agreement_check(original, extension, region, cfg)


def cmd_scan(args) -> int:
    file_values = _load_config(args.config, RECORD_KEYS[1:] + SCAN_KEYS)
    rec = _material(args, file_values)
    cfg = _scan_config(args, file_values)
    model = build_model(rec, n=cfg.n)
    report = _run_scan(args, model, cfg, rec)
    print(report.summary())
    if args.report is not None:
        args.report.write_text(report.to_json() + "\n")
    if report.violations:
        path = args.witnesses or Path(f"{args.kind}-{rec.model}-witnesses.csv")
        path.write_text(report.to_csv())
        print(f"witnesses written to {path}")
        return 1
    return 0


def cmd_minimize(args) -> int:
    keys = RECORD_KEYS[1:] + MINIMIZE_KEYS + ("boundary",)
    file_values = _load_config(args.config, keys)
    rec = _material(args, file_values)
    opts = _merge(args, MINIMIZE_KEYS + ("boundary",), file_values)
    if "boundary" not in opts:
        raise UsageError("--boundary (4 or 9 entries, row-major) is required")
    F0 = _matrix(opts["boundary"])
    model = build_model(rec, n=F0.shape[0])
    mesh = fem.build_mesh(F0.shape[0], int(opts.get("resolution", 4)))
    amplitude = float(opts.get("amplitude", 0.2))
    if np.linalg.det(F0) <= 0:
        raise DomainError("boundary matrix is not in GL+(n): det F0 <= 0")
    initial = fem.perturbed_initial_field(mesh, F0, int(opts.get("seed", 0)), amplitude) if amplitude > 0 else None
    options = fem.MinimizeOptions(
        gtol=float(opts.get("gtol", 1e-10)),
        max_iter=int(opts.get("max_iter", 5000)),
        method=opts.get("method", "lbfgs"),
        memory=int(opts.get("memory", 10)),
    )
    res = fem.minimize(mesh, model, F0, initial=initial, options=options)
    out = res.to_dict()
    out["homogeneous_energy"] = float(np.sum(mesh.volumes)) * float(model.value(F0))
    _write(args.output, json.dumps(out, sort_keys=True, indent=2) + "\n")
    if args.field is not None:
        args.field.write_text(fem.mesh_to_csv(mesh, res.positions))
    return 0 if res.converged else 1


def cmd_verify(args) -> int:
    wanted = set(args.only or range(1, len(acceptance.CRITERIA) + 1))
    results = []
    for i, fn in enumerate(acceptance.CRITERIA, start=1):
        if i in wanted:
            c = fn()
            print(c.line(), flush=True)
            results.append(c)
    passed = sum(c.passed for c in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyhencky",
        description="Evaluate polyconvex logarithmic-strain energies, scan convexity, emit figure data, minimize.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="value and gradient of an energy at one matrix")
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("entries", nargs="+", type=float, help="4 or 9 entries of F, row-major")
    p.add_argument("--json", action="store_true", help="print a JSON object instead of plain text")
    _add_param_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot-data", help="CSV curves for the profile and hull figures")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--points", type=int, default=GRID_POINTS, help=f"grid points (default {GRID_POINTS})")
    p.add_argument("--lambda", dest="Lambda", type=float, help="volumetric parameter for 'psi' (default 2)")
    p.add_argument("-o", "--output", type=Path, help="output file (default stdout)")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("scan", help="run a convexity, agreement or coercivity scan")
    p.add_argument("kind", choices=SCAN_KINDS)
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("--directed", action="store_true", help="rank-one: optimize towards a violation")
    p.add_argument("--grid", nargs=3, type=float, metavar=("LO", "HI", "COUNT"), help="ellipticity grid per axis")
    p.add_argument("--log-grid", action="store_true", help="ellipticity: geometric grid spacing")
    p.add_argument("--against", choices=MODEL_NAMES, help="agreement: model to compare with")
    p.add_argument("--region", nargs=2, type=float, metavar=("LO", "HI"), help="agreement: singular value range")
    p.add_argument("--report", type=Path, help="write the JSON report here")
    p.add_argument("--witnesses", type=Path, help="witness CSV path (default <kind>-<model>-witnesses.csv)")
    _add_param_flags(p)
    _add_scan_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("minimize", help="minimize the discrete energy with affine boundary data")
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("--boundary", nargs="+", type=float, help="boundary matrix F0, 4 or 9 entries row-major")
    p.add_argument("--resolution", type=int, help="cells per axis (default 4)")
    p.add_argument("--seed", type=int, help="seed of the initial perturbation (default 0)")
    p.add_argument("--amplitude", type=float, help="relative perturbation size, 0 for the affine start (default 0.2)")
    p.add_argument("--method", choices=("lbfgs", "gd"), help="descent method (default lbfgs)")
    p.add_argument("--gtol", type=float, help="scaled gradient tolerance (default 1e-10)")
    p.add_argument("--max-iter", dest="max_iter", type=int, help="iteration limit (default 5000)")
    p.add_argument("--memory", type=int, help="L-BFGS memory (default 10)")
    p.add_argument("-o", "--output", type=Path, help="result JSON file (default stdout)")
    p.add_argument("--field", type=Path, help="write nodal positions as CSV")
    _add_param_flags(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", nargs="+", type=int, help="criterion numbers to run")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
