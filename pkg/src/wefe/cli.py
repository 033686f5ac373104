"""Command-line front end.

Subcommands:
    list     show the built-in solution families
    verify   run the full residual/classification suite on a family or a
             config file and write a JSON report
    eval     evaluate curvature quantities of a config metric at a point
    export   write a family out as an editable config file

Exit codes: 0 verification passed, 1 a check failed or a family
precondition was not met, 2 usage error, 3 evaluation error.  Reports are
byte-stable for a fixed run configuration; wall-clock timing lives in the
"timing" field, which is excluded from the canonical body.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, analysis, catalog, config as config_mod, exprdsl
from .analysis import VerificationReport
from .catalog import FamilyInstance
from .curvature import (
    Geometry,
    bakry_emery,
    cpe_tensor,
    optical_scalars,
    scalar_invariants,
)
from .errors import (
    ConfigError,
    ExprError,
    FamilyError,
    FamilyPreconditionError,
    SamplingError,
    WefeError,
)
from .tensorcore import values

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_EVAL = 3


def _parse_bindings(pairs):
    """--param name=value pairs; values stay strings, the family schema
    decides whether they are reals or expressions."""
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise FamilyError(f"--param expects name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        out[name.strip()] = value.strip()
    return out


def _parse_point(text: str, coords) -> dict:
    point = {}
    for pair in text.split(","):
        if "=" not in pair:
            raise WefeError(f"--point expects name=value pairs, got {pair!r}")
        name, value = pair.split("=", 1)
        name = name.strip()
        if name not in coords:
            raise WefeError(f"unknown coordinate {name!r} in --point")
        try:
            point[name] = float(value)
        except ValueError:
            raise WefeError(f"coordinate value {value!r} is not a number") from None
    missing = [c for c in coords if c not in point]
    if missing:
        raise WefeError(f"--point is missing coordinates {missing}")
    return point


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(row) for row in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def report_to_dict(report: VerificationReport) -> dict:
    points = [
        {
            "coords": {k: float(v) for k, v in rec.point.items()},
            "residuals": {k: float(v) for k, v in sorted(rec.residuals.items())},
            "classification": {
                "nilpotency": rec.classification.nilpotency,
                "gradient_status": rec.classification.gradient_status,
                "kundt": rec.classification.kundt,
                "isotropic": rec.classification.isotropic,
            },
            "excluded": rec.excluded,
        }
        for rec in report.points
    ]
    return {
        "meta": {
            "family": report.family_id,
            "params": dict(sorted(report.params.items())),
            "seed": report.seed,
            "order": report.order,
            "tol": report.tol,
            "convention": report.convention,
            "version": __version__,
        },
        "points": points,
        "aggregate": {
            "max_residuals": {
                k: float(v) for k, v in sorted(report.max_residuals.items())
            },
            "verdict": report.verdict,
            "agreement": report.agreement,
            "notes": list(report.notes),
        },
    }


def canonical_report_text(report_dict: dict) -> str:
    """Byte-stable serialization: timing is dropped, keys are sorted."""
    body = {k: v for k, v in report_dict.items() if k != "timing"}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


# -- subcommands -----------------------------------------------------------


def cmd_list(args) -> int:
    roster = catalog.list_families()
    if args.json:
        payload = [
            {"id": fid, "description": desc, "source": src}
            for fid, desc, src in roster
        ]
        print(json.dumps(payload, indent=2))
        return EXIT_PASS
    width = max(len(fid) for fid, _, _ in roster)
    for fid, desc, src in roster:
        print(f"{fid:<{width}}  {desc}")
        print(f"{'':<{width}}  [{src}]")
    return EXIT_PASS


def _instance_from_args(args) -> FamilyInstance:
    if args.family:
        return catalog.instantiate(args.family, _parse_bindings(args.param))
    cfg = config_mod.load_config(args.config)
    if args.param:
        raise FamilyError("--param applies to --family runs only")
    if cfg.density is None:
        raise ConfigError("verification needs a [density] table in the config")
    missing = [c for c in cfg.metric.chart.coords if c not in cfg.box]
    if missing:
        raise ConfigError(
            f"verification needs [sampling] ranges for all coordinates; "
            f"missing {missing}"
        )
    return FamilyInstance(
        "config", dict(cfg.params), cfg.metric, cfg.density, cfg.lam,
        None, dict(cfg.box),
    )


def cmd_verify(args) -> int:
    started = time.perf_counter()
    instance = _instance_from_args(args)
    resolution = None
    if instance.family_id == "kundt-3d":
        resolution = analysis.resolve_kundt_convention(
            instance, seed=args.seed, order=args.order, tol=args.tol
        )
    report = analysis.verify_family(
        instance, count=args.points, seed=args.seed, order=args.order,
        tol=args.tol,
    )
    doc = report_to_dict(report)
    if resolution is not None:
        doc["meta"]["convention"] = resolution.selected
        doc["aggregate"]["convention_ambiguous"] = resolution.ambiguous
    text = canonical_report_text(doc)
    doc["timing"] = {"seconds": time.perf_counter() - started}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(
        f"{report.family_id}: {report.verdict} "
        f"(max residual {max(report.max_residuals.values()):.3e}, "
        f"tol {report.tol:g}, {len(report.points)} points)"
    )
    for note in report.notes:
        print(f"  note: {note}")
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def cmd_eval(args) -> int:
    cfg = config_mod.load_config(args.config)
    point = _parse_point(args.point, cfg.metric.chart.coords)
    geo = Geometry(
        cfg.metric, point, cfg.params, order=args.order,
        density=cfg.density, lam=cfg.lam, mu=cfg.mu,
    )
    wanted = [q.strip() for q in args.quantities.split(",") if q.strip()]
    out = {}
    for q in wanted:
        if q == "christoffel":
            out[q] = _jsonable(values(geo.gamma))
        elif q == "riemann":
            out[q] = _jsonable(geo.pack.riemann_values)
        elif q == "ricci":
            out[q] = _jsonable(geo.pack.ricci_values)
        elif q == "tau":
            out[q] = geo.pack.tau_value
        elif q == "weyl":
            out[q] = _jsonable(geo.weyl_values)
        elif q == "gh":
            out[q] = _jsonable(geo.gh_values)
        elif q == "bakry_emery":
            out[q] = _jsonable(values(bakry_emery(geo.pack, geo.dpack, geo.mu)))
        elif q == "cpe":
            out[q] = _jsonable(values(cpe_tensor(geo.pack, geo.dpack, geo.g)))
        elif q == "optical":
            opt = optical_scalars(geo.dpack.grad, geo.g, geo.g_inv, geo.gamma)
            out[q] = {
                "expansion": opt.expansion,
                "shear_sq": opt.shear_sq,
                "twist_sq": opt.twist_sq,
            }
        elif q == "invariants":
            tau, ricci_sq, kretschmann = scalar_invariants(
                geo.pack, geo.g_inv_values
            )
            out[q] = {
                "tau": tau,
                "ricci_sq": ricci_sq,
                "kretschmann": kretschmann,
            }
        else:
            raise WefeError(f"unknown quantity {q!r}")
    print(json.dumps({"point": point, "quantities": out}, sort_keys=True, indent=2))
    return EXIT_PASS


def cmd_export(args) -> int:
    instance = catalog.instantiate(args.family, _parse_bindings(args.param))
    text = config_mod.dump_config(config_mod.config_from_instance(instance))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wefe",
        description=(
            "Numerical verification of the vacuum weighted Einstein field "
            "equation on smooth metric measure spacetimes."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="show the built-in solution families")
    p_list.add_argument("--json", action="store_true", help="machine-readable roster")
    p_list.set_defaults(fn=cmd_list)

    p_verify = sub.add_parser(
        "verify", help="run the verification suite on a family or config"
    )
    target = p_verify.add_mutually_exclusive_group(required=True)
    target.add_argument("--family", help="catalog family id")
    target.add_argument("--config", help="metric config file path")
    p_verify.add_argument(
        "--param", action="append", metavar="NAME=VALUE",
        help="family parameter binding (repeatable)",
    )
    p_verify.add_argument("--points", type=int, default=200)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--order", type=int, default=3)
    p_verify.add_argument("--tol", type=float, default=1e-9)
    p_verify.add_argument("--out", help="JSON report output path")
    p_verify.set_defaults(fn=cmd_verify)

    p_eval = sub.add_parser(
        "eval", help="evaluate curvature quantities at one point"
    )
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument(
        "--point", required=True, metavar="u=1,v=2,...",
        help="comma-separated coordinate values",
    )
    p_eval.add_argument(
        "--quantities", default="tau,gh",
        help="comma-separated list: christoffel, riemann, ricci, tau, weyl, "
        "gh, bakry_emery, cpe, optical, invariants",
    )
    p_eval.add_argument("--order", type=int, default=3)
    p_eval.set_defaults(fn=cmd_eval)

    p_export = sub.add_parser(
        "export", help="write a family out as an editable config file"
    )
    p_export.add_argument("--family", required=True)
    p_export.add_argument(
        "--param", action="append", metavar="NAME=VALUE",
        help="family parameter binding (repeatable)",
    )
    p_export.add_argument("--out", help="output path (default: stdout)")
    p_export.set_defaults(fn=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except FamilyPreconditionError as exc:
        print(f"precondition not met: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (FamilyError, ConfigError, ExprError, SamplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WefeError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except (ArithmeticError, ValueError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
