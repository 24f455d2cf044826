"""Command-line driver: ``apspec <subcommand> [options]``.

Values from ``--config`` override command-line flags, which override the
built-in defaults. Exit status is 0 on success, 2 for configuration errors
and 3 for computation errors; ``compare`` exits 1 when reports disagree.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import report as rp
from .errors import ApspecError, ConfigInvalid, SchemaMismatch, SchemaSectionMismatch
from .systems import CATALOG, build_system

EXIT_OK, EXIT_DIFF, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3

_DESCRIPTIONS = {
    "CircleRotation": "x -> x + alpha mod 1 (default alpha = golden mean conjugate)",
    "TorusTranslation": "x -> x + alpha on the 2-torus; flow=true for the R-action",
    "DoublingMap": "x -> 2x mod 1, semigroup N",
    "BernoulliShift": "iid two-sided shift with bias p",
    "SubstitutionSubshift": "THUE_MORSE | FIBONACCI | PERIOD_DOUBLING subshift",
    "ProductSystem": "product of two catalog systems A and B (max metric)",
    "OnePoint": "trivial one-point system",
    "PointSetHull": "translation hull of a 1-D point set on the grid hZ",
}

_SUBCOMMANDS = ("profile", "ap-scan", "spectrum", "verdict", "diffraction", "equiv-suite",
                "periods")


def _add_common(p):
    p.add_argument("--config", help="JSON experiment config; its values take precedence")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", help="output directory for report.json and CSV series")
    p.add_argument("--grid-max", type=int, help="largest |t| of the grid, in grid steps")
    p.add_argument("--samples", type=int, help="number of sample points")
    p.add_argument("--quiet", action="store_true", help="print nothing on success")


def build_parser():
    parser = argparse.ArgumentParser(prog="apspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sys_p = sub.add_parser("systems", help="catalog of dynamical systems")
    sys_p.add_argument("action", choices=["list"])

    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} diagnostic")
        _add_common(p)
        p.add_argument("--system", help="catalog system name")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="system parameter; VALUE is parsed as JSON when possible")
        p.add_argument("--observable", action="append", default=None,
                       help="observable name (repeatable)")
        p.add_argument("--method", choices=["MONTE_CARLO", "QUADRATURE", "BIRKHOFF"])
        if name == "diffraction":
            p.add_argument("--provenance", default=None)
            p.add_argument("--points", help="point-set file, one coordinate per line")
            p.add_argument("--L", type=float, dest="L")
            p.add_argument("--Z", type=float, dest="Z")
            p.add_argument("--gamma-check", action="store_true")

    run_p = sub.add_parser("run", help="run every diagnostic listed in a config")
    _add_common(run_p)

    cmp_p = sub.add_parser("compare", help="diff two report.json files")
    cmp_p.add_argument("report_a")
    cmp_p.add_argument("report_b")
    cmp_p.add_argument("--k", type=float, default=6.0, help="tolerance in standard errors")
    cmp_p.add_argument("--quiet", action="store_true")
    return parser


def _param_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def config_from_args(args):
    """Merge defaults, flags and ``--config`` (highest precedence)."""
    cfg = {"seed": args.seed}
    if args.command != "run":
        cfg["diagnostics"] = [args.command]
        if args.system:
            system = {"name": args.system}
            for item in args.param:
                if "=" not in item:
                    raise ConfigInvalid(f"expected KEY=VALUE, got {item!r}", ["param"])
                k, v = item.split("=", 1)
                system[k] = _param_value(v)
            cfg["system"] = system
        if args.observable:
            cfg["observables"] = args.observable
        if args.method:
            cfg.setdefault("sampling", {})["method"] = args.method
        if args.command == "diffraction":
            dc = {}
            if args.provenance:
                dc["provenance"] = args.provenance
            if args.points:
                dc["points_file"] = args.points
            for key in ("L", "Z"):
                if getattr(args, key) is not None:
                    dc[key] = getattr(args, key)
            if args.gamma_check:
                dc["gamma_check"] = True
            cfg["diffraction"] = dc
    if args.grid_max is not None:
        cfg.setdefault("grid", {})["extent"] = args.grid_max
    if args.samples is not None:
        cfg.setdefault("sampling", {})["n"] = args.samples
    if args.config:
        file_cfg = rp.load_config(args.config)
        for key, value in file_cfg.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key] = {**cfg[key], **value}
            elif key == "diagnostics" and args.command != "run":
                continue
            else:
                cfg[key] = value
    return rp.validate_config(cfg)


def _summary(rep):
    lines = []
    for diag, res in rep.results.items():
        if diag == "verdict":
            lines.append(f"verdict: {res['verdict']} (known: {res['known_spectral_type']})")
            grp = res.get("eigenvalue_group")
            if grp:
                gens = ", ".join(f"{g:.6f}" for g in grp["generators"])
                lines.append(f"  eigenvalue generators: {gens}")
        elif diag == "ap-scan":
            lines.append(f"ap-scan d_bar: {res['d_bar']['verdict']}")
            for name, r in res["observables"].items():
                lines.append(f"  {name}: F {r['F']['verdict']}, S {r['S_defect']['verdict']}")
        elif diag == "spectrum":
            for name, r in res.items():
                atoms = ", ".join(f"{a['beta']:.4f}:{a['mass']:.3f}" for a in r["atoms"])
                lines.append(f"spectrum {name}: {r['verdict']} atoms [{atoms}]")
        elif diag == "equiv-suite":
            lines.append(f"equiv-suite agree={res['agree']} {res['notions']}")
        elif diag == "diffraction":
            peaks = res["spectrum"]["peaks"]
            lines.append(f"diffraction: {len(peaks)} Bragg peaks")
            for p in sorted(peaks, key=lambda p: -p["intensity"])[:8]:
                lines.append(f"  k={p['k']:.4f} intensity={p['intensity']:.4f}")
            if "gamma_residual" in res:
                lines.append(f"  gamma identity residual: {res['gamma_residual']:.2e}")
        elif diag == "periods":
            lines.append(f"periods consistent: {res['consistent']}")
        elif diag == "profile":
            for name, r in res["observables"].items():
                lines.append(f"profile {name}: star residual {r['star_residual']:.1e}, "
                             f"bounds {r['e_le_F'] and r['F_le_root_e']}")
    return "\n".join(lines)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "systems":
        for name in CATALOG:
            print(f"{name:22s} {_DESCRIPTIONS[name]}")
        return EXIT_OK
    if args.command == "compare":
        try:
            diff = rp.compare(args.report_a, args.report_b, k=args.k)
        except SchemaMismatch as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except SchemaSectionMismatch as exc:
            print(f"differ: {exc}", file=sys.stderr)
            return EXIT_DIFF
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if not args.quiet:
            print(json.dumps(diff.to_dict(), indent=1))
        return EXIT_OK if diff.clean else EXIT_DIFF
    try:
        cfg = config_from_args(args)
        if args.command == "run" and not args.config:
            raise ConfigInvalid("run needs --config")
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            rep = rp.run(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ApspecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    out = args.out or cfg.get("output")
    if out:
        path = rep.write(out)
        if not args.quiet:
            print(f"wrote {path}")
    if not args.quiet:
        print(_summary(rep))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
