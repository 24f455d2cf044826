"""Experiment configs, the diagnostic pipeline and reproducible run reports."""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from importlib import metadata

import jsonschema
import numpy as np

from . import almost_periodic as ap
from . import pointsets as dif
from . import spectral
from .errors import (ApspecError, ConfigInvalid, InvalidParameter, SchemaMismatch,
                     SchemaSectionMismatch, UnknownSystem)
from .profiles import Method, compute_profiles
from .systems import CATALOG, build_system

SCHEMA_VERSION = 1
DIAGNOSTICS = ("profile", "ap-scan", "spectrum", "verdict", "diffraction", "equiv-suite",
               "periods")

_POS_INT = {"type": "integer", "exclusiveMinimum": 0}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["seed"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "system": {
            "type": "object",
            "required": ["name"],
            "properties": {"name": {"enum": list(CATALOG)}},
        },
        "observables": {"type": "array", "items": {"type": "string"}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"extent": _POS_INT,
                           "eps_grid": {"type": "array", "items": _POS_NUM, "minItems": 1},
                           "windows": {"type": "array", "items": _POS_INT, "minItems": 2}},
        },
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 2},
                           "method": {"enum": [m.value for m in Method]}},
        },
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"N": _POS_INT, "samples": {"type": "integer", "minimum": 2},
                           "exact": {"type": "boolean"}},
        },
        "diffraction": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "provenance": {"enum": [p.value for p in dif.Provenance
                                        if p != dif.Provenance.CUSTOM]},
                "points_file": {"type": "string"},
                "L": _POS_NUM, "Z": _POS_NUM, "k_max": _POS_NUM, "rate": _POS_NUM,
                "window": {"type": "array", "items": {"type": "number"},
                           "minItems": 2, "maxItems": 2},
                "radius": _POS_NUM,
                "gamma_check": {"type": "boolean"},
            },
        },
        "diagnostics": {"type": "array", "items": {"enum": list(DIAGNOSTICS)}},
        "output": {"type": "string"},
    },
}


def validate_config(cfg):
    """Validate against :data:`CONFIG_SCHEMA`; raises :class:`ConfigInvalid` with the field path."""
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigInvalid(err.message, err.absolute_path)
    diags = cfg.get("diagnostics", [])
    if any(d != "diffraction" for d in diags) and "system" not in cfg:
        raise ConfigInvalid("a system is required for the requested diagnostics", ["system"])
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"not valid JSON ({exc.msg} at line {exc.lineno})") from None
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc.strerror}") from None
    return validate_config(cfg)


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def canonical_json(obj):
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def artifact_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------------------
# reports


@dataclass
class RunReport:
    """Deterministic report body, CSV series and (non-deterministic) timing."""

    body: dict
    csv: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def body_json(self):
        return json.dumps(jsonable(self.body), sort_keys=True, indent=1)

    def to_json(self):
        doc = dict(jsonable(self.body))
        doc["timing"] = jsonable(self.timing)
        return json.dumps(doc, sort_keys=True, indent=1)

    def write(self, outdir):
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "report.json"), "w") as fh:
            fh.write(self.to_json() + "\n")
        for name, text in sorted(self.csv.items()):
            with open(os.path.join(outdir, name), "w") as fh:
                fh.write(text)
        return os.path.join(outdir, "report.json")

    @property
    def results(self):
        return self.body["results"]


def body_of(report):
    """Deterministic body of a report given as RunReport, dict or path."""
    if isinstance(report, RunReport):
        return jsonable(report.body)
    if isinstance(report, (str, os.PathLike)):
        with open(report) as fh:
            report = json.load(fh)
    return {k: v for k, v in report.items() if k != "timing"}


def _safe(name):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _entry(p):
    return p.to_dict()


def _profile_diag(system, cfg, ctx):
    names = cfg.get("observables") or system.spectral_observables()
    obs = [system.observable(n) for n in names]
    fam = system.family()
    ps = compute_profiles(system, observables=obs, family=fam, metric=True, **ctx["sampling"],
                          seed=ctx["seed"], extent=ctx["extent"])
    out = {"d_bar": _entry(ps.d_bar), "observables": {}}
    csv = {"d_bar.csv": ps.d_bar.to_csv()}
    for f in obs:
        e, F, S = ps.e_bar[f.name], ps.F[f.name], ps.S[f.name]
        star = np.abs(F.values ** 2 - 2 * ps.norm_sq[f.name] + 2 * S.values.real)
        se = np.maximum(e.stderr, F.stderr) + 1e-12  # rounding slack when stderr is 0
        upper = np.sqrt(2 * f.sup_norm * e.values)
        out["observables"][f.name] = {
            "e_bar": _entry(e), "F": _entry(F), "S": _entry(S),
            "star_residual": float(star.max()),
            "e_le_F": bool(np.all(e.values <= F.values + 4 * se)),
            "F_le_root_e": bool(np.all(F.values <= upper + 4 * se)),
        }
        for tag, p in (("e_bar", e), ("F", F), ("S", S)):
            csv[f"{tag}_{_safe(f.name)}.csv"] = p.to_csv()
    out["e_bar_family"] = _entry(ps.e_family)
    out["F_family"] = _entry(ps.F_family)
    out["family"] = fam.describe()
    csv["e_bar_family.csv"] = ps.e_family.to_csv()
    csv["F_family.csv"] = ps.F_family.to_csv()
    ctx["profiles"] = ps
    return out, csv


def _ap_scan_diag(system, cfg, ctx):
    ps = ctx.get("profiles")
    if ps is None:
        names = cfg.get("observables") or system.spectral_observables()
        ps = compute_profiles(system, observables=[system.observable(n) for n in names],
                              metric=True, **ctx["sampling"], seed=ctx["seed"],
                              extent=ctx["extent"])
    eps, windows = ctx["eps_grid"], ctx["windows"]
    rep = ap.scan_almost_periods(ps.d_bar, eps, windows)
    out = {"d_bar": rep.to_dict(), "observables": {}}
    csv = {"ap_d_bar.csv": ap.almost_period_csv(ps.d_bar, rep.eps_grid[-1])}
    if rep.verdict == ap.AP:
        out["frequencies"] = ap.fourier_bohr_coefficients(ps.d_bar).to_dict()
    for name, F in ps.F.items():
        out["observables"][name] = {
            "F": ap.scan_almost_periods(F, eps, windows).to_dict(),
            "S_defect": ap.scan_almost_periods(ap.translation_defect(ps.S[name]),
                                               None, None).to_dict()}
    return out, csv


def _spectrum_diag(system, cfg, ctx):
    sp = ctx["spectrum"]
    names = cfg.get("observables") or system.spectral_observables()
    out, csv = {}, {}
    for name in names:
        est = spectral.observable_spectrum(system, system.observable(name), sp["N"],
                                           n=sp["samples"], seed=ctx["seed"], exact=sp["exact"])
        out[name] = est.to_dict()
        csv[f"atoms_{_safe(name)}.csv"] = est.atoms_csv()
    return out, csv


def _verdict_diag(system, cfg, ctx):
    sp = ctx["spectrum"]
    opts = spectral.VerdictOptions(n_samples=ctx["sampling"]["n"] or 100_000,
                                   extent=ctx["extent"], method=ctx["sampling"]["method"],
                                   seed=ctx["seed"], eps_grid=ctx["eps_grid"],
                                   windows=ctx["windows"], spectral_N=sp["N"],
                                   spectral_samples=sp["samples"], exact=sp["exact"])
    v = spectral.discrete_spectrum_verdict(system, opts)
    out = v.to_dict()
    out["known_spectral_type"] = system.known_spectral_type.value
    return out, {"verdict_d_bar.csv": v.d_bar.to_csv()}


def _equiv_diag(system, cfg, ctx):
    m = spectral.cross_equivalence_suite(system, n=ctx["sampling"]["n"] or 20_000,
                                         extent=ctx["extent"], seed=ctx["seed"],
                                         method=ctx["sampling"]["method"],
                                         eps_grid=ctx["eps_grid"], windows=ctx["windows"])
    return m.to_dict(), {}


def _periods_diag(system, cfg, ctx):
    rep = ap.cross_check_period_notions(system, n=ctx["sampling"]["n"], seed=ctx["seed"],
                                        extent=ctx["extent"] or 500,
                                        method=ctx["sampling"]["method"])
    return rep.to_dict(), {}


def _diffraction_diag(system, cfg, ctx):
    dc = dict(cfg.get("diffraction", {}))
    if "points_file" in dc:
        with open(dc["points_file"]) as fh:
            ps = dif.PointSet.from_text(fh.read(), dc.get("L"))
    else:
        kw = {"rate": dc.get("rate", 1.0)}
        if "window" in dc:
            kw["window"] = tuple(dc["window"])
        ps = dif.generate_point_set(dc.get("provenance", "LATTICE"), dc.get("L", 10_000.0),
                                    ctx["seed"], **kw)
    Z = dc.get("Z", min(500.0, ps.L / 2))
    ac = dif.patterson_autocorrelation(ps, Z)
    spec = dif.diffraction(ac, k_max=dc.get("k_max", 4.0))
    out = {"point_set": ps.describe(), "Z": Z, "taper": "cubic-bspline",
           "boundary": ac.boundary, "atoms": len(ac.z), "zero_weight": ac.weight_at(0.0),
           "spectrum": spec.to_dict()}
    if dc.get("gamma_check", False):
        phi = dif.TestFunction(dif.BumpKind.TRIANGLE, dc.get("radius", 0.5))
        out["gamma_residual"] = dif.gamma_identity_check(ps, phi).residual
    return out, {"autocorrelation.csv": ac.to_csv(), "diffraction.csv": spec.to_csv()}


_RUNNERS = {"profile": _profile_diag, "ap-scan": _ap_scan_diag, "spectrum": _spectrum_diag,
            "verdict": _verdict_diag, "diffraction": _diffraction_diag,
            "equiv-suite": _equiv_diag, "periods": _periods_diag}


def _context(cfg):
    grid = cfg.get("grid", {})
    samp = cfg.get("sampling", {})
    sp = cfg.get("spectrum", {})
    return {"seed": cfg["seed"], "extent": grid.get("extent"),
            "eps_grid": grid.get("eps_grid"), "windows": grid.get("windows"),
            "sampling": {"n": samp.get("n"), "method": samp.get("method", "MONTE_CARLO")},
            "spectrum": {"N": sp.get("N", 4096), "samples": sp.get("samples", 20_000),
                         "exact": sp.get("exact", True)}}


def run(config):
    """Execute the configured diagnostics; ``config`` is a mapping or a path."""
    cfg = load_config(config) if isinstance(config, (str, os.PathLike)) else validate_config(
        dict(config))
    system = None
    if "system" in cfg:
        try:
            system = build_system(cfg["system"])
        except (UnknownSystem, InvalidParameter, TypeError) as exc:
            raise ConfigInvalid(str(exc), ["system"]) from None
    ctx = _context(cfg)
    results, csv, timing = {}, {}, {}
    for diag in cfg.get("diagnostics", []):
        t0 = time.perf_counter()
        try:
            res, series = _RUNNERS[diag](system, cfg, ctx)
        except ApspecError as exc:
            raise type(exc)(f"{diag}: {exc}") if not isinstance(exc, ConfigInvalid) else exc
        timing[diag] = time.perf_counter() - t0
        results[diag] = res
        for name, text in series.items():
            csv[f"{diag}_{name}" if not name.startswith(diag) else name] = text
    body = {"schema_version": SCHEMA_VERSION, "artifact_version": artifact_version(),
            "config": cfg, "config_hash": config_hash(cfg),
            "system": None if system is None else system.describe(),
            "results": results}
    return RunReport(jsonable(body), csv, timing)


# ---------------------------------------------------------------------------
# comparing reports


@dataclass
class DiffEntry:
    path: str
    a: object
    b: object
    tolerance: float | None
    ok: bool

    def to_dict(self):
        return {"path": self.path, "a": self.a, "b": self.b, "tolerance": self.tolerance,
                "ok": self.ok}


@dataclass
class DiffSummary:
    """Field-wise differences.

    ``ok`` is True or False for fields with a tolerance (Monte Carlo
    profiles) and for non-numeric fields, and None for numeric fields
    that carry no standard error.
    """

    entries: list

    @property
    def clean(self):
        return not self.failures

    @property
    def failures(self):
        return [e for e in self.entries if e.ok is False]

    @property
    def unchecked(self):
        return [e for e in self.entries if e.ok is None]

    def to_dict(self):
        return {"clean": self.clean, "n_differences": len(self.entries),
                "n_failures": len(self.failures),
                "n_unchecked": len(self.unchecked),
                "entries": [e.to_dict() for e in self.entries]}


_SKIP = {"config_hash", "seed", "artifact_version"}


def compare(report_a, report_b, k=6.0):
    """Diff two report bodies.

    Values of a profile (``re``/``im`` next to a ``stderr`` array) may
    differ by ``k * sqrt(se_a^2 + se_b^2)`` plus a rounding floor. Other differing numbers are
    listed as unchecked; differing labels, shapes or keys are failures.
    Seed bookkeeping is ignored.
    """
    a, b = body_of(report_a), body_of(report_b)
    if a.get("schema_version") != b.get("schema_version"):
        raise SchemaMismatch(f"schema versions {a.get('schema_version')} and "
                             f"{b.get('schema_version')} differ")
    sections = []
    if a.get("system") != b.get("system"):
        sections.append("system")
    ra, rb = a.get("results", {}), b.get("results", {})
    sections += sorted(f"results/{s}" for s in set(ra) ^ set(rb))
    if sections:
        raise SchemaSectionMismatch(sections)
    entries = []
    _walk(ra, rb, "results", entries, k)
    return DiffSummary(entries)


def _walk(a, b, path, out, k):
    if isinstance(a, dict) and isinstance(b, dict):
        if "stderr" in a and "re" in a and "stderr" in b and "re" in b:
            _profile_diff(a, b, path, out, k)
            rest = {kk for kk in set(a) | set(b) if kk not in ("re", "im", "stderr")}
        else:
            rest = set(a) | set(b)
        for key in sorted(rest):
            sub = f"{path}/{key}"
            if key not in a or key not in b:
                out.append(DiffEntry(sub, a.get(key), b.get(key), None, False))
            else:
                _walk(a[key], b[key], sub, out, k)
        return
    if isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        for i, (x, y) in enumerate(zip(a, b)):
            _walk(x, y, f"{path}/{i}", out, k)
        return
    if a != b:
        leaf = path.rsplit("/", 1)[-1]
        numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (a, b))
        out.append(DiffEntry(path, a, b, None, True if leaf in _SKIP else
                             (None if numeric else False)))


def _profile_diff(a, b, path, out, k):
    se = np.hypot(np.asarray(a["stderr"], float), np.asarray(b["stderr"], float))
    for part in ("re", "im"):
        va, vb = np.asarray(a[part], float), np.asarray(b[part], float)
        if va.shape != vb.shape:
            out.append(DiffEntry(f"{path}/{part}", len(va), len(vb), None, False))
            continue
        d = np.abs(va - vb)
        if not np.any(d):
            continue
        tol = k * se + 1e-12 * np.maximum(1.0, np.maximum(np.abs(va), np.abs(vb)))
        worst = int(np.argmax(d - tol))
        out.append(DiffEntry(f"{path}/{part}", float(va[worst]), float(vb[worst]),
                             float(tol[worst]), bool(np.all(d <= tol))))


__all__ = ["CONFIG_SCHEMA", "DIAGNOSTICS", "validate_config", "load_config", "run", "RunReport",
           "compare", "DiffSummary", "DiffEntry", "config_hash", "jsonable", "body_of"]
