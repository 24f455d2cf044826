"""Averaged displacement functions on a grid of group elements.

All profiles of one call share a single sample ``{x_i}`` of the invariant
measure (common random numbers), so identities between them hold exactly
for the empirical measure rather than only in expectation.

For every system the sweep evaluates non-negative group elements only and
extends to negative ones by symmetry: ``e(-t) = e(t)`` for averaged
pseudometrics and displacements, ``S(-t) = conj(S(t))`` for
autocorrelations. For invertible systems this reuses ``e(x_i, t x_i)``; for
the non-invertible doubling map it is the stationarity extension. Profiles
record this in ``mirrored``.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (EmptyFamily, GroupMismatch, InvalidParameter, PrecisionWarning,
                     SampleFailure, UnsupportedMethod)
from .metrics import Pseudometric, WeightedFamily
from .systems import GroupKind, on_grid

STDERR_WARN = 1e-3
DEFAULT_MC = 100_000
DEFAULT_QUADRATURE = 10_000
BATCHES = 20


class Method(str, Enum):
    MONTE_CARLO = "MONTE_CARLO"
    QUADRATURE = "QUADRATURE"
    BIRKHOFF = "BIRKHOFF"
    EXACT = "EXACT"


@dataclass(frozen=True, eq=False)
class GroupGrid:
    """Sorted grid ``index * step`` of group elements, containing 0."""

    kind: GroupKind
    index: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        idx = np.asarray(self.index, dtype=np.int64)
        if len(idx) == 0 or np.any(np.diff(idx) <= 0):
            raise InvalidParameter("grid must be non-empty and strictly increasing")
        if not np.any(idx == 0):
            raise InvalidParameter("grid must contain 0")
        idx.flags.writeable = False
        object.__setattr__(self, "index", idx)

    @classmethod
    def symmetric(cls, system, extent=None):
        """``{-E, ..., E}`` in grid steps (``E`` defaults to the system's extent)."""
        extent = int(system.default_extent if extent is None else extent)
        if extent < 1:
            raise InvalidParameter("extent must be positive")
        return cls(system.group_kind, np.arange(-extent, extent + 1), system.step)

    @classmethod
    def from_values(cls, system, values):
        idx = []
        for v in values:
            k = on_grid(float(v), system.step)
            if k is None or (system.group_kind == GroupKind.INTEGER and float(v) != int(v)):
                raise GroupMismatch(f"{v!r} is not a group element of {system.name}")
            idx.append(k)
        return cls(system.group_kind, np.unique(np.array(idx + [0], dtype=np.int64)), system.step)

    @property
    def values(self):
        return self.index * self.step if self.kind == GroupKind.REAL_SAMPLED else self.index.copy()

    @property
    def extent(self):
        return int(np.abs(self.index).max())

    def __len__(self):
        return len(self.index)

    def same_as(self, other):
        return (self.kind == other.kind and self.step == other.step
                and np.array_equal(self.index, other.index))

    def position(self, k):
        """Array position of grid index ``k``."""
        i = int(np.searchsorted(self.index, k))
        if i >= len(self.index) or self.index[i] != k:
            raise GroupMismatch(f"grid index {k} is not on the grid")
        return i

    def element(self, k):
        return k * self.step if self.kind == GroupKind.REAL_SAMPLED else int(k)

    def check_system(self, system):
        if (self.kind, self.step) != (system.group_kind, system.step):
            raise GroupMismatch(f"grid of kind {self.kind.value} (step {self.step}) does not match "
                                f"{system.name}")

    def to_dict(self):
        return {"kind": self.kind.value, "step": self.step,
                "min": int(self.index[0]), "max": int(self.index[-1]), "size": len(self)}


@dataclass(frozen=True, eq=False)
class Profile:
    """A function on a grid with per-point standard errors and provenance."""

    name: str
    kind: str
    grid: GroupGrid
    values: np.ndarray
    stderr: np.ndarray
    method: Method
    sample_size: int
    seed: object
    real: bool = True
    mirrored: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float if self.real else complex)
        se = np.asarray(self.stderr, dtype=float)
        if vals.shape != (len(self.grid),) or se.shape != vals.shape:
            raise InvalidParameter("values and stderr must match the grid")
        if np.any(se < 0):
            raise InvalidParameter("negative standard error")
        vals.flags.writeable = False
        se.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "stderr", se)

    def __len__(self):
        return len(self.grid)

    @property
    def t(self):
        return self.grid.values

    def at(self, t):
        k = on_grid(float(t), self.grid.step)
        if k is None:
            raise GroupMismatch(f"{t!r} is not on the grid")
        return self.values[self.grid.position(k)]

    def stderr_at(self, t):
        return self.stderr[self.grid.position(on_grid(float(t), self.grid.step))]

    def restrict(self, extent):
        """Sub-profile on ``|index| <= extent``."""
        keep = np.abs(self.grid.index) <= extent
        grid = GroupGrid(self.grid.kind, self.grid.index[keep], self.grid.step)
        return Profile(self.name, self.kind, grid, self.values[keep], self.stderr[keep],
                       self.method, self.sample_size, self.seed, self.real, self.mirrored,
                       dict(self.meta))

    def with_values(self, values, stderr=None, name=None, kind=None, real=None):
        return Profile(name or self.name, kind or self.kind, self.grid, values,
                       self.stderr if stderr is None else stderr, self.method, self.sample_size,
                       self.seed, self.real if real is None else real, self.mirrored,
                       dict(self.meta))

    def provenance(self):
        return {"name": self.name, "kind": self.kind, "method": self.method.value,
                "sample_size": self.sample_size, "seed": _seed_repr(self.seed),
                "mirrored": self.mirrored, "grid": self.grid.to_dict(), **self.meta}

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im", "stderr"])
        vals = self.values.astype(complex)
        for t, v, s in zip(self.t, vals, self.stderr):
            w.writerow([repr(float(t)) if self.grid.kind == GroupKind.REAL_SAMPLED else int(t),
                        repr(float(v.real)), repr(float(v.imag)), repr(float(s))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        vals = self.values.astype(complex)
        return {"provenance": self.provenance(), "t": self.t.tolist(),
                "re": vals.real.tolist(), "im": vals.imag.tolist(),
                "stderr": self.stderr.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        prov = dict(data["provenance"])
        g = prov.pop("grid")
        grid = GroupGrid(GroupKind(g["kind"]), np.arange(g["min"], g["max"] + 1), g["step"])
        if len(grid) != len(data["t"]):
            grid = GroupGrid(GroupKind(g["kind"]),
                             np.rint(np.asarray(data["t"]) / g["step"]).astype(np.int64), g["step"])
        im = np.asarray(data["im"])
        real = not np.any(im)
        vals = np.asarray(data["re"]) + (0 if real else 1j * im)
        name, kind = prov.pop("name"), prov.pop("kind")
        method, n, seed = Method(prov.pop("method")), prov.pop("sample_size"), prov.pop("seed")
        mirrored = prov.pop("mirrored")
        return cls(name, kind, grid, vals, data["stderr"], method, n, seed, real, mirrored, prov)


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": str(seed.entropy), "spawn_key": list(seed.spawn_key)}
    return seed


# ---------------------------------------------------------------------------
# the shared-sample sweep


@dataclass
class ProfileSet:
    """Profiles produced together from one sample."""

    grid: GroupGrid
    method: Method
    sample_size: int
    seed: object
    d_bar: Profile | None = None
    e_bar: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)
    S: dict = field(default_factory=dict)
    norm_sq: dict = field(default_factory=dict)
    norm_sq_plain: dict = field(default_factory=dict)
    e_family: Profile | None = None
    F_family: Profile | None = None


def draw_sample(system, method=Method.MONTE_CARLO, n=None, seed=0):
    """Sample points for ``method``; returns ``(points, n)``."""
    method = Method(method)
    if method == Method.QUADRATURE:
        n = DEFAULT_QUADRATURE if n is None else int(n)
        pts = system.quadrature(n)
    elif method == Method.BIRKHOFF:
        n = DEFAULT_MC if n is None else int(n)
        pts = system.orbit_sample(seed, n)
    elif method == Method.MONTE_CARLO:
        n = DEFAULT_MC if n is None else int(n)
        pts = system.sample(seed, n)
    else:
        raise UnsupportedMethod(f"{method.value} does not draw samples")
    if n < 2 or len(pts) != n:
        raise SampleFailure(f"sampler returned {len(pts)} points, expected {n} (need at least 2)")
    return pts, n


def _mean_se(a, method):
    """Mean of a sample and its standard error (batch means along an orbit)."""
    n = len(a)
    total = a.sum()
    m = total / n
    if method == Method.QUADRATURE:
        return m, 0.0
    if method == Method.BIRKHOFF:
        b = a[: n - n % BATCHES].reshape(BATCHES, -1).mean(axis=1)
        return m, float(np.sqrt(np.sum(np.abs(b - b.mean()) ** 2) / (BATCHES - 1) / BATCHES))
    r = a - m
    v = np.vdot(r, r).real / (n - 1)
    return m, float(np.sqrt(v / n))


def _sqrt_se(mean_sq, se_sq):
    """Standard error of ``sqrt(m)`` from that of ``m`` (delta method, capped)."""
    if mean_sq <= 0:
        return 0.0
    return float(min(se_sq / (2.0 * np.sqrt(mean_sq)), np.sqrt(se_sq)))


def compute_profiles(system, grid=None, *, observables=(), family=None, metric=True,
                     method=Method.MONTE_CARLO, n=None, seed=0, extent=None):
    """Evaluate ``d_bar``, and ``e_bar_f``, ``F_f``, ``S_f`` for each observable, on one sample.

    ``family`` (a :class:`WeightedFamily`) adds ``e_bar`` and ``F`` of the
    weighted family; its members are evaluated alongside ``observables``.
    """
    method = Method(method)
    if grid is None:
        grid = GroupGrid.symmetric(system, extent)
    grid.check_system(system)
    obs = list(observables)
    names = [f.name for f in obs]
    if family is not None:
        for f in family.observables:
            if f.name not in names:
                obs.append(f)
                names.append(f.name)
    x, n = draw_sample(system, method, n, seed)
    f0 = [f(x) for f in obs]

    ks = np.unique(np.abs(grid.index))
    m = len(ks)
    d_vals, d_se = np.zeros(m), np.zeros(m)
    e_vals, e_se = np.zeros((len(obs), m)), np.zeros((len(obs), m))
    F_vals, F_se = np.zeros((len(obs), m)), np.zeros((len(obs), m))
    S_vals = np.zeros((len(obs), m), dtype=complex)
    S_se = np.zeros((len(obs), m))
    nsq, nsq_plain = np.zeros((len(obs), m)), np.zeros(len(obs))
    fam_e_vals, fam_e_se = np.zeros(m), np.zeros(m)
    fam_F_vals, fam_F_se = np.zeros(m), np.zeros(m)
    fam_w = {}
    if family is not None:
        fam_w = {f.name: c for c, f in family}

    for j, fv in enumerate(f0):
        nsq_plain[j] = float(np.mean(np.abs(fv) ** 2))

    for i, k in enumerate(ks):
        t = system.group_value(grid.element(k))
        if metric:
            if k == 0:
                d = np.zeros(n)
            else:
                d = system.displacement(x, t)
            d_vals[i], d_se[i] = _mean_se(d, method)
        if not obs:
            continue
        xt = system._act(t, x) if k else x
        fam_sum = np.zeros(n) if family is not None else None
        for j, f in enumerate(obs):
            ft = f(xt) if k else f0[j]
            diff = np.abs(f0[j] - ft)
            e_vals[j, i], e_se[j, i] = _mean_se(diff, method)
            sq = diff * diff
            msq, sq_se = _mean_se(sq, method)
            F_vals[j, i] = np.sqrt(msq)
            F_se[j, i] = _sqrt_se(msq, sq_se)
            prod = f0[j] * ft if not np.iscomplexobj(f0[j]) else np.conj(f0[j]) * ft
            S_vals[j, i], S_se[j, i] = _mean_se(prod, method)
            nsq[j, i] = 0.5 * (nsq_plain[j] + float(np.mean(np.abs(ft) ** 2)))
            if fam_sum is not None and f.name in fam_w:
                fam_sum += fam_w[f.name] * diff
        if family is not None:
            fam_e_vals[i], fam_e_se[i] = _mean_se(fam_sum, method)

    if family is not None:
        for j, f in enumerate(obs):
            if f.name in fam_w:
                fam_F_vals += fam_w[f.name] * F_vals[j]
                fam_F_se += fam_w[f.name] * F_se[j]

    # scatter |t| results back onto the (possibly signed) grid
    pos = np.searchsorted(ks, np.abs(grid.index))
    neg = grid.index < 0
    base = dict(grid=grid, method=method, sample_size=n, seed=seed, mirrored=bool(neg.any()))

    def real_profile(name, kind, vals, se, meta=None):
        return Profile(name, kind, values=vals[pos], stderr=se[pos], real=True,
                       meta=meta or {}, **base)

    def cplx_profile(name, vals, se, meta=None):
        v = vals[pos]
        v = np.where(neg, np.conj(v), v)
        # S(0) is a mean of |f|^2: exactly real
        v[grid.index == 0] = v[grid.index == 0].real
        return Profile(name, "S", values=v, stderr=se[pos], real=False, meta=meta or {}, **base)

    out = ProfileSet(grid, method, n, seed)
    if metric:
        out.d_bar = real_profile("d_bar", "e_bar", d_vals, d_se, {"pseudometric": "d"})
    for j, f in enumerate(obs):
        meta = {"observable": f.name, "sup_norm": f.sup_norm}
        out.e_bar[f.name] = real_profile(f"e_bar[{f.name}]", "e_bar", e_vals[j], e_se[j], meta)
        out.F[f.name] = real_profile(f"F[{f.name}]", "F", F_vals[j], F_se[j], meta)
        out.S[f.name] = cplx_profile(f"S[{f.name}]", S_vals[j], S_se[j], meta)
        out.norm_sq[f.name] = nsq[j][pos]
        out.norm_sq_plain[f.name] = nsq_plain[j]
    if family is not None:
        meta = {"family": family.describe()}
        out.e_family = real_profile("e_bar[family]", "e_bar", fam_e_vals, fam_e_se, meta)
        out.F_family = real_profile("F[family]", "F", fam_F_vals, fam_F_se, meta)
    _warn_precision(out)
    return out


def _warn_precision(ps):
    profiles = [ps.d_bar, ps.e_family, ps.F_family, *ps.e_bar.values(), *ps.F.values(),
                *ps.S.values()]
    worst = max((float(p.stderr.max()), p.name) for p in profiles if p is not None)
    if worst[0] > STDERR_WARN:
        warnings.warn(f"largest standard error {worst[0]:.2e} (in {worst[1]}) exceeds "
                      f"{STDERR_WARN:g}; increase the sample size for tighter estimates",
                      PrecisionWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# single-profile entry points


def average_pseudometric(system, e, grid=None, *, method=Method.MONTE_CARLO, n=None, seed=0,
                         extent=None):
    """``e_bar(t) = int e(x, tx) dm(x)`` estimated on a shared sample."""
    if isinstance(e, Pseudometric) and not e.is_metric:
        fam = WeightedFamily([f for _, f in e.components], [c for c, _ in e.components])
        ps = compute_profiles(system, grid, family=fam, metric=False, method=method, n=n,
                              seed=seed, extent=extent)
        p = ps.e_family
        return p.with_values(p.values, name=f"e_bar[{e.name}]")
    ps = compute_profiles(system, grid, metric=True, method=method, n=n, seed=seed, extent=extent)
    return ps.d_bar


def displacement_profile(system, f, grid=None, **opts):
    """``F_f(t) = ||f - T_t f||``."""
    return compute_profiles(system, grid, observables=[f], metric=False, **opts).F[f.name]


def autocorrelation_profile(system, f, grid=None, *, method=Method.MONTE_CARLO, n=None,
                            seed=0, extent=None):
    """``S_f(t) = <f, T_t f>``; ``method=EXACT`` uses a closed recursion when available."""
    method = Method(method)
    if method == Method.EXACT:
        if grid is None:
            grid = GroupGrid.symmetric(system, extent)
        grid.check_system(system)
        exact = system.exact_autocorrelation(f, grid.extent)
        if exact is None:
            raise UnsupportedMethod(f"no exact autocorrelation for {f.name} on {system.name}")
        vals = np.asarray(exact)[np.abs(grid.index)].astype(complex)
        vals = np.where(grid.index < 0, np.conj(vals), vals)
        return Profile(f"S[{f.name}]", "S", grid, vals, np.zeros(len(grid)), Method.EXACT, 0,
                       None, real=False, mirrored=bool((grid.index < 0).any()),
                       meta={"observable": f.name, "sup_norm": f.sup_norm})
    return compute_profiles(system, grid, observables=[f], metric=False, method=method, n=n,
                            seed=seed, extent=extent).S[f.name]


def summed_displacement(fam, grid=None, *, system, **opts):
    """``F_{(f_n),(c_n)} = sum_n c_n F_{f_n}`` from one shared sample."""
    if fam is None or len(fam) == 0:
        raise EmptyFamily("empty family")
    return compute_profiles(system, grid, family=fam, metric=False, **opts).F_family


def two_variable_profile(source, s, t, e=None, **opts):
    """``e'(s, t) = e_bar(s - t)``.

    ``source`` is either a precomputed ``e_bar`` Profile or a system (then
    ``e`` is required and ``e_bar`` is evaluated at ``s - t``).
    """
    if isinstance(source, Profile):
        return float(np.real(source.at(s - t)))
    system = source
    u = abs(system.group_value(s) - system.group_value(t))
    prof = average_pseudometric(system, e, GroupGrid.from_values(system, [u]), **opts)
    return float(prof.at(u))


__all__ = ["Method", "GroupGrid", "Profile", "ProfileSet", "compute_profiles", "draw_sample",
           "average_pseudometric", "displacement_profile", "autocorrelation_profile",
           "summed_displacement", "two_variable_profile"]
