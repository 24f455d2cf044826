"""Spectral measures from autocorrelations, eigenvalue groups and verdicts.

For ``G = Z`` an autocorrelation ``S_f(n) = <f, T_n f>`` is the Fourier
transform of the spectral measure ``mu_f``:
``S_f(n) = int e^{2 pi i beta n} d mu_f(beta)``. Atoms of ``mu_f`` are the
Fourier-Bohr means of ``S_f`` and the Cesaro mean of ``|S_f|^2`` converges
to the sum of the squared atom masses.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import almost_periodic as ap
from .errors import NonSeparatingFamily, UnsupportedGroup, WindowTooSmall
from .metrics import weighted_pseudometric
from .profiles import GroupGrid, Method, Profile, compute_profiles, autocorrelation_profile
from .systems import GroupKind

PURE_POINT = "PURE_POINT_CONSISTENT"
CONTINUOUS = "CONTINUOUS_CONSISTENT"
MIXED = "MIXED"
INCONCLUSIVE = "INCONCLUSIVE"

DISCRETE = "DISCRETE_CONSISTENT"
NOT_DISCRETE = "NOT_DISCRETE"

THETA_FRACTION = 0.05
MIXED_REMAINDER = 0.1
CONTINUOUS_WIENER = 0.01
CLOSURE_LIMIT = 200


# ---------------------------------------------------------------------------
# Wiener mass and atoms


@dataclass
class WienerCurve:
    Ns: np.ndarray
    M: np.ndarray
    M_debiased: np.ndarray
    limit: float
    limit_debiased: float

    def at(self, N):
        return float(self.M[list(self.Ns).index(N)])

    def to_dict(self):
        return {"Ns": self.Ns.tolist(), "M": self.M.tolist(),
                "M_debiased": self.M_debiased.tolist(), "limit": self.limit,
                "limit_debiased": self.limit_debiased}


def _symmetric_span(profile):
    z = profile.grid.position(0)
    idx = profile.grid.index
    E = int(min(-idx[0], idx[-1]))
    if not np.array_equal(idx[z - E:z + E + 1], np.arange(-E, E + 1)):
        raise WindowTooSmall(f"{profile.name} is not sampled contiguously around 0")
    return z, E


def wiener_atom_mass(profile, Ns=None):
    """``M_N = (2N + 1)^{-1} sum_{|n| <= N} |S(n)|^2`` for each ``N``.

    The limit is extrapolated by averaging ``M_N`` over the last decade of
    ``Ns``. ``M_debiased`` subtracts the sampling variance ``stderr(n)^2``
    from each ``|S(n)|^2``.
    """
    z, E = _symmetric_span(profile)
    if Ns is None:
        Ns = np.unique(np.geomspace(8, E, 48).astype(int)) if E >= 8 else np.array([E])
    Ns = np.asarray(sorted({int(N) for N in Ns}))
    if Ns[0] < 1 or Ns[-1] > E:
        raise WindowTooSmall(f"Wiener means up to N={Ns[-1]} need S on [-{Ns[-1]}, {Ns[-1]}]")
    sq = np.abs(profile.values[z - E:z + E + 1]) ** 2
    sq_db = sq - profile.stderr[z - E:z + E + 1] ** 2
    c = np.concatenate([[0.0], np.cumsum(sq)])
    c_db = np.concatenate([[0.0], np.cumsum(sq_db)])
    lo, hi = E - Ns, E + Ns + 1
    M = (c[hi] - c[lo]) / (2 * Ns + 1)
    M_db = (c_db[hi] - c_db[lo]) / (2 * Ns + 1)
    last = Ns >= Ns[-1] / 10
    return WienerCurve(Ns, M, M_db, float(M[last].mean()), float(M_db[last].mean()))


@dataclass
class Atom:
    beta: float
    mass: float
    stderr: float

    def to_dict(self):
        return {"beta": self.beta, "mass": self.mass, "stderr": self.stderr}


def extract_atoms(profile, N=None, theta=None, taper="hann"):
    """Atoms ``(beta, |c_beta(S)|)`` above ``theta`` (default ``0.05 S(0)``)."""
    s0 = float(np.real(profile.at(0)))
    theta = THETA_FRACTION * s0 if theta is None else float(theta)
    if s0 <= 0:
        return []
    fs = ap.fourier_bohr_coefficients(profile, N=N, theta=theta, taper=taper)
    z, _ = _symmetric_span(profile)
    w = ap._window(fs.N, taper)
    se = profile.stderr[z - fs.N:z + fs.N + 1]
    mass_se = float(np.sqrt(np.sum((w * se) ** 2)) / w.sum())
    return [Atom(float(b), float(abs(c)), mass_se) for b, c in zip(fs.betas, fs.coefficients)]


@dataclass
class SpectralEstimate:
    """Atoms, Wiener mass and the atomic/continuous split of ``mu_f``."""

    observable: str
    s0: float
    wiener: WienerCurve
    atoms: list
    theta: float
    N: int
    verdict: str
    profile: Profile | None = field(default=None, repr=False)
    autocorrelation_ap: str | None = None

    @property
    def atomic_mass(self):
        return float(sum(a.mass for a in self.atoms))

    @property
    def atomic_mass_sq(self):
        return float(sum(a.mass ** 2 for a in self.atoms))

    @property
    def continuous_remainder(self):
        """Total mass ``S(0)`` minus the detected atomic mass."""
        return max(self.s0 - self.atomic_mass, 0.0)

    def nonzero_atoms(self, resolution=None):
        step = 1.0 if self.profile is None else self.profile.grid.step
        res = 1.0 / (2 * self.N * step) if resolution is None else resolution
        if self.profile is not None and self.profile.grid.kind == GroupKind.REAL_SAMPLED:
            return [a for a in self.atoms if abs(a.beta) > res]
        return [a for a in self.atoms if min(a.beta % 1.0, 1 - a.beta % 1.0) > res]

    def to_dict(self):
        return {"observable": self.observable, "s0": self.s0, "N": self.N, "theta": self.theta,
                "atoms": [a.to_dict() for a in self.atoms], "atomic_mass": self.atomic_mass,
                "atomic_mass_sq": self.atomic_mass_sq,
                "continuous_remainder": self.continuous_remainder,
                "wiener": self.wiener.to_dict(), "autocorrelation_ap": self.autocorrelation_ap,
                "verdict": self.verdict}

    def atoms_csv(self):
        lines = ["beta,mass,stderr"]
        lines += [f"{float(a.beta)!r},{float(a.mass)!r},{float(a.stderr)!r}" for a in self.atoms]
        return "\n".join(lines) + "\n"


def estimate_spectrum(profile, N=None, theta=None, Ns=None):
    """Classify ``mu_f`` from an autocorrelation profile.

    * pure point: atoms found, and either ``S(0) - sum m_beta <= 0.1 S(0)``
      or ``S`` itself passes the almost-periodicity scan (many atoms below
      ``theta`` leave a large remainder although no continuous part exists);
    * mixed: atoms found otherwise;
    * continuous: no atom above ``theta`` and Wiener mass at most ``0.01 S(0)^2``.
    """
    _, E = _symmetric_span(profile)
    N = E if N is None else int(N)
    s0 = float(np.real(profile.at(0)))
    theta = THETA_FRACTION * s0 if theta is None else float(theta)
    wiener = wiener_atom_mass(profile, Ns if Ns is not None else
                              np.unique(np.geomspace(8, N, 48).astype(int)))
    atoms = extract_atoms(profile, N=N, theta=theta)
    remainder = max(s0 - sum(a.mass for a in atoms), 0.0)
    s_ap = None
    if atoms and remainder > MIXED_REMAINDER * s0 and N >= 16:
        s_ap = ap.scan_almost_periods(ap.translation_defect(profile.restrict(N))).verdict
    if s0 <= 1e-15:
        verdict = PURE_POINT
    elif atoms and (remainder <= MIXED_REMAINDER * s0 or s_ap == ap.AP):
        verdict = PURE_POINT
    elif atoms:
        verdict = MIXED
    elif wiener.limit_debiased <= CONTINUOUS_WIENER * s0 ** 2:
        verdict = CONTINUOUS
    else:
        verdict = INCONCLUSIVE
    return SpectralEstimate(profile.meta.get("observable", profile.name), s0, wiener, atoms,
                            theta, N, verdict, profile, s_ap)


def observable_spectrum(system, f, N=4096, *, n=20_000, seed=0, method=Method.MONTE_CARLO,
                        exact=True):
    """Autocorrelation of ``f`` on ``[-N, N]`` and its :class:`SpectralEstimate`.

    Uses the exact autocorrelation recursion when the system provides one
    and ``exact`` is set.
    """
    grid = GroupGrid.symmetric(system, N)
    if exact and system.exact_autocorrelation(f, 1) is not None:
        S = autocorrelation_profile(system, f, grid, method=Method.EXACT)
    else:
        S = autocorrelation_profile(system, f, grid, method=method, n=n, seed=seed)
    return estimate_spectrum(S)


def gram_min_eigenvalue(profile, points):
    """Smallest eigenvalue of ``[S(t_i - t_j)]`` (positive-definiteness spot check)."""
    pts = list(points)
    G = np.array([[profile.at(a - b) for b in pts] for a in pts], dtype=complex)
    # S(t_i - t_j) = conj(S(t_j - t_i)) makes G Hermitian
    return float(np.linalg.eigvalsh(0.5 * (G + G.conj().T)).min())


# ---------------------------------------------------------------------------
# eigenvalue groups


@dataclass
class EigenvalueGroupEstimate:
    """A finite piece of the group generated by detected frequencies."""

    generators: list
    elements: list
    source: str
    resolution: float
    group_kind: GroupKind = GroupKind.INTEGER

    def contains(self, beta, tol=None):
        tol = self.resolution if tol is None else tol
        for e in self.elements:
            d = abs(e - beta)
            if self.group_kind == GroupKind.INTEGER:
                d = d % 1.0
                d = min(d, 1 - d)
            if d <= tol:
                return True
        return False

    def to_dict(self):
        return {"generators": self.generators, "elements": self.elements, "source": self.source,
                "resolution": self.resolution, "group_kind": self.group_kind.value}


def generate_group(generators, resolution, source, group_kind=GroupKind.INTEGER,
                   limit=CLOSURE_LIMIT, bound=None):
    """Close ``{0} ∪ ±generators`` under addition (mod 1 on Z), breadth first.

    Stops before exceeding ``limit`` elements; elements closer than ``resolution`` are
    identified. On the sampled real line elements beyond ``bound`` (the
    Nyquist frequency) are dropped.
    """
    mod = group_kind == GroupKind.INTEGER

    def norm(b):
        return b % 1.0 if mod else b

    def close(a, b):
        d = abs(a - b)
        if mod:
            d = min(d % 1.0, 1 - d % 1.0)
        return d <= resolution

    gens = []
    for g in generators:
        for s in (g, -g):
            v = norm(s)
            if not close(v, 0.0) and not any(close(v, h) for h in gens):
                gens.append(v)
    # elements enter in pairs {v, -v} so every truncation stays closed under negation
    elements, frontier = [0.0], [0.0]
    full = False
    while frontier and not full:
        nxt = []
        for e in frontier:
            for g in gens:
                v = norm(e + g)
                if bound is not None and abs(v) > bound:
                    continue
                if any(close(v, u) for u in elements):
                    continue
                pair = [v] if close(v, norm(-v)) else [v, norm(-v)]
                if len(elements) + len(pair) > limit:
                    full = True
                    break
                elements.extend(pair)
                nxt.extend(pair)
            if full:
                break
        frontier = nxt
    return EigenvalueGroupEstimate([float(g) for g in generators], [float(e) for e in elements],
                                   source, float(resolution), group_kind)


# ---------------------------------------------------------------------------
# main verdict


@dataclass
class VerdictOptions:
    n_samples: int = 100_000
    extent: int | None = None
    method: str = "MONTE_CARLO"
    seed: int = 0
    eps_grid: list | None = None
    windows: list | None = None
    fb_N: int | None = None
    spectral_N: int = 4096
    spectral_samples: int = 20_000
    exact: bool = True

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Verdict:
    system: str
    label: str
    ap_report: ap.AlmostPeriodReport
    frequencies: ap.FrequencySet | None
    group: EigenvalueGroupEstimate | None
    observable_group: EigenvalueGroupEstimate | None
    spectra: dict
    options: VerdictOptions
    d_bar: Profile = field(repr=False)

    @property
    def witness_eps(self):
        return self.ap_report.witness_eps

    def per_observable(self):
        return {k: v.verdict for k, v in self.spectra.items()}

    def to_dict(self):
        return {"system": self.system, "verdict": self.label,
                "ap_report": self.ap_report.to_dict(),
                "frequencies": None if self.frequencies is None else self.frequencies.to_dict(),
                "eigenvalue_group": None if self.group is None else self.group.to_dict(),
                "observable_group": (None if self.observable_group is None
                                     else self.observable_group.to_dict()),
                "spectra": {k: v.to_dict() for k, v in self.spectra.items()},
                "options": self.options.to_dict()}


def discrete_spectrum_verdict(system, opts=None, **kw):
    """Decide discrete spectrum from almost periodicity of ``d_bar``.

    ``DISCRETE_CONSISTENT`` when ``d_bar`` passes the almost-periodicity
    scan, with the eigenvalue group generated by its Fourier-Bohr
    frequencies. When the scan witnesses non-almost-periodicity the verdict
    is ``MIXED`` if some observable still shows an atom away from 0, else
    ``NOT_DISCRETE``. Per-observable spectral estimates are attached.
    """
    opts = opts or VerdictOptions(**kw)
    ps = compute_profiles(system, metric=True, method=opts.method, n=opts.n_samples,
                          seed=opts.seed, extent=opts.extent)
    d_bar = ps.d_bar
    rep = ap.scan_almost_periods(d_bar, opts.eps_grid, opts.windows)

    spectra = {}
    for name in system.spectral_observables():
        f = system.observable(name)
        spectra[name] = observable_spectrum(system, f, opts.spectral_N, n=opts.spectral_samples,
                                            seed=opts.seed, exact=opts.exact)
    kind = system.group_kind
    obs_gens = sorted({round(a.beta, 12) for est in spectra.values() for a in est.nonzero_atoms()})
    obs_group = None
    if spectra:
        res = 1.0 / (2 * opts.spectral_N * system.step)
        obs_group = generate_group(obs_gens, res, "FROM_OBSERVABLES", kind,
                                   bound=None if kind == GroupKind.INTEGER else 0.5 / system.step)

    freqs, group = None, None
    if rep.verdict == ap.AP:
        label = DISCRETE
        freqs = ap.fourier_bohr_coefficients(d_bar, N=opts.fb_N)
        res = freqs.resolution
        gens = [float(b) for b in freqs.betas
                if (min(b % 1.0, 1 - b % 1.0) if kind == GroupKind.INTEGER else abs(b)) > res]
        group = generate_group(gens, res, "FROM_D_UNDERLINE", kind,
                               bound=None if kind == GroupKind.INTEGER else 0.5 / system.step)
    elif rep.verdict == ap.NOT_AP:
        has_atoms = any(est.nonzero_atoms() for est in spectra.values())
        label = MIXED if has_atoms else NOT_DISCRETE
    else:
        label = INCONCLUSIVE
    return Verdict(system.name, label, rep, freqs, group, obs_group, spectra, opts, d_bar)


# ---------------------------------------------------------------------------
# equivalence matrix


@dataclass
class EquivalenceMatrix:
    """AP verdicts of each equivalent notion; per-member rows plus aggregates."""

    system: str
    rows: dict
    notions: dict
    agree: bool
    separates: bool | None
    members: list

    def to_dict(self):
        return {"system": self.system, "rows": self.rows, "notions": self.notions,
                "agree": self.agree, "separates": self.separates, "members": self.members}


def _aggregate(verdicts):
    if verdicts and all(v == ap.AP for v in verdicts):
        return ap.AP
    if any(v == ap.NOT_AP for v in verdicts):
        return ap.NOT_AP
    return ap.INCONCLUSIVE


def cross_equivalence_suite(system, family=None, *, n=20_000, extent=None, seed=0,
                            method=Method.MONTE_CARLO, max_members=5, eps_grid=None,
                            windows=None):
    """AP verdicts of ``d_bar``, ``e_bar_f``, ``F_f``, the weighted family
    versions and ``S_f`` (through its translation defect).

    Per-member notions are evaluated on the ``max_members`` highest-weight
    members plus the system's spectral observables; the family aggregates use
    every member. A notion holds for the family when it holds for every
    evaluated member.
    """
    fam = family or system.family()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonSeparatingFamily)
        pm = weighted_pseudometric(fam, system, seed=seed)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    order = sorted(range(len(fam)), key=lambda i: -fam.weights[i] * fam.observables[i].sup_norm)
    members = [fam.observables[i] for i in order[:max_members]]
    names = {f.name for f in members}
    for name in system.spectral_observables():
        if name not in names:
            members.append(system.observable(name))
            names.add(name)
    ps = compute_profiles(system, observables=members, family=fam, metric=True, method=method,
                          n=n, seed=seed, extent=extent)

    def scan(p):
        return ap.scan_almost_periods(p, eps_grid, windows).verdict

    rows = {"d_bar": scan(ps.d_bar)}
    e_rows, F_rows, S_rows = [], [], []
    for f in members:
        rows[f"e_bar[{f.name}]"] = v1 = scan(ps.e_bar[f.name])
        rows[f"F[{f.name}]"] = v2 = scan(ps.F[f.name])
        defect = ap.translation_defect(ps.S[f.name])
        rows[f"S[{f.name}]"] = v3 = ap.scan_almost_periods(defect).verdict
        e_rows.append(v1)
        F_rows.append(v2)
        S_rows.append(v3)
    rows["e_bar[family]"] = scan(ps.e_family)
    rows["F[family]"] = scan(ps.F_family)
    notions = {"d_bar": rows["d_bar"], "e_bar_f": _aggregate(e_rows), "F_f": _aggregate(F_rows),
               "e_bar_family": rows["e_bar[family]"], "F_family": rows["F[family]"],
               "S_f": _aggregate(S_rows)}
    agree = len(set(notions.values())) == 1
    return EquivalenceMatrix(system.name, rows, notions, agree, pm.separates,
                             [f.name for f in members])


# ---------------------------------------------------------------------------
# N^f consistency


@dataclass
class NFResult:
    lhs: complex
    rhs: complex
    residual: float
    bound: float
    consistent: bool
    riemann: bool = False

    def to_dict(self):
        return {"lhs": [self.lhs.real, self.lhs.imag], "rhs": [self.rhs.real, self.rhs.imag],
                "residual": self.residual, "bound": self.bound, "consistent": self.consistent,
                "riemann": self.riemann}


def _as_support(phi):
    if isinstance(phi, dict):
        items = sorted(phi.items())
    else:
        items = list(phi)
    return np.array([int(a) for a, _ in items], dtype=np.int64), \
        np.array([complex(v) for _, v in items])


def hat_transform(support, values, beta):
    """``phi_hat(beta) = sum_a phi(a) e^{-2 pi i beta a}``."""
    return np.exp(-2j * np.pi * np.outer(np.atleast_1d(beta), support)) @ values


def nf_consistency(estimate, phi, psi, *, allow_riemann=False):
    """Compare ``<N^f phi, N^f psi>`` with its atomic spectral representation.

    ``phi`` and ``psi`` map grid indices to values (dict or ``(index, value)``
    pairs). The left side is ``sum_{a,b} conj(phi(a)) psi(b) S(a - b)``; the
    right side integrates ``conj(phi_hat) psi_hat`` against the atoms of the
    estimate. The residual is bounded by the continuous remainder times
    ``sum|phi| sum|psi|`` plus a statistical allowance.
    """
    S = estimate.profile
    if S.grid.kind == GroupKind.REAL_SAMPLED and not allow_riemann:
        raise UnsupportedGroup("the sampled real line needs Riemann sums; pass allow_riemann=True")
    a, pv = _as_support(phi)
    b, qv = _as_support(psi)
    if len(a) == 0 or len(b) == 0:
        return NFResult(0j, 0j, 0.0, 0.0, True, S.grid.kind == GroupKind.REAL_SAMPLED)
    diff = a[:, None] - b[None, :]
    if np.abs(diff).max() > S.grid.extent:
        raise WindowTooSmall("test function supports exceed the autocorrelation window")
    pos = np.searchsorted(S.grid.index, diff)
    lhs = complex(np.sum(np.conj(pv)[:, None] * qv[None, :] * S.values[pos]))
    step = S.grid.step
    rhs = 0j
    for atom in estimate.atoms:
        # the profile phase is exp(2 pi i beta t), with t = index * step
        ph = hat_transform(a * step, pv, atom.beta)[0]
        ps_ = hat_transform(b * step, qv, atom.beta)[0]
        rhs += atom.mass * np.conj(ph) * ps_
    l1 = float(np.abs(pv).sum() * np.abs(qv).sum())
    stat = l1 * (3.0 * float(S.stderr[pos].max()) + 3.0 * sum(at.stderr for at in estimate.atoms)
                 + 0.01 * estimate.s0)
    bound = estimate.continuous_remainder * l1 + stat
    resid = abs(lhs - rhs)
    return NFResult(lhs, complex(rhs), float(resid), float(bound), bool(resid <= bound),
                    S.grid.kind == GroupKind.REAL_SAMPLED)


__all__ = ["WienerCurve", "wiener_atom_mass", "Atom", "extract_atoms", "SpectralEstimate",
           "estimate_spectrum", "observable_spectrum", "gram_min_eigenvalue",
           "EigenvalueGroupEstimate", "generate_group", "VerdictOptions", "Verdict",
           "discrete_spectrum_verdict", "EquivalenceMatrix", "cross_equivalence_suite",
           "NFResult", "nf_consistency", "hat_transform", "PURE_POINT", "CONTINUOUS",
           "MIXED", "INCONCLUSIVE", "DISCRETE", "NOT_DISCRETE"]
