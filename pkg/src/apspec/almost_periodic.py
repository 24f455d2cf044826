"""Empirical Bohr almost periodicity, Fourier-Bohr frequencies and
measure-theoretic almost periods.

Relative denseness cannot be decided from a finite grid. A sub-level set
``{tau : |F(tau)| <= eps}`` is called window-stable when its largest gap
in ``[-T, T]`` stops growing as ``T`` doubles.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AliasingWarning, MissingZero, NonRealProfile, WindowTooSmall
from .metrics import metric_pseudometric
from .profiles import GroupGrid, Method, Profile, draw_sample
from .systems import GroupKind

AP = "AP_CONSISTENT"
NOT_AP = "NOT_AP"
INCONCLUSIVE = "INCONCLUSIVE"

EPS_FRACTIONS = (0.4, 0.3, 0.2, 0.1)
WINDOW_FRACTIONS = (0.125, 0.25, 0.5, 1.0)
GROWTH = 1.25


@dataclass
class EpsScan:
    eps: float
    windows: list
    max_gaps: list
    central_run: tuple
    beyond_run: bool
    stable: bool
    isolated: bool
    n_periods: int
    periods: np.ndarray = field(repr=False)
    slack: float = 0.0

    def to_dict(self):
        return {"eps": self.eps, "slack": self.slack, "windows": self.windows,
                "max_gaps": self.max_gaps,
                "central_run": list(self.central_run), "beyond_run": self.beyond_run,
                "stable": self.stable, "isolated": self.isolated, "n_periods": self.n_periods}


@dataclass
class AlmostPeriodReport:
    """Per-eps almost-period sets, max-gap curves over nested windows and a verdict."""

    profile_name: str
    eps_grid: list
    windows: list
    scans: list
    verdict: str
    witness_eps: float | None
    growth: float = GROWTH

    def almost_period_set(self, eps):
        for s in self.scans:
            if s.eps == eps:
                return s.periods
        raise KeyError(eps)

    def to_dict(self):
        return {"profile": self.profile_name, "eps_grid": self.eps_grid, "windows": self.windows,
                "verdict": self.verdict, "witness_eps": self.witness_eps, "growth": self.growth,
                "scans": [s.to_dict() for s in self.scans]}


def _central_run(mask, zero):
    """Positions ``[lo, hi]`` of the maximal run of ``mask`` containing ``zero``."""
    if not mask[zero]:
        return zero, zero - 1
    breaks = np.flatnonzero(~mask)
    left = breaks[breaks < zero]
    right = breaks[breaks > zero]
    lo = int(left[-1]) + 1 if len(left) else 0
    hi = int(right[0]) - 1 if len(right) else len(mask) - 1
    return lo, hi


def _max_gap(idx, T):
    s = idx[np.abs(idx) <= T]
    return int(np.diff(np.concatenate([[-T], s, [T]])).max())


def scan_almost_periods(profile, eps_grid=None, windows=None, growth=GROWTH):
    """Window-stability scan of the sub-level sets of a real profile vanishing at 0.

    ``eps_grid`` defaults to ``(0.4, 0.3, 0.2, 0.1) * sup|F|``; ``windows``
    (in group units) to ``(1/8, 1/4, 1/2, 1)`` of the grid extent.

    Verdicts:

    * ``AP_CONSISTENT`` when for every eps the largest gap grows by at most
      ``growth`` between the two largest windows and the set reaches beyond
      the run of almost periods around 0 (or that run fills the window).
    * ``NOT_AP`` when for some eps the sub-level set at the inflated level
      ``2 eps + 4 stderr`` is just the run around 0 and stays inside the
      window, so noise cannot have hidden almost periods. For profiles on Z
      that vanish only at 0 the run is ``{0}``.
    * ``INCONCLUSIVE`` otherwise.

    On a sampled real line a true almost period can fall between grid
    points. By subadditivity ``P(t + u) <= P(t) + P(u)``, so membership uses
    the level ``eps + slack`` with ``slack = max(P(h), P(-h))``; on Z the
    slack is 0.
    """
    if not profile.real or np.iscomplexobj(profile.values):
        raise NonRealProfile(f"{profile.name} is complex-valued")
    grid = profile.grid
    if not np.any(grid.index == 0):
        raise MissingZero(f"{profile.name} has no grid point at 0")
    vals = np.abs(profile.values)
    se = profile.stderr
    zero = grid.position(0)
    if vals[zero] > 1e-12 + 3 * se[zero]:
        raise MissingZero(f"{profile.name} does not vanish at 0 (value {vals[zero]:.3g})")
    idx = grid.index
    E = int(min(-idx[0], idx[-1]))
    if E < 4:
        raise WindowTooSmall("the grid must extend at least 4 steps on both sides of 0")
    step = grid.step
    if windows is None:
        win_idx = sorted({max(1, int(round(E * f))) for f in WINDOW_FRACTIONS})
    else:
        win_idx = sorted({int(round(w / step)) for w in windows})
        if win_idx[-1] > E:
            raise WindowTooSmall(f"window {win_idx[-1] * step} exceeds the grid extent {E * step}")
    if len(win_idx) < 2:
        raise WindowTooSmall("at least two windows are required")
    sup = float(vals.max())
    if eps_grid is None:
        scale = sup if sup > 0 else 1.0
        eps_grid = [f * scale for f in EPS_FRACTIONS]
    eps_grid = sorted((float(e) for e in eps_grid), reverse=True)
    Tmax = win_idx[-1]
    inside = np.abs(idx) <= Tmax
    slack = 0.0
    if grid.kind == GroupKind.REAL_SAMPLED:
        slack = float(max(vals[zero - 1], vals[zero + 1]))

    scans, verdict_ap, witness = [], True, None
    for eps in eps_grid:
        mask = vals <= eps + slack
        periods = idx[mask & inside]
        gaps = [_max_gap(periods, T) for T in win_idx]
        lo, hi = _central_run(mask, zero)
        run = (int(idx[lo]), int(idx[hi]))
        covers = run[0] <= -Tmax and run[1] >= Tmax
        beyond = bool(np.any(mask & inside & ((idx < run[0]) | (idx > run[1]))))
        stable = gaps[-1] <= growth * gaps[-2]
        # isolation test at the inflated level
        wide = vals <= 2 * eps + 4 * se + slack
        wlo, whi = _central_run(wide, zero)
        wide_beyond = np.any(wide & inside & ((idx < idx[wlo]) | (idx > idx[whi])))
        wide_covers = idx[wlo] <= -Tmax and idx[whi] >= Tmax
        isolated = not wide_beyond and not wide_covers
        if isolated and witness is None:
            witness = eps
        if not (stable and (beyond or covers)):
            verdict_ap = False
        scans.append(EpsScan(eps, [T * step for T in win_idx], [g * step for g in gaps],
                             (run[0] * step, run[1] * step), beyond, bool(stable), bool(isolated),
                             int(len(periods)), periods * step if grid.kind == GroupKind.REAL_SAMPLED
                             else periods, slack))
    if witness is not None:
        verdict = NOT_AP
    elif verdict_ap:
        verdict = AP
    else:
        verdict = INCONCLUSIVE
    return AlmostPeriodReport(profile.name, eps_grid, [T * step for T in win_idx], scans, verdict,
                              witness, growth)


def almost_period_csv(profile, eps, path=None):
    """CSV rows ``t, |F(t)|, included`` for one eps."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "abs_F", "included"])
    for t, v in zip(profile.t, np.abs(profile.values)):
        w.writerow([t, repr(float(v)), int(v <= eps)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def translation_defect(profile, half=None):
    """``D(tau) = max_t |P(t + tau) - P(t)|`` over ``|t|, |tau| <= half``.

    ``D`` is real, vanishes at 0 and its sub-level sets are the eps-almost
    periods of ``P`` in the sup norm, which makes complex profiles such as
    autocorrelations amenable to :func:`scan_almost_periods`.
    """
    grid = profile.grid
    E = int(min(-grid.index[0], grid.index[-1]))
    H = E // 2 if half is None else int(half)
    if H < 4 or 2 * H > E:
        raise WindowTooSmall("translation defect needs a symmetric grid of extent >= 2 * half")
    z = grid.position(0)
    v = profile.values
    se = profile.stderr
    base = v[z - H:z + H + 1]
    D = np.empty(2 * H + 1)
    for j, tau in enumerate(range(-H, H + 1)):
        D[j] = np.max(np.abs(v[z - H + tau:z + H + 1 + tau] - base))
    out_grid = GroupGrid(grid.kind, np.arange(-H, H + 1), grid.step)
    D_se = np.full(2 * H + 1, 2.0 * float(se[z - E:z + E + 1].max()))
    D_se[H] = 0.0
    return Profile(f"defect[{profile.name}]", "defect", out_grid, D, D_se, profile.method,
                   profile.sample_size, profile.seed, True, profile.mirrored, dict(profile.meta))


# ---------------------------------------------------------------------------
# Fourier-Bohr coefficients


@dataclass
class FrequencySet:
    """Detected frequencies with Fourier-Bohr coefficients on a window of N steps."""

    betas: np.ndarray
    coefficients: np.ndarray
    N: int
    theta: float
    group_kind: GroupKind
    step: float
    taper: str = "hann"
    aliasing: bool = False

    @property
    def magnitudes(self):
        return np.abs(self.coefficients)

    def __len__(self):
        return len(self.betas)

    @property
    def resolution(self):
        return 1.0 / (2 * self.N * self.step)

    def to_dict(self):
        return {"betas": self.betas.tolist(), "magnitudes": self.magnitudes.tolist(),
                "re": self.coefficients.real.tolist(), "im": self.coefficients.imag.tolist(),
                "N": self.N, "theta": self.theta, "group_kind": self.group_kind.value,
                "step": self.step, "taper": self.taper, "aliasing": self.aliasing}


def _window(N, taper):
    n = np.arange(-N, N + 1)
    if taper == "hann":
        return 0.5 * (1.0 + np.cos(np.pi * n / (N + 1)))
    if taper in ("none", "rect", None):
        return np.ones(2 * N + 1)
    raise ValueError(f"unknown taper {taper!r}")


def _centered(profile, N):
    grid = profile.grid
    z = grid.position(0)
    if z - N < 0 or z + N >= len(grid) or grid.index[z - N] != -N or grid.index[z + N] != N:
        raise WindowTooSmall(f"{profile.name} does not cover [-{N}, {N}] contiguously")
    return np.asarray(profile.values[z - N:z + N + 1], dtype=complex)


def bohr_coefficient(values, weights, beta, step=1.0):
    """``sum w_n F(n) e^{-2 pi i beta n h} / sum w_n`` for a window centred at 0."""
    N = (len(values) - 1) // 2
    n = np.arange(-N, N + 1) * step
    phase = np.exp(-2j * np.pi * np.outer(np.atleast_1d(beta), n))
    return phase @ (weights * values) / weights.sum()


def fourier_bohr_coefficients(profile, beta_candidates=None, N=None, theta=None, taper="hann",
                              theta_fraction=0.05):
    """Tapered Fourier-Bohr means ``c_beta`` of a profile and its significant frequencies.

    With ``beta_candidates=None`` the coefficients are scanned on a grid of
    spacing at most ``1/(4N)`` (per unit of time), local maxima above
    ``theta`` (default ``0.05 sup|F|``) are refined by a bounded scalar
    search, and peaks closer than ``1/(2N)`` are merged. For ``G = Z``
    frequencies are reported in ``[0, 1)``; for the sampled real line in
    ``[-1/(2h), 1/(2h))``.
    """
    grid = profile.grid
    h = grid.step
    E = int(min(-grid.index[0], grid.index[-1]))
    N = E if N is None else int(N)
    if N < 8:
        raise WindowTooSmall("Fourier-Bohr means need at least 8 grid steps on each side")
    vals = _centered(profile, N)
    w = _window(N, taper)
    sup = float(np.abs(profile.values).max())
    theta = theta_fraction * sup if theta is None else float(theta)
    real_line = grid.kind == GroupKind.REAL_SAMPLED
    res = 1.0 / (2 * N * h)

    def coef(beta):
        return bohr_coefficient(vals, w, beta, h)

    if beta_candidates is not None:
        betas = np.asarray(beta_candidates, dtype=float)
        c = coef(betas) if len(betas) else np.zeros(0, complex)
        keep = np.abs(c) >= theta if theta > 0 else np.ones(len(c), bool)
        return FrequencySet(betas[keep], c[keep], N, theta, grid.kind, h, taper)

    if sup == 0.0:
        return FrequencySet(np.zeros(0), np.zeros(0, complex), N, theta, grid.kind, h, taper)
    M = 1 << int(np.ceil(np.log2(4 * (2 * N + 1))))
    buf = np.zeros(M, dtype=complex)
    n = np.arange(-N, N + 1)
    buf[n % M] = w * vals
    spec = np.fft.fft(buf) / w.sum()
    mag = np.abs(spec)
    peaks = np.flatnonzero((mag >= np.roll(mag, 1)) & (mag > np.roll(mag, -1)) & (mag >= theta))
    found = []
    for k in peaks:
        b0 = k / M
        res_b = minimize_scalar(lambda b: -abs(coef(b)[0]), bounds=(b0 - 1.0 / M, b0 + 1.0 / M),
                                method="bounded", options={"xatol": 1e-3 / M})
        b = float(res_b.x)
        c = complex(coef(b)[0])
        if abs(c) < mag[k]:
            b, c = b0, complex(spec[k])
        b %= 1.0
        found.append((0.0 if b > 1.0 - 1e-12 else b, c))
    found.sort(key=lambda bc: -abs(bc[1]))
    kept = []
    for b, c in found:
        if all(min(abs(b - b2), 1 - abs(b - b2)) * (1 / h if real_line else 1) >= res
               for b2, _ in kept):
            kept.append((b, c))
    betas = np.array([b for b, _ in kept])
    coefs = np.array([c for _, c in kept], dtype=complex)
    if real_line:
        # convert cycles per sample to cycles per unit time in [-1/(2h), 1/(2h))
        betas = (((betas + 0.5) % 1.0) - 0.5) / h
    aliasing = False
    if real_line and len(betas):
        aliasing = bool(np.any(np.abs(betas) > 0.8 / (2 * h)))
        if aliasing:
            warnings.warn("detected frequencies approach the Nyquist limit 1/(2h); "
                          "they may be aliased", AliasingWarning, stacklevel=2)
    order = np.argsort(betas, kind="stable")
    return FrequencySet(betas[order], coefs[order], N, theta, grid.kind, h, taper, aliasing)


# ---------------------------------------------------------------------------
# measure-theoretic almost periods


@dataclass
class PeriodSample:
    """Per-t averages and exceedance fractions of ``e(x_i, t x_i)`` on one sample."""

    t: np.ndarray
    e_bar: np.ndarray
    e_bar_stderr: np.ndarray
    sup_bound: float
    n: int
    fractions: dict = field(repr=False)

    def exceedance(self, eps):
        frac = self.fractions[float(eps)]
        return frac, np.sqrt(frac * (1 - frac) / self.n)


def _period_sample(system, e, grid, method, n, seed, extent, thresholds):
    e = metric_pseudometric(system) if e is None else e
    if grid is None:
        grid = GroupGrid.symmetric(system, extent)
    grid.check_system(system)
    x, n = draw_sample(system, method, n, seed)
    ks = np.unique(np.abs(grid.index))
    thresholds = sorted({float(th) for th in thresholds})
    mean, se = np.zeros(len(ks)), np.zeros(len(ks))
    frac = {th: np.zeros(len(ks)) for th in thresholds}
    for i, k in enumerate(ks):
        if k == 0:
            continue
        v = np.asarray(e.displacement(x, system.group_value(grid.element(k)), system), float)
        mean[i] = v.mean()
        se[i] = v.std(ddof=1) / np.sqrt(n)
        for th in thresholds:
            frac[th][i] = np.count_nonzero(v > th) / n
    if Method(method) == Method.QUADRATURE:
        se[:] = 0.0
    pos = np.searchsorted(ks, np.abs(grid.index))
    return PeriodSample(grid.values, mean[pos], se[pos], float(e.sup_bound), n,
                        {th: f[pos] for th, f in frac.items()})


@dataclass
class MeasurePeriods:
    eps: float
    t: np.ndarray
    fraction: np.ndarray
    stderr: np.ndarray
    included: np.ndarray

    @property
    def periods(self):
        return self.t[self.included]

    def to_dict(self):
        return {"eps": self.eps, "periods": self.periods.tolist(),
                "fraction": self.fraction.tolist(), "stderr": self.stderr.tolist()}


def measure_theoretic_almost_periods(system, e=None, eps=0.1, grid=None, *,
                                     method=Method.MONTE_CARLO, n=None, seed=0, extent=None):
    """Grid points ``t`` with empirical ``m({x : e(x, tx) > eps}) < eps``."""
    ps = _period_sample(system, e, grid, method, n, seed, extent, [eps])
    frac, se = ps.exceedance(eps)
    return MeasurePeriods(float(eps), ps.t, frac, se, frac < eps)


@dataclass
class ConsistencyReport:
    """Both implications between measure-theoretic and average almost periods."""

    rows: list
    consistent: bool
    sup_bound: float
    n: int

    def to_dict(self):
        return {"rows": self.rows, "consistent": self.consistent, "sup_bound": self.sup_bound,
                "n": self.n}


def cross_check_period_notions(system, e=None, eps_grid=(0.4, 0.2, 0.1, 0.05), grid=None, *,
                               method=Method.MONTE_CARLO, n=None, seed=0, extent=None):
    """Check both directions linking the two notions of almost period.

    * forward: with ``eps1 (||e||_inf + 1) < eps``, every measure-theoretic
      ``eps1``-almost period has ``e_bar(t) < eps + 4 stderr``;
    * backward (Markov): every ``t`` with ``e_bar(t) < eps**2`` is a
      measure-theoretic ``eps``-almost period.
    """
    e = metric_pseudometric(system) if e is None else e
    eps1s = [0.99 * eps / (e.sup_bound + 1.0) for eps in eps_grid]
    ps = _period_sample(system, e, grid, method, n, seed, extent, list(eps_grid) + eps1s)
    rows, ok = [], True
    for eps, eps1 in zip(eps_grid, eps1s):
        frac1, _ = ps.exceedance(eps1)
        fwd = frac1 < eps1
        fwd_bad = fwd & ~(ps.e_bar < eps + 4 * ps.e_bar_stderr)
        frac, _ = ps.exceedance(eps)
        bwd = ps.e_bar < eps ** 2
        bwd_bad = bwd & ~(frac < eps)
        row = {"eps": float(eps), "eps1": float(eps1),
               "forward_periods": int(fwd.sum()), "forward_violations": ps.t[fwd_bad].tolist(),
               "backward_periods": int(bwd.sum()), "backward_violations": ps.t[bwd_bad].tolist(),
               "measure_periods": int((frac < eps).sum()),
               "average_periods": int((ps.e_bar <= eps).sum())}
        ok = ok and not fwd_bad.any() and not bwd_bad.any()
        rows.append(row)
    return ConsistencyReport(rows, bool(ok), ps.sup_bound, ps.n)


__all__ = ["AP", "NOT_AP", "INCONCLUSIVE", "AlmostPeriodReport", "EpsScan", "scan_almost_periods",
           "translation_defect", "FrequencySet", "fourier_bohr_coefficients", "bohr_coefficient",
           "measure_theoretic_almost_periods", "MeasurePeriods", "cross_check_period_notions",
           "ConsistencyReport", "almost_period_csv"]
