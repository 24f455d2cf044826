"""One-dimensional point sets, their autocorrelation and diffraction, and
the translation hull of a point set as a sampleable dynamical system.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from . import substitutions
from .errors import (InvalidParameter, InvalidWindow, OutOfHorizon, PositivityWarning,
                     SupportOutOfWindow, WindowTooSmall)
from .systems import DynamicalSystem, GroupKind, Observable, SpectralType

PHI = (1.0 + math.sqrt(5.0)) / 2.0
PHI_CONJ = 1.0 - PHI  # Galois conjugate, -1/phi
SQRT5 = math.sqrt(5.0)


class Provenance(str, Enum):
    LATTICE = "LATTICE"
    FIBONACCI_CHAIN = "FIBONACCI_CHAIN"
    CUT_AND_PROJECT = "CUT_AND_PROJECT"
    POISSON = "POISSON"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sorted points of a configuration inside the window ``[-L, L]``.

    ``golden`` holds exact integer pairs ``(m, n)`` with ``x = m + n phi``
    for algebraic point sets, so displacements can be grouped exactly.
    """

    coords: np.ndarray
    L: float
    provenance: Provenance
    params: dict = field(default_factory=dict)
    golden: np.ndarray | None = None
    density: float | None = None
    r_min: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.coords, dtype=float)
        if np.any(np.diff(x) <= 0):
            raise InvalidParameter("point coordinates must be strictly increasing")
        if len(x) and (x[0] < -self.L - 1e-9 or x[-1] > self.L + 1e-9):
            raise InvalidParameter("points must lie inside [-L, L]")
        if self.r_min > 0 and len(x) > 1 and np.diff(x).min() < self.r_min - 1e-9:
            raise InvalidParameter(f"gap below the Delone bound {self.r_min}")
        x.flags.writeable = False
        object.__setattr__(self, "coords", x)

    def __len__(self):
        return len(self.coords)

    @property
    def empirical_density(self):
        return len(self.coords) / (2.0 * self.L)

    def density_ok(self, tol=0.1):
        if self.density is None:
            return True
        return abs(self.empirical_density - self.density) <= tol * self.density + 1e-12

    def to_text(self, path=None):
        text = "".join(f"{float(x)!r}\n" for x in self.coords)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_text(cls, text, L=None):
        coords = np.array(sorted(float(line) for line in text.split() if line.strip()))
        L = float(np.abs(coords).max()) if L is None else float(L)
        return cls(coords, L, Provenance.CUSTOM)

    def describe(self):
        return {"provenance": self.provenance.value, "L": self.L, "points": len(self),
                "density": self.density, "empirical_density": self.empirical_density,
                "params": self.params}


def fibonacci_gaps(levels, seed="a"):
    """Tile lengths (``a -> phi``, ``b -> 1``) of ``sigma^levels(seed)``."""
    word = substitutions.iterate("FIBONACCI", [0 if c == "a" else 1 for c in seed], levels)
    return np.where(word == 0, PHI, 1.0)


def _fibonacci_chain(L):
    n_tiles = int(L / 1.0) + 2
    left, right = substitutions.two_sided_fibonacci(n_tiles, n_tiles)
    steps = np.array([[0, 1], [1, 0]], dtype=np.int64)  # a = phi = (0, 1), b = 1 = (1, 0)
    r = np.vstack([[0, 0], np.cumsum(steps[right], axis=0)])
    lft = -np.cumsum(steps[left[::-1]], axis=0)
    mn = np.vstack([lft[::-1], r])
    x = mn[:, 0] + mn[:, 1] * PHI
    keep = np.abs(x) <= L
    return x[keep], mn[keep]


def _cut_and_project(L, window):
    lo, hi = window
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise InvalidWindow(f"window {window!r} must be a finite interval with lo < hi")
    # x = m + n phi and x* = m + n phi' differ by n sqrt(5)
    n = np.arange(math.floor((-L - hi) / SQRT5) - 1, math.ceil((L - lo) / SQRT5) + 2)
    out = []
    span = int(math.ceil(hi - lo)) + 1
    m0 = np.ceil(lo - n * PHI_CONJ).astype(np.int64)
    for j in range(span):
        m = m0 + j
        star = m + n * PHI_CONJ
        ok = (star >= lo) & (star < hi)
        out.append(np.column_stack([m[ok], n[ok]]))
    mn = np.vstack(out)
    x = mn[:, 0] + mn[:, 1] * PHI
    keep = np.abs(x) <= L
    x, mn = x[keep], mn[keep]
    order = np.argsort(x)
    return x[order], mn[order]


def generate_point_set(provenance, L, seed=0, *, rate=1.0, window=(-1.0, PHI - 1.0)):
    """Point set of a given provenance inside ``[-L, L]``.

    LATTICE is ``Z``; FIBONACCI_CHAIN tiles the line with the two-sided
    fixed point of ``a -> ab, b -> a`` (``a`` of length phi, ``b`` of
    length 1) with a point at 0; CUT_AND_PROJECT selects ``m + n phi`` whose
    conjugate ``m + n phi'`` lies in ``window``; POISSON draws a Poisson
    process of the given rate.
    """
    provenance = Provenance(provenance)
    L = float(L)
    if not L > 0:
        raise InvalidParameter("L must be positive")
    if provenance == Provenance.LATTICE:
        m = np.arange(math.ceil(-L), math.floor(L) + 1, dtype=np.int64)
        return PointSet(m.astype(float), L, provenance, {}, np.column_stack([m, 0 * m]), 1.0, 1.0)
    if provenance == Provenance.FIBONACCI_CHAIN:
        x, mn = _fibonacci_chain(L)
        return PointSet(x, L, provenance, {}, mn, PHI / SQRT5, 1.0)
    if provenance == Provenance.CUT_AND_PROJECT:
        lo, hi = float(window[0]), float(window[1])
        x, mn = _cut_and_project(L, (lo, hi))
        gaps = np.diff(x)
        r_min = float(gaps.min()) if len(gaps) else 0.0
        return PointSet(x, L, provenance, {"window": [lo, hi]}, mn, (hi - lo) / SQRT5, r_min)
    if provenance == Provenance.POISSON:
        if not rate > 0:
            raise InvalidParameter("rate must be positive")
        rng = np.random.default_rng(seed)
        k = rng.poisson(rate * 2 * L)
        x = np.unique(rng.uniform(-L, L, size=k))
        return PointSet(x, L, provenance, {"rate": rate, "seed": seed}, None, float(rate), 0.0)
    raise InvalidParameter(f"cannot generate {provenance.value} point sets")


# ---------------------------------------------------------------------------
# test functions


class BumpKind(str, Enum):
    TRIANGLE = "TRIANGLE"
    GAUSSIAN_TRUNCATED = "GAUSSIAN_TRUNCATED"
    HAT = "HAT"


@dataclass(frozen=True)
class TestFunction:
    """Continuous, compactly supported bump of height ``scale`` centred at ``center``."""

    __test__ = False  # keep pytest from collecting this class

    kind: BumpKind = BumpKind.TRIANGLE
    radius: float = 0.5
    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", BumpKind(self.kind))
        if not self.radius > 0:
            raise InvalidParameter("radius must be positive")

    @property
    def sup_norm(self):
        return abs(self.scale)

    @property
    def support(self):
        return self.center - self.radius, self.center + self.radius

    def __call__(self, u):
        v = (np.asarray(u, dtype=float) - self.center) / self.radius
        a = np.abs(v)
        if self.kind == BumpKind.TRIANGLE:
            out = np.maximum(0.0, 1.0 - a)
        elif self.kind == BumpKind.HAT:
            out = np.where(a < 1.0, np.cos(0.5 * np.pi * np.minimum(a, 1.0)) ** 2, 0.0)
        else:
            edge = math.exp(-4.5)
            out = np.where(a < 1.0, (np.exp(-4.5 * v * v) - edge) / (1.0 - edge), 0.0)
        return self.scale * out

    def samples(self, h=0.01):
        u = np.arange(-self.radius, self.radius + h / 2, h) + self.center
        return u, self(u)

    def autocorrelation(self, step=None):
        """``(phi * phi~)(u) = int phi(u + v) conj(phi(v)) dv`` on a fine grid."""
        step = self.radius / 400 if step is None else step
        u = np.arange(-self.radius, self.radius + step / 2, step) + self.center
        vals = self(u)
        ac = np.correlate(vals, vals, mode="full") * step
        lags = (np.arange(len(ac)) - (len(vals) - 1)) * step
        return lags, ac

    def describe(self):
        return {"kind": self.kind.value, "radius": self.radius, "center": self.center,
                "scale": self.scale}


def n_map(phi, ps, t):
    """``N_phi(t . mu) = sum_{x in ps} phi(t - x)``."""
    lo, hi = t - phi.support[1], t - phi.support[0]
    if lo < -ps.L or hi > ps.L:
        raise SupportOutOfWindow(f"support of phi(t - .) at t={t} leaves [-{ps.L}, {ps.L}]")
    x = ps.coords
    i0, i1 = np.searchsorted(x, lo), np.searchsorted(x, hi, side="right")
    return complex(np.sum(phi(t - x[i0:i1])))


def n_map_table(phi, ps, grid):
    """``N_phi(s . mu)`` for every ``s`` of a uniform grid (vectorised ``n_map``)."""
    grid = np.asarray(grid, dtype=float)
    h = grid[1] - grid[0]
    out = np.zeros(len(grid))
    a, b = phi.support
    # point x contributes to s with s - x in [a, b]
    first = np.ceil((ps.coords + a - grid[0]) / h - 1e-9).astype(np.int64)
    width = int(math.ceil((b - a) / h)) + 2
    for j in range(width):
        g = first + j
        ok = (g >= 0) & (g < len(grid))
        g = g[ok]
        np.add.at(out, g, phi(grid[g] - ps.coords[ok]))
    return out


# ---------------------------------------------------------------------------
# autocorrelation and diffraction


@dataclass(frozen=True, eq=False)
class AutocorrelationMeasure:
    """Atoms ``(z, w_z)`` of the finite-window autocorrelation."""

    z: np.ndarray
    w: np.ndarray
    L: float
    Z: float
    boundary: str = "none"
    golden: np.ndarray | None = None

    def weight_at(self, z, tol=1e-6):
        i = np.flatnonzero(np.abs(self.z - z) <= tol)
        return float(self.w[i].sum())

    def to_csv(self):
        return "z,w\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(self.z, self.w))


def patterson_autocorrelation(ps, Z, dz=1e-6, boundary="none"):
    """Pair-displacement atoms ``sum_{x,y} delta_{y - x} / (2L)`` with ``|y - x| <= Z``.

    Displacements of algebraic point sets are grouped exactly by their
    ``(m, n)`` coordinates; otherwise they are binned with width ``dz`` and
    merged at weighted centroids. ``boundary="edge"`` divides by
    ``2L - |z|`` instead of ``2L`` (unbiased for stationary sets).
    """
    Z = float(Z)
    if not 0 <= Z <= ps.L / 2:
        raise WindowTooSmall(f"max displacement {Z} must not exceed L/2 = {ps.L / 2}")
    x = ps.coords
    n = len(x)
    keys_all, counts_all, sums_all = [], [], []
    exact = ps.golden is not None
    if exact:
        mn = ps.golden
    k = 1
    while k < n:
        d = x[k:] - x[:-k]
        sel = d <= Z + 1e-9
        if not sel.any():
            break
        if exact:
            dm = (mn[k:, 0] - mn[:-k, 0])[sel]
            dn = (mn[k:, 1] - mn[:-k, 1])[sel]
            pairs, cnt = np.unique(np.column_stack([dm, dn]), axis=0, return_counts=True)
            keys_all.append(pairs)
            counts_all.append(cnt)
        else:
            b = np.rint(d[sel] / dz).astype(np.int64)
            ub, inv, cnt = np.unique(b, return_inverse=True, return_counts=True)
            keys_all.append(ub)
            counts_all.append(cnt)
            sums_all.append(np.bincount(inv, weights=d[sel]))
        k += 1
    if exact:
        if keys_all:
            pk = np.vstack(keys_all)
            pairs, inv = np.unique(pk, axis=0, return_inverse=True)
            cnt = np.bincount(inv.ravel(), weights=np.concatenate(counts_all))
            zpos = pairs[:, 0] + pairs[:, 1] * PHI
        else:
            pairs, cnt, zpos = np.zeros((0, 2), np.int64), np.zeros(0), np.zeros(0)
        golden = np.vstack([-pairs[::-1], [[0, 0]], pairs])
    else:
        if keys_all:
            kk = np.concatenate(keys_all)
            ub, inv = np.unique(kk, return_inverse=True)
            cnt = np.bincount(inv, weights=np.concatenate(counts_all))
            zpos = np.bincount(inv, weights=np.concatenate(sums_all)) / cnt
        else:
            cnt, zpos = np.zeros(0), np.zeros(0)
        golden = None
    z = np.concatenate([-zpos[::-1], [0.0], zpos])
    c = np.concatenate([cnt[::-1], [float(n)], cnt])
    if exact:
        order = np.argsort(z, kind="stable")
        z, c, golden = z[order], c[order], golden[order]
    if boundary == "none":
        w = c / (2 * ps.L)
    elif boundary == "edge":
        w = c / (2 * ps.L - np.abs(z))
    else:
        raise InvalidParameter(f"unknown boundary mode {boundary!r}")
    return AutocorrelationMeasure(z, w, ps.L, Z, boundary, golden)


def _taper(u):
    """Cubic B-spline on ``[-1, 1]`` with ``taper(0) = 1``; its Fourier transform is >= 0."""
    s = 2.0 * np.abs(u)
    out = np.where(s <= 1, 2.0 / 3.0 - s ** 2 + 0.5 * s ** 3,
                   np.where(s <= 2, (2.0 - s) ** 3 / 6.0, 0.0))
    return 1.5 * out


TAPER_INTEGRAL = 0.75  # int_{-1}^{1} taper(u) du
# share of the taper's Fourier mass inside its main lobe |k| <= 2 / Z
_MAINLOBE = quad(lambda s: np.sinc(s) ** 4, -1, 1)[0] / quad(lambda s: np.sinc(s) ** 4, -40, 40,
                                                               limit=400)[0]


@dataclass
class BraggPeak:
    k: float
    height: float
    intensity: float

    def to_dict(self):
        return {"k": self.k, "height": self.height, "intensity": self.intensity}


@dataclass
class DiffractionSpectrum:
    """Windowed sum ``I(k) = sum_z w_z exp(-2 pi i k z) taper(z / Z)`` and its Bragg peaks.

    A peak's ``intensity`` integrates ``I`` over the taper's main lobe and
    estimates the mass of the corresponding atom of the diffraction measure;
    ``height`` is ``I(k0)`` divided by ``int taper(z / Z) dz`` (the
    Fourier-Bohr coefficient of the autocorrelation at ``k0``).
    """

    k: np.ndarray
    intensity: np.ndarray
    peaks: list
    Z: float
    min_before_clip: float
    clipped: bool

    def to_csv(self):
        rows = zip(self.k, self.intensity)
        return "k,intensity\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in rows)

    def peak_near(self, k, tol=None):
        tol = 1.0 / self.Z if tol is None else tol
        best = [p for p in self.peaks if abs(p.k - k) <= tol]
        return max(best, key=lambda p: p.height) if best else None

    def to_dict(self):
        return {"Z": self.Z, "peaks": [p.to_dict() for p in self.peaks],
                "min_before_clip": self.min_before_clip, "clipped": self.clipped}


def _windowed_sum(ac, k):
    keep = np.abs(ac.z) <= ac.Z
    z, w = ac.z[keep], ac.w[keep] * _taper(ac.z[keep] / ac.Z)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(len(k))
    chunk = max(1, int(4e6 // max(len(z), 1)))
    for i in range(0, len(k), chunk):
        ph = np.cos(2 * np.pi * np.outer(k[i:i + chunk], z))  # w is symmetric in z
        out[i:i + chunk] = ph @ w
    return out


def diffraction(ac, k_grid=None, *, k_max=4.0, threshold=None, tol=0.01):
    """Tapered transform of the autocorrelation and its Bragg peaks.

    Peaks are local maxima above ``threshold`` (default ``1e-3`` of the
    largest value), refined by a bounded scalar search, with intensity from
    integrating over the taper's main lobe. Values below ``-tol * I(0)``
    trigger a :class:`PositivityWarning`; negative rounding noise is
    clipped at zero.
    """
    if k_grid is None:
        k_grid = np.arange(-k_max, k_max + 1e-12, 1.0 / (8 * ac.Z))
    k_grid = np.asarray(k_grid, dtype=float)
    I = _windowed_sum(ac, k_grid)
    I0 = float(_windowed_sum(ac, [0.0])[0])
    mn = float(I.min())
    if mn < -tol * I0:
        warnings.warn(f"diffraction intensity dips to {mn:.3g} (I(0) = {I0:.3g})",
                      PositivityWarning, stacklevel=2)
    clipped = bool(mn < 0)
    I_clip = np.maximum(I, 0.0)
    thr = 1e-3 * float(I.max()) if threshold is None else float(threshold)
    dk = k_grid[1] - k_grid[0] if len(k_grid) > 1 else 1.0 / (8 * ac.Z)
    # pad so that peaks just outside the grid can veto their own sidelobes
    n_pad = int(math.ceil(6.0 / (ac.Z * dk)))
    kp = np.concatenate([k_grid[0] - dk * np.arange(n_pad, 0, -1), k_grid,
                         k_grid[-1] + dk * np.arange(1, n_pad + 1)])
    Ip = np.concatenate([_windowed_sum(ac, kp[:n_pad]), I, _windowed_sum(ac, kp[-n_pad:])])
    interior = (Ip[1:-1] >= Ip[:-2]) & (Ip[1:-1] > Ip[2:]) & (Ip[1:-1] >= thr)
    idx = np.flatnonzero(interior) + 1
    peaks = []
    lobe = 2.0 / ac.Z
    for i in idx:
        res = minimize_scalar(lambda q: -_windowed_sum(ac, [q])[0],
                              bounds=(kp[i] - dk, kp[i] + dk), method="bounded",
                              options={"xatol": 1e-4 * dk})
        k0 = float(res.x)
        height = float(_windowed_sum(ac, [k0])[0]) / (TAPER_INTEGRAL * ac.Z)
        q = np.linspace(k0 - lobe, k0 + lobe, 161)
        integral = np.trapezoid(_windowed_sum(ac, q), q)
        intensity = float(integral / _MAINLOBE)
        peaks.append(BraggPeak(k0, height, intensity))
    peaks = [p for p in _drop_sidelobes(peaks, 4.0 / ac.Z)
             if k_grid[0] - dk / 2 <= p.k <= k_grid[-1] + dk / 2]
    return DiffractionSpectrum(k_grid, I_clip, peaks, ac.Z, mn, clipped)


def _drop_sidelobes(peaks, reach, level=0.01):
    # the taper's sidelobes sit below 0.3% of the main lobe
    kept = []
    for p in sorted(peaks, key=lambda p: -p.height):
        if not any(abs(p.k - q.k) <= reach and p.height < level * q.height for q in kept):
            kept.append(p)
    return sorted(kept, key=lambda p: p.k)


# ---------------------------------------------------------------------------
# the identity gamma * phi * phi~ (t) = <N_phi, T_t N_phi>


@dataclass
class GammaCheck:
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residual(self):
        return float(np.max(np.abs(self.lhs - self.rhs))) if len(self.t) else 0.0

    def to_dict(self):
        return {"t": self.t.tolist(), "lhs": self.lhs.tolist(), "rhs": self.rhs.tolist(),
                "residual": self.residual}


def gamma_identity_check(ps, phi, t_grid=None, hull_samples=None, *, Z=None, h=0.01):
    """``max_t |(gamma * phi * phi~)(t) - <N_phi, T_t N_phi>|``.

    The left side convolves the Patterson atoms with the numerically
    computed ``phi * phi~``. The right side averages
    ``conj(N_phi(s . mu)) N_phi((s + t) . mu)`` over translates ``s`` in
    ``[-L/2, L/2]``: on a uniform grid of step ``h`` by default, or over
    ``hull_samples`` random translates drawn with seed ``0``.
    """
    if t_grid is None:
        t_grid = np.arange(-4.0, 4.0 + 1e-9, 0.05)
    t_grid = np.asarray(t_grid, dtype=float)
    if phi.scale == 0:
        zeros = np.zeros(len(t_grid))
        return GammaCheck(t_grid, zeros, zeros.copy())
    reach = float(np.abs(t_grid).max()) + 2 * phi.radius + 2 * abs(phi.center)
    Z = min(reach + 1.0, ps.L / 2) if Z is None else Z
    ac = patterson_autocorrelation(ps, Z)
    lags, cc = phi.autocorrelation()
    # (phi * phi~)(u) for real phi is the correlation at lag u
    lhs = np.array([np.sum(ac.w * np.interp(t - ac.z, lags, cc, left=0.0, right=0.0))
                    for t in t_grid])
    half = ps.L / 2
    if hull_samples is None:
        s = np.arange(-half, half, h)
    else:
        s = np.random.default_rng(0).uniform(-half, half, int(hull_samples))
    rhs = np.empty(len(t_grid))
    base = _n_map_points(phi, ps, s)
    for i, t in enumerate(t_grid):
        rhs[i] = np.mean(base * _n_map_points(phi, ps, s + t))
    return GammaCheck(t_grid, lhs, rhs)


def _n_map_points(phi, ps, s):
    """``N_phi(s . mu)`` at arbitrary translates ``s``."""
    a, b = phi.support
    x = ps.coords
    lo = np.searchsorted(x, s - b)
    hi = np.searchsorted(x, s - a, side="right")
    out = np.zeros(len(s))
    for j in range(int((hi - lo).max()) if len(s) else 0):
        i = lo + j
        ok = i < hi
        out[ok] += phi(s[ok] - x[i[ok]])
    return out


# ---------------------------------------------------------------------------
# the hull of a point set as a dynamical system


DEFAULT_CENTERS = (0.0, -0.5, 0.5, -1.0, 1.0)
DEFAULT_WEIGHTS = (1.0, 0.5, 0.5, 0.25, 0.25)


class PointSetHull(DynamicalSystem):
    """Translates ``s . mu`` of one configuration, ``s`` on the grid ``h Z``.

    Observables are ``N:j = N_{phi_j}`` for a family of triangles ``phi_j``
    with shifted centres; the metric is the weighted sum
    ``sum_j c_j |N_{phi_j}(mu) - N_{phi_j}(nu)|``, which metrizes the vague
    topology on the hull of a Delone set up to the finite family. Samples
    are uniform translates ``s`` in ``[-L/2, L/2]``.
    """

    name = "PointSetHull"

    def __init__(self, points, h=0.05, radius=0.5, centers=DEFAULT_CENTERS,
                 weights=DEFAULT_WEIGHTS, kind=BumpKind.TRIANGLE):
        if not h > 0:
            raise InvalidParameter("grid step h must be positive")
        super().__init__(points=points.describe(), h=float(h), radius=float(radius),
                         centers=list(centers), weights=list(weights))
        self.points = points
        self.group_kind = GroupKind.REAL_SAMPLED
        self.step = float(h)
        self.default_extent = 4000
        self.tests = [TestFunction(kind, radius, c) for c in centers]
        self.weights = [float(c) for c in weights]
        if len(self.weights) != len(self.tests):
            raise InvalidParameter("one weight per test function is required")
        self.known_spectral_type = (SpectralType.CONTINUOUS
                                    if points.provenance == Provenance.POISSON
                                    else SpectralType.DISCRETE
                                    if points.provenance != Provenance.CUSTOM
                                    else SpectralType.UNKNOWN)
        L = points.L
        self.n_grid = int(round(2 * L / self.step)) + 1
        self.s_grid = -L + self.step * np.arange(self.n_grid)
        self.tables = np.vstack([n_map_table(phi, points, self.s_grid) for phi in self.tests])
        self.tables.flags.writeable = False
        self.sup = float(self.tables.max()) if self.tables.size else 0.0
        self.diameter = 2 * sum(self.weights) * self.sup
        margin = int(math.ceil((radius + max(abs(c) for c in centers)) / self.step)) + 1
        self._lo, self._hi = margin, self.n_grid - 1 - margin
        q = self.n_grid // 4
        self._sample_lo, self._sample_hi = q, self.n_grid - 1 - q

    @classmethod
    def from_config(cls, provenance="FIBONACCI_CHAIN", L=10_000.0, seed=0, rate=1.0,
                    window=None, **kw):
        extra = {} if window is None else {"window": tuple(window)}
        ps = generate_point_set(provenance, L, seed, rate=rate, **extra)
        return cls(ps, **kw)

    def _act(self, t, x):
        g = np.asarray(x) + int(round(t / self.step))
        if len(g) and (g.min() < self._lo or g.max() > self._hi):
            raise OutOfHorizon("translate leaves the configuration window")
        return g

    def metric(self, x, y):
        T = self.tables
        return np.asarray(self.weights) @ np.abs(T[:, x] - T[:, y])

    def displacement(self, x, t):
        t = self.group_value(t)
        return self.metric(x, self._act(t, x))

    def sample(self, seed, n):
        return np.random.default_rng(seed).integers(self._sample_lo, self._sample_hi + 1, size=n)

    def orbit_sample(self, seed, n):
        start = int(np.random.default_rng(seed).integers(self._sample_lo, self._sample_hi - n))
        return start + np.arange(n)

    def coords(self, x):
        return self.s_grid[np.asarray(x)]

    def point(self, value):
        return np.array([int(round((float(value) + self.points.L) / self.step))])

    def observables(self):
        return [f"N:{j}" for j in range(len(self.tests))] + ["const"]

    def observable(self, name):
        if name.startswith("N:"):
            j = int(name.split(":")[1])
            if not 0 <= j < len(self.tests):
                raise InvalidParameter(f"no test function {j}")
            row = self.tables[j]
            return Observable(name, lambda x: row[np.asarray(x)], float(row.max()))
        if name == "const":
            return Observable(name, lambda x: np.ones(len(x)), 1.0)
        return super().observable(name)

    def family_spec(self):
        return [f"N:{j}" for j in range(len(self.tests))], list(self.weights), 0.0

    def spectral_observables(self):
        return ["N:0"]


__all__ = ["PHI", "Provenance", "PointSet", "generate_point_set", "fibonacci_gaps", "BumpKind",
           "TestFunction", "n_map", "n_map_table", "AutocorrelationMeasure",
           "patterson_autocorrelation", "diffraction", "DiffractionSpectrum", "BraggPeak",
           "gamma_identity_check", "GammaCheck", "PointSetHull"]
