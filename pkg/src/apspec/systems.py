"""Sampleable measure-preserving actions with known spectral type.

A system bundles the action ``(t, x) -> tx``, a metric ``d`` inducing the
topology, a sampler for the invariant measure and a registry of continuous
observables. Points are handled in batches: a batch is a numpy array for
toral systems, a :class:`WordPoints` for symbolic systems and a
:class:`ProductPoints` for products. Every batch supports ``len`` and
integer/slice/array indexing.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.signal import lfilter

from . import substitutions
from .errors import (GroupMismatch, InvalidParameter, OutOfHorizon,
                     ParameterWarning, UnknownSystem, UnsupportedMethod)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * math.pi


class GroupKind(str, Enum):
    INTEGER = "INTEGER"
    REAL_SAMPLED = "REAL_SAMPLED"


class SpectralType(str, Enum):
    DISCRETE = "DISCRETE"
    MIXED = "MIXED"
    CONTINUOUS = "CONTINUOUS"
    UNKNOWN = "UNKNOWN"


def on_grid(value, step, rtol=1e-12):
    """Integer index of ``value`` on the grid ``step * Z`` or ``None``."""
    k = round(value / step)
    if abs(k * step - value) <= rtol * max(1.0, abs(value)):
        return int(k)
    return None


@dataclass(frozen=True)
class GroupElement:
    """An element of Z, or of R restricted to the grid ``step * Z``."""

    kind: GroupKind
    value: float
    step: float = 1.0

    def __post_init__(self):
        if self.kind == GroupKind.INTEGER:
            if self.step != 1.0 or float(self.value) != int(self.value):
                raise GroupMismatch(f"{self.value!r} is not an integer")
            object.__setattr__(self, "value", int(self.value))
        elif on_grid(float(self.value), self.step) is None:
            raise GroupMismatch(f"{self.value!r} is not on the grid of step {self.step}")

    @property
    def index(self):
        return on_grid(self.value, self.step)

    def _check(self, other):
        if (self.kind, self.step) != (other.kind, other.step):
            raise GroupMismatch("elements of different groups")

    def __neg__(self):
        return GroupElement(self.kind, -self.index * self.step if self.kind == GroupKind.REAL_SAMPLED
                            else -self.value, self.step)

    def __add__(self, other):
        self._check(other)
        k = self.index + other.index
        return GroupElement(self.kind, k * self.step if self.kind == GroupKind.REAL_SAMPLED else k,
                            self.step)


@dataclass(frozen=True, eq=False)
class Observable:
    """A continuous function on X, evaluated on point batches."""

    name: str
    func: object
    sup_norm: float
    real: bool = True

    def __call__(self, x):
        return np.asarray(self.func(x))

    eval = __call__


# ---------------------------------------------------------------------------
# point containers


@dataclass(frozen=True, eq=False)
class SymbolWord:
    """A finite backing sequence for symbolic points.

    ``lo`` and ``hi`` bound the offsets that may be read around a stored
    position, so every window read stays inside the data.
    """

    symbols: np.ndarray
    label: str = ""

    def __len__(self):
        return len(self.symbols)

    @cached_property
    def windows_cache(self):
        return {}

    @cached_property
    def binary_values(self):
        # x(p) = sum_j b[p+j] 2^{-(j+1)}, i.e. x(p) = (b[p] + x(p+1)) / 2
        rev = self.symbols[::-1].astype(float)
        return lfilter([0.5], [1.0, -0.5], rev)[::-1].copy()

    def window_view(self, radius):
        """Rows ``symbols[c - radius : c + radius + 1]`` indexed by ``c - radius``."""
        view = self.windows_cache.get(radius)
        if view is None:
            view = np.lib.stride_tricks.sliding_window_view(self.symbols, 2 * radius + 1)
            self.windows_cache[radius] = view
        return view


@dataclass(frozen=True, eq=False)
class WordPoints:
    """Batch of symbolic points: positions into a shared backing word."""

    word: SymbolWord
    pos: np.ndarray
    left: int = 0
    right: int = 0

    def __len__(self):
        return len(self.pos)

    def __getitem__(self, idx):
        return WordPoints(self.word, np.atleast_1d(self.pos[idx]), self.left, self.right)

    def shifted(self, t):
        pos = self.pos + int(t)
        if len(pos) and (pos.min() - self.left < 0 or pos.max() + self.right >= len(self.word)):
            raise OutOfHorizon(f"shift by {t} leaves the backing word of length {len(self.word)}")
        return WordPoints(self.word, pos, self.left, self.right)

    def symbols_at(self, k):
        return self.word.symbols[self.pos + k]


@dataclass(frozen=True, eq=False)
class ProductPoints:
    a: object
    b: object

    def __len__(self):
        return len(self.a)

    def __getitem__(self, idx):
        return ProductPoints(_take(self.a, idx), _take(self.b, idx))


def _take(points, idx):
    if isinstance(points, np.ndarray):
        out = points[idx]
        return out if np.ndim(out) == points.ndim else points[np.atleast_1d(idx)]
    return points[idx]


def concat_points(batches):
    first = batches[0]
    if isinstance(first, np.ndarray):
        return np.concatenate(batches)
    if isinstance(first, WordPoints):
        if any(b.word is not first.word for b in batches):
            raise InvalidParameter("cannot concatenate points from different backing words")
        return WordPoints(first.word, np.concatenate([b.pos for b in batches]), first.left, first.right)
    if isinstance(first, ProductPoints):
        return ProductPoints(concat_points([b.a for b in batches]),
                             concat_points([b.b for b in batches]))
    raise TypeError(f"unsupported point batch {type(first).__name__}")


def circle_distance(x, y):
    d = np.abs(np.asarray(x) - np.asarray(y)) % 1.0
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# base class


class DynamicalSystem:
    """Base class; subclasses implement ``_act``, ``metric`` and ``sample``."""

    name = "system"
    group_kind = GroupKind.INTEGER
    step = 1.0
    invertible = True
    known_spectral_type = SpectralType.UNKNOWN
    # default half-width of the profile grid, in grid steps
    default_extent = 2000
    # sup of the metric, used as the analytic bound of the wrapped pseudometric
    diameter = 1.0

    def __init__(self, **params):
        self.params = params

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"

    # group handling -----------------------------------------------------
    def group_value(self, t):
        """Validate ``t`` and return it as an int (Z) or float (sampled R)."""
        if isinstance(t, GroupElement):
            if t.kind != self.group_kind or (t.kind == GroupKind.REAL_SAMPLED and t.step != self.step):
                raise GroupMismatch(f"{t} does not belong to the group of {self.name}")
            t = t.value
        if self.group_kind == GroupKind.INTEGER:
            if isinstance(t, (bool, np.bool_)) or float(t) != int(t):
                raise GroupMismatch(f"{t!r} is not an integer")
            t = int(t)
        else:
            if on_grid(float(t), self.step) is None:
                raise GroupMismatch(f"{t!r} is not on the grid of step {self.step}")
            t = float(t)
        if not self.invertible and t < 0:
            raise GroupMismatch(f"{self.name} is a semigroup action; negative time {t} is undefined")
        return t

    def act(self, t, x):
        return self._act(self.group_value(t), x)

    def _act(self, t, x):
        raise NotImplementedError

    def metric(self, x, y):
        raise NotImplementedError

    def displacement(self, x, t):
        """``d(x, tx)`` for a batch ``x``; subclasses may override with a fast path."""
        return self.metric(x, self.act(t, x))

    def sample(self, seed, n):
        raise NotImplementedError

    def orbit_sample(self, seed, n):
        """One orbit segment ``x0, 1 x0, ..., (n-1) x0`` (unit steps of the grid)."""
        x0 = self.sample(seed, 1)
        return concat_points([self._act(k * self.step if self.group_kind == GroupKind.REAL_SAMPLED else k, x0)
                              for k in range(n)])

    def quadrature(self, n):
        raise UnsupportedMethod(f"no quadrature rule for {self.name}")

    def exact_autocorrelation(self, f, n_max):
        """Exact ``<f, T_n f>`` for ``n = 0..n_max`` when a closed route exists."""
        return None

    def coords(self, x):
        return np.asarray(x)

    def point(self, value):
        return np.atleast_1d(np.asarray(value, dtype=float)) % 1.0

    def neighbor_order(self, x):
        """Permutation of a batch that places metrically close points next to each other."""
        c = np.asarray(self.coords(x))
        if c.ndim == 1:
            return np.argsort(c, kind="stable")
        return np.lexsort(c.T[::-1])

    # observables --------------------------------------------------------
    def observables(self):
        """Names of the registered observables (parametric ones use ``name:args``)."""
        return []

    def observable(self, name):
        raise InvalidParameter(f"{self.name} has no observable {name!r}")

    def family_spec(self):
        """Default separating family as ``(observable names, weights, tail)``."""
        raise NotImplementedError

    def family(self):
        from .metrics import WeightedFamily
        names, weights, tail = self.family_spec()
        return WeightedFamily([self.observable(n) for n in names], list(weights), tail=tail)

    def spectral_observables(self):
        return []

    def describe(self):
        return {"name": self.name, "group_kind": self.group_kind.value, "step": self.step,
                "invertible": self.invertible,
                "known_spectral_type": self.known_spectral_type.value,
                "params": _jsonable(self.params)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, DynamicalSystem):
        return obj.describe()
    return obj


def _rng(seed):
    return np.random.default_rng(seed)


def _spawn(seed, k):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(k)


def _fourier_observables(coord, name, dim=1):
    """Character, cosine, sine and distance-to-origin observables on a torus."""
    if name == "exp" or name.startswith("exp:"):
        if name == "exp":
            k = np.zeros(dim)
            k[0] = 1
        else:
            k = np.array([float(v) for v in name.split(":", 1)[1].split(",")])
            if len(k) != dim:
                raise InvalidParameter(f"{name!r} needs {dim} integer frequencies")
        if dim == 1:
            return Observable(name, lambda x: np.exp(TWO_PI * 1j * k[0] * coord(x)), 1.0, real=False)
        return Observable(name, lambda x: np.exp(TWO_PI * 1j * (coord(x) @ k)), 1.0, real=False)
    if name in ("cos", "sin") or name.startswith(("cos:", "sin:")):
        fn = np.cos if name.startswith("cos") else np.sin
        i = int(name.split(":")[1]) if ":" in name else 0
        if dim == 1:
            return Observable(name, lambda x: fn(TWO_PI * coord(x)), 1.0)
        return Observable(name, lambda x: fn(TWO_PI * coord(x)[:, i]), 1.0)
    if name == "dist0":
        if dim == 1:
            return Observable(name, lambda x: circle_distance(coord(x), 0.0), 0.5)
        return Observable(name, lambda x: np.sqrt(np.sum(circle_distance(coord(x), 0.0) ** 2, axis=1)),
                          0.5 * math.sqrt(dim))
    if name == "const":
        return Observable(name, lambda x: np.ones(len(x)), 1.0)
    return None


def _flag_rational(alpha, label):
    frac = Fraction(float(alpha)).limit_denominator(10_000)
    if abs(float(frac) - float(alpha)) < 1e-12:
        warnings.warn(f"{label}={alpha!r} is rational ({frac}); the rotation is not ergodic",
                      ParameterWarning, stacklevel=3)
        return True
    return False


# ---------------------------------------------------------------------------
# toral systems


class CircleRotation(DynamicalSystem):
    """``x -> x + t alpha mod 1`` on the circle with the arc-length metric."""

    name = "CircleRotation"
    known_spectral_type = SpectralType.DISCRETE
    diameter = 0.5

    def __init__(self, alpha=GOLDEN):
        super().__init__(alpha=float(alpha))
        self.alpha = float(alpha) % 1.0
        self.rational = _flag_rational(self.alpha, "alpha")

    def _act(self, t, x):
        return (np.asarray(x) + t * self.alpha) % 1.0

    def metric(self, x, y):
        return circle_distance(x, y)

    def displacement(self, x, t):
        t = self.group_value(t)
        return np.full(len(x), float(circle_distance(t * self.alpha, 0.0)))

    def sample(self, seed, n):
        return _rng(seed).random(n)

    def orbit_sample(self, seed, n):
        x0 = _rng(seed).random()
        return (x0 + np.arange(n) * self.alpha) % 1.0

    def quadrature(self, n):
        return (np.arange(n) + 0.5) / n

    def observables(self):
        return ["exp", "exp:<k>", "cos", "sin", "dist0", "const"]

    def observable(self, name):
        obs = _fourier_observables(lambda x: np.asarray(x), name)
        if obs is None:
            return super().observable(name)
        return obs

    def family_spec(self):
        return ["exp", "cos", "dist0"], [1.0, 0.5, 0.25], 0.0

    def spectral_observables(self):
        return ["exp", "cos"]


class TorusTranslation(DynamicalSystem):
    """Translation ``x -> x + t alpha`` on the d-torus (Z-action or sampled flow)."""

    name = "TorusTranslation"
    known_spectral_type = SpectralType.DISCRETE

    def __init__(self, alpha=None, dim=2, flow=False, h=0.01):
        dim = int(dim)
        if alpha is None:
            alpha = [1.0, math.sqrt(2.0)] if flow else [math.sqrt(2.0) % 1, math.sqrt(5.0) % 1]
            alpha = (alpha + [math.sqrt(p) % 1 for p in (3, 7, 11, 13)])[:dim]
        alpha = np.asarray(alpha, dtype=float).reshape(-1)
        if len(alpha) != dim or dim < 1:
            raise InvalidParameter(f"alpha must have length dim={dim}")
        super().__init__(alpha=alpha.tolist(), dim=dim, flow=bool(flow), h=float(h))
        self.alpha = alpha if flow else alpha % 1.0
        self.dim = dim
        self.diameter = 0.5 * math.sqrt(dim)
        if flow:
            if not h > 0:
                raise InvalidParameter("grid step h must be positive")
            self.group_kind = GroupKind.REAL_SAMPLED
            self.step = float(h)
            self.default_extent = 16000
        else:
            # simultaneous returns in two dimensions need longer windows
            self.default_extent = 4000
            for i, a in enumerate(self.alpha):
                _flag_rational(a, f"alpha[{i}]")

    def _coords(self, x):
        x = np.asarray(x, dtype=float)
        return x if self.dim > 1 else x.reshape(-1, 1)

    def _act(self, t, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return (x + t * self.alpha[0]) % 1.0
        return (x + t * self.alpha) % 1.0

    def metric(self, x, y):
        d = circle_distance(self._coords(x), self._coords(y))
        return np.sqrt(np.sum(d * d, axis=1))

    def displacement(self, x, t):
        t = self.group_value(t)
        d = circle_distance(t * self.alpha, 0.0)
        return np.full(len(x), float(np.sqrt(np.sum(d * d))))

    def sample(self, seed, n):
        u = _rng(seed).random((n, self.dim))
        return u[:, 0] if self.dim == 1 else u

    def orbit_sample(self, seed, n):
        x0 = _rng(seed).random(self.dim)
        steps = np.arange(n)[:, None] * self.step
        pts = (x0 + steps * self.alpha) % 1.0
        return pts[:, 0] if self.dim == 1 else pts

    def quadrature(self, n):
        if self.dim != 1:
            raise UnsupportedMethod("quadrature is available for the 1-torus only")
        return (np.arange(n) + 0.5) / n

    def point(self, value):
        v = np.asarray(value, dtype=float) % 1.0
        return v.reshape(1, -1) if self.dim > 1 else v.reshape(1)

    def observables(self):
        return ["exp:<k1,...,kd>", "cos:<i>", "sin:<i>", "dist0", "const"]

    def observable(self, name):
        obs = _fourier_observables(self._coords, name, dim=self.dim)
        if obs is None:
            return super().observable(name)
        return obs

    def _unit(self, i):
        return "exp:" + ",".join("1" if j == i else "0" for j in range(self.dim))

    def family_spec(self):
        names = [self._unit(i) for i in range(self.dim)]
        weights = [2.0 ** -i for i in range(self.dim)]
        return names, weights, 0.0

    def spectral_observables(self):
        return [self._unit(i) for i in range(min(self.dim, 2))]


# ---------------------------------------------------------------------------
# symbolic systems


class _WordSystem(DynamicalSystem):
    """Shared machinery for systems whose points are positions in a word."""

    window = 64

    def _act(self, t, x):
        return x.shifted(t)

    def neighbor_order(self, x):
        # sort on x_0, x_1, x_-1, x_2, x_-2, ... so neighbours share long central words
        K = self.window
        cols = [K] + [K + s * k for k in range(1, K + 1) for s in (1, -1)]
        return np.lexsort(self.coords(x)[:, cols].T[::-1])

    def _check_same(self, x, y):
        if len(x) != len(y):
            raise InvalidParameter("point batches differ in length")


def _first_mismatch(xw, yw, k_max):
    """Index ``min{k : x_k != y_k or x_-k != y_-k}`` over windows of radius k_max."""
    c = k_max
    diff = xw != yw
    # fold the two sides: level k mismatches iff diff[c+k] or diff[c-k]
    both = diff[:, c:] | diff[:, c::-1]
    hit = both.any(axis=1)
    first = np.where(hit, both.argmax(axis=1), k_max + 1)
    return first


class _CylinderMixin:
    """Two-sided cylinder metric ``2^{-min{k >= 0 : x_k != y_k or x_-k != y_-k}}``.

    Windows are compared up to radius K; points that agree on the whole
    window but sit at different positions are at distance ``2^{-(K+1)}``.
    """

    def metric(self, x, y):
        self._check_same(x, y)
        K = self.window
        xw = x.word.window_view(K)[x.pos - K]
        yw = y.word.window_view(K)[y.pos - K]
        first = _first_mismatch(xw, yw, K).astype(float)
        same_word = x.word is y.word or (len(x.word) == len(y.word)
                                         and np.array_equal(x.word.symbols, y.word.symbols))
        same = (x.pos == y.pos) & same_word
        out = np.ldexp(1.0, -first.astype(int))
        out[same] = 0.0
        return out

    def displacement(self, x, t):
        t = int(self.group_value(t))
        if t == 0:
            return np.zeros(len(x))
        x.shifted(t)  # horizon check
        K = self.window
        sym = x.word.symbols
        lo = int(x.pos.min()) - K
        hi = int(x.pos.max()) + K + 1
        # distance from each word position to the nearest mismatch of x and T^t x
        mism = sym[lo:hi] != sym[lo + t:hi + t]
        ar = np.arange(hi - lo, dtype=np.int32)
        far = np.int32(1 << 30)
        prev = np.where(mism, ar, -far)
        np.maximum.accumulate(prev, out=prev)
        nxt = np.where(mism[::-1], ar[::-1], far)
        np.minimum.accumulate(nxt, out=nxt)
        nxt = nxt[::-1]
        q = (x.pos - lo).astype(np.int32)
        first = np.minimum(np.minimum(q - prev[q], nxt[q] - q), K + 1)
        return np.ldexp(1.0, -first)


class _SymbolObservables:
    """Observables reading symbols near the origin of a symbolic point."""

    def observables(self):
        return ["sym:<k>", "sign:<k>", "pair", "const"]

    def observable(self, name):
        if name.startswith("sym:"):
            k = int(name.split(":")[1])
            return Observable(name, lambda x: x.symbols_at(k).astype(float), 1.0)
        if name.startswith("sign:"):
            k = int(name.split(":")[1])
            return Observable(name, lambda x: 1.0 - 2.0 * x.symbols_at(k), 1.0)
        if name == "pair":
            return Observable(name, lambda x: 1.0 - 2.0 * ((x.symbols_at(0) + x.symbols_at(1)) % 2), 1.0)
        if name == "const":
            return Observable(name, lambda x: np.ones(len(x)), 1.0)
        return DynamicalSystem.observable(self, name)

    family_radius = 20

    def family_spec(self):
        J = self.family_radius
        ks = sorted(range(-J, J + 1), key=lambda k: (abs(k), k))
        weights = [2.0 ** -abs(k) for k in ks]
        # sum over |k| > J of 2^{-|k|} * sup|x_k|
        tail = 2.0 * 2.0 ** -J
        return [f"sym:{k}" for k in ks], weights, tail


class SubstitutionSubshift(_SymbolObservables, _CylinderMixin, _WordSystem):
    """Two-sided subshift of a primitive substitution, sampled by uniform
    positions inside a long supertile of its fixed point."""

    name = "SubstitutionSubshift"
    _types = {"FIBONACCI": SpectralType.DISCRETE,
              "THUE_MORSE": SpectralType.MIXED,
              "PERIOD_DOUBLING": SpectralType.DISCRETE}

    def __init__(self, substitution="THUE_MORSE", K=64, horizon=1 << 15, min_samples=1 << 17):
        substitutions.rule(substitution)
        super().__init__(substitution=substitution, K=int(K), horizon=int(horizon))
        self.substitution = substitution
        self.window = int(K)
        self.horizon = int(horizon)
        self.known_spectral_type = self._types[substitution]
        margin = self.horizon + self.window
        sym = substitutions.fixed_point_word(substitution, 2 * margin + int(min_samples))
        self.word = SymbolWord(sym, label=substitution)
        self._lo, self._hi = margin, len(sym) - margin

    def sample(self, seed, n):
        pos = _rng(seed).integers(self._lo, self._hi, size=n)
        return WordPoints(self.word, pos, self.window, self.window)

    def orbit_sample(self, seed, n):
        start = int(_rng(seed).integers(self._lo, self._hi - n)) if n < self._hi - self._lo else self._lo
        if start + n > self._hi:
            raise InvalidParameter(f"orbit of length {n} exceeds the backing supertile")
        return WordPoints(self.word, start + np.arange(n), self.window, self.window)

    def coords(self, x):
        K = self.window
        return x.word.window_view(K)[x.pos - K]

    def exact_autocorrelation(self, f, n_max):
        if self.substitution == "THUE_MORSE" and f.name.startswith("sign:"):
            return substitutions.thue_morse_correlation(n_max)
        return None

    def spectral_observables(self):
        return ["sign:0", "pair"] if self.substitution == "THUE_MORSE" else ["sign:0"]


class BernoulliShift(_SymbolObservables, _CylinderMixin, _WordSystem):
    """Two-sided Bernoulli(p) shift on {0, 1} with the cylinder metric."""

    name = "BernoulliShift"
    known_spectral_type = SpectralType.CONTINUOUS

    def __init__(self, p=0.5, K=64, horizon=1 << 15, spacing=4):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise InvalidParameter("p must lie in (0, 1)")
        super().__init__(p=p, K=int(K), horizon=int(horizon))
        self.p = p
        self.window = int(K)
        self.horizon = int(horizon)
        self.spacing = int(spacing)

    def _word(self, rng, n):
        margin = self.horizon + self.window
        length = self.spacing * n + 2 * margin
        sym = (rng.random(length) < self.p).astype(np.uint8)
        return SymbolWord(sym, label=f"bernoulli({self.p})"), margin

    def sample(self, seed, n):
        rng = _rng(seed)
        word, margin = self._word(rng, n)
        pos = rng.integers(margin, len(word) - margin, size=n)
        return WordPoints(word, pos, self.window, self.window)

    def orbit_sample(self, seed, n):
        rng = _rng(seed)
        word, margin = self._word(rng, max(n // self.spacing, 1) + 1)
        return WordPoints(word, margin + np.arange(n), self.window, self.window)

    def coords(self, x):
        K = self.window
        return x.word.window_view(K)[x.pos - K]

    def spectral_observables(self):
        return ["sign:0"]


class DoublingMap(DynamicalSystem):
    """``x -> 2^n x mod 1`` on the circle, an N-action.

    Points are stored exactly as binary expansions (positions in a bit
    word), so iterating the map is a shift and never loses precision.
    The coordinate of a point carries the 53 leading bits.
    """

    name = "DoublingMap"
    invertible = False
    known_spectral_type = SpectralType.CONTINUOUS
    diameter = 0.5
    bits = 53

    def __init__(self, horizon=1 << 15, spacing=64):
        super().__init__(horizon=int(horizon))
        self.horizon = int(horizon)
        self.spacing = int(spacing)

    def _act(self, t, x):
        return x.shifted(t)

    def coords(self, x):
        return x.word.binary_values[x.pos]

    def metric(self, x, y):
        return circle_distance(self.coords(x), self.coords(y))

    def sample(self, seed, n):
        rng = _rng(seed)
        length = self.spacing * n + self.horizon + 2 * self.bits
        word = SymbolWord(rng.integers(0, 2, size=length, dtype=np.uint8), label="bits")
        pos = rng.integers(0, self.spacing * n, size=n)
        return WordPoints(word, pos, 0, self.bits)

    def orbit_sample(self, seed, n):
        rng = _rng(seed)
        word = SymbolWord(rng.integers(0, 2, size=n + self.horizon + 2 * self.bits, dtype=np.uint8))
        return WordPoints(word, np.arange(n), 0, self.bits)

    def point(self, value, horizon=None):
        """Exact binary expansion of ``value`` (a Fraction, int ratio or float)."""
        frac = Fraction(value) % 1
        n_bits = (self.horizon if horizon is None else int(horizon)) + 2 * self.bits
        bits = np.empty(n_bits, dtype=np.uint8)
        num, den = frac.numerator, frac.denominator
        for i in range(n_bits):
            num *= 2
            bits[i] = num >= den
            num -= den * bits[i]
        return WordPoints(SymbolWord(bits, label=str(frac)), np.array([0]), 0, self.bits)

    def observables(self):
        return ["exp", "exp:<k>", "cos", "sin", "dist0", "const"]

    def observable(self, name):
        obs = _fourier_observables(self.coords, name)
        if obs is None:
            return super().observable(name)
        return obs

    def family_spec(self):
        return ["exp", "cos", "dist0"], [1.0, 0.5, 0.25], 0.0

    def spectral_observables(self):
        return ["exp", "cos"]


# ---------------------------------------------------------------------------
# products and the trivial system


class OnePoint(DynamicalSystem):
    name = "OnePoint"
    known_spectral_type = SpectralType.DISCRETE
    diameter = 0.0

    def _act(self, t, x):
        return np.asarray(x)

    def metric(self, x, y):
        return np.zeros(len(x))

    def sample(self, seed, n):
        return np.zeros(n)

    def orbit_sample(self, seed, n):
        return np.zeros(n)

    def quadrature(self, n):
        return np.zeros(n)

    def point(self, value=0.0):
        return np.zeros(1)

    def observables(self):
        return ["const"]

    def observable(self, name):
        if name == "const":
            return Observable(name, lambda x: np.ones(len(x)), 1.0)
        return super().observable(name)

    def family_spec(self):
        return ["const"], [1.0], 0.0

    def spectral_observables(self):
        return ["const"]


def _combine_types(a, b):
    if SpectralType.UNKNOWN in (a, b):
        return SpectralType.UNKNOWN
    if a == b == SpectralType.DISCRETE:
        return SpectralType.DISCRETE
    if a == b == SpectralType.CONTINUOUS:
        return SpectralType.CONTINUOUS
    return SpectralType.MIXED


class ProductSystem(DynamicalSystem):
    """Diagonal action on ``A x B`` with the max metric and product measure."""

    name = "ProductSystem"

    def __init__(self, a, b):
        if (a.group_kind, a.step) != (b.group_kind, b.step):
            raise GroupMismatch("product factors act by different groups")
        super().__init__(A=a, B=b)
        self.a, self.b = a, b
        self.group_kind, self.step = a.group_kind, a.step
        self.invertible = a.invertible and b.invertible
        self.known_spectral_type = _combine_types(a.known_spectral_type, b.known_spectral_type)
        self.default_extent = min(a.default_extent, b.default_extent)
        self.diameter = max(a.diameter, b.diameter)

    def _act(self, t, x):
        return ProductPoints(self.a._act(t, x.a), self.b._act(t, x.b))

    def metric(self, x, y):
        return np.maximum(self.a.metric(x.a, y.a), self.b.metric(x.b, y.b))

    def displacement(self, x, t):
        return np.maximum(self.a.displacement(x.a, t), self.b.displacement(x.b, t))

    def sample(self, seed, n):
        sa, sb = _spawn(seed, 2)
        return ProductPoints(self.a.sample(sa, n), self.b.sample(sb, n))

    def orbit_sample(self, seed, n):
        sa, sb = _spawn(seed, 2)
        return ProductPoints(self.a.orbit_sample(sa, n), self.b.orbit_sample(sb, n))

    def coords(self, x):
        return (self.a.coords(x.a), self.b.coords(x.b))

    def neighbor_order(self, x):
        return self.a.neighbor_order(x.a)

    def observables(self):
        return ([f"A.{n}" for n in self.a.observables()] + [f"B.{n}" for n in self.b.observables()]
                + ["const"])

    def observable(self, name):
        if name == "const":
            return Observable(name, lambda x: np.ones(len(x)), 1.0)
        side, _, inner = name.partition(".")
        if side == "A":
            f = self.a.observable(inner)
            return Observable(name, lambda x: f(x.a), f.sup_norm, f.real)
        if side == "B":
            f = self.b.observable(inner)
            return Observable(name, lambda x: f(x.b), f.sup_norm, f.real)
        return super().observable(name)

    def family_spec(self):
        na, wa, ta = self.a.family_spec()
        nb, wb, tb = self.b.family_spec()
        return ([f"A.{n}" for n in na] + [f"B.{n}" for n in nb], list(wa) + list(wb), ta + tb)

    def spectral_observables(self):
        return ([f"A.{n}" for n in self.a.spectral_observables()]
                + [f"B.{n}" for n in self.b.spectral_observables()])


# ---------------------------------------------------------------------------
# catalog


CATALOG = ("CircleRotation", "TorusTranslation", "DoublingMap", "BernoulliShift",
           "SubstitutionSubshift", "ProductSystem", "OnePoint", "PointSetHull")

_NAMED_CONSTANTS = {"golden": GOLDEN, "sqrt2": math.sqrt(2.0) % 1, "sqrt3": math.sqrt(3.0) % 1,
                    "sqrt5": math.sqrt(5.0) % 1}


def _number(v, path):
    if isinstance(v, str):
        try:
            return _NAMED_CONSTANTS[v]
        except KeyError:
            raise InvalidParameter(f"{path}: unknown constant {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidParameter(f"{path}: expected a number, got {v!r}")
    return float(v)


def build_system(config=None, **params):
    """Construct a catalog system from a config mapping or keyword arguments.

    ``config`` is a mapping with a ``name`` key naming a catalog entry plus
    that entry's parameters, e.g. ``{"name": "CircleRotation", "alpha":
    "golden"}``. A bare string is accepted as the name.
    """
    if isinstance(config, str):
        config = {"name": config}
    cfg = dict(config or {})
    cfg.update(params)
    name = cfg.pop("name", None)
    if name not in CATALOG:
        raise UnknownSystem(f"unknown system {name!r}; catalog: {', '.join(CATALOG)}")
    if name == "CircleRotation":
        return CircleRotation(_number(cfg.pop("alpha", GOLDEN), "alpha"), **cfg)
    if name == "TorusTranslation":
        if "alpha" in cfg and cfg["alpha"] is not None:
            cfg["alpha"] = [_number(a, "alpha") for a in cfg["alpha"]]
        return TorusTranslation(**cfg)
    if name == "DoublingMap":
        return DoublingMap(**cfg)
    if name == "BernoulliShift":
        return BernoulliShift(**cfg)
    if name == "SubstitutionSubshift":
        return SubstitutionSubshift(**cfg)
    if name == "OnePoint":
        return OnePoint()
    if name == "ProductSystem":
        try:
            a, b = cfg.pop("A"), cfg.pop("B")
        except KeyError:
            raise InvalidParameter("ProductSystem needs factor configs A and B") from None
        return ProductSystem(build_system(a), build_system(b))
    from .pointsets import PointSetHull
    return PointSetHull.from_config(**cfg)


def load_system_config(path):
    with open(path) as fh:
        return json.load(fh)


def orbit(system, x0, ts):
    """``[act(t, x0) for t in ts]``; each entry is a point batch of length 1."""
    values = [system.group_value(t) for t in ts]
    return [system._act(t, x0) for t in values]


__all__ = [
    "GroupKind", "SpectralType", "GroupElement", "Observable", "SymbolWord", "WordPoints",
    "ProductPoints", "DynamicalSystem", "CircleRotation", "TorusTranslation", "DoublingMap",
    "BernoulliShift", "SubstitutionSubshift", "ProductSystem", "OnePoint", "build_system",
    "orbit", "circle_distance", "concat_points", "CATALOG", "GOLDEN", "load_system_config",
]
