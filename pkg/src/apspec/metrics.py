"""Pseudometrics built from observables and the empirical domination relation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatch, EmptyFamily, InvalidParameter, NonSeparatingFamily

DOMINATED = "DOMINATED_CONSISTENT"
NOT_DOMINATED = "NOT_DOMINATED"

# truncated tails of a weighted family must stay below this share of the total
TAIL_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class Pseudometric:
    """A pseudometric ``e(x, y)`` on point batches.

    ``components`` lists ``(weight, observable)`` when ``e`` is a weighted sum
    of ``e_f = |f(x) - f(y)|``; it is empty when ``e`` wraps the metric of
    ``system``. Profiles use the components to share one evaluation of each
    observable across the whole grid.
    """

    name: str
    func: object
    sup_bound: float
    components: tuple = ()
    system: object = None
    separates: bool | None = None
    separation: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return np.asarray(self.func(x, y), dtype=float)

    eval = __call__

    @property
    def is_metric(self):
        return not self.components and self.system is not None

    def displacement(self, x, t, system=None):
        """``e(x, tx)`` for a batch ``x``."""
        system = system or self.system
        if self.is_metric:
            return system.displacement(x, t)
        y = system.act(t, x)
        return self(x, y)


def metric_pseudometric(system):
    """The metric ``d`` of a system wrapped as a :class:`Pseudometric`."""
    return Pseudometric("d", system.metric, float(system.diameter), system=system, separates=True)


def pseudometric_from_observable(f, system=None):
    """``e_f(x, y) = |f(x) - f(y)|`` with ``sup_bound = 2 ||f||_inf``."""
    return Pseudometric(f"e[{f.name}]", lambda x, y: np.abs(f(x) - f(y)),
                        2.0 * f.sup_norm, components=((1.0, f),), system=system)


class WeightedFamily:
    """Observables ``f_n`` with strictly positive weights ``c_n``.

    ``tail`` bounds ``sum c_n ||f_n||_inf`` over the members dropped when a
    countable family was truncated; it must be below ``1e-6`` of the total.
    """

    def __init__(self, observables, weights, tail=0.0):
        observables = list(observables)
        weights = [float(c) for c in weights]
        if not observables:
            raise EmptyFamily("a weighted family needs at least one observable")
        if len(weights) != len(observables):
            raise InvalidParameter("one weight per observable is required")
        if any(not c > 0 for c in weights):
            raise InvalidParameter("weights must be strictly positive")
        self.observables = observables
        self.weights = weights
        self.tail = float(tail)
        self.mass = sum(c * f.sup_norm for c, f in zip(weights, observables))
        total = self.mass + self.tail
        self.tail_ratio = self.tail / total if total > 0 else 0.0
        if self.tail_ratio >= TAIL_TOLERANCE:
            raise InvalidParameter(f"truncation tail {self.tail:.3g} is {self.tail_ratio:.3g} "
                                   f"of the total weight (limit {TAIL_TOLERANCE:g})")

    def __len__(self):
        return len(self.observables)

    def __iter__(self):
        return iter(zip(self.weights, self.observables))

    def scaled(self, lam):
        return WeightedFamily(self.observables, [lam * c for c in self.weights], lam * self.tail)

    @property
    def names(self):
        return [f.name for f in self.observables]

    def describe(self):
        return {"observables": self.names, "weights": self.weights, "tail": self.tail,
                "tail_ratio": self.tail_ratio}


def sample_pairs(system, seed, n):
    """Pairs mixing independent draws with sorted-neighbour (close) pairs.

    Independent pairs probe large distances; neighbours in
    ``system.neighbor_order`` probe the small-distance regime that
    domination and separation statements are about.
    """
    half = n // 2
    ss = np.random.SeedSequence(seed).spawn(2)
    x = system.sample(ss[0], n - half + 1)
    order = system.neighbor_order(x)
    near_a, near_b = _index(x, order[:-1]), _index(x, order[1:])
    # a second sample from the same sampler (same backing data) gives independent partners
    perm = np.random.default_rng(ss[1]).permutation(len(x))[: max(half, 0)]
    far_a = _index(x, np.arange(len(perm)))
    far_b = _index(x, perm)
    from .systems import concat_points
    if half == 0:
        return near_a, near_b
    return concat_points([near_a, far_a]), concat_points([near_b, far_b])


def _index(points, idx):
    return points[idx]


def weighted_pseudometric(fam, system=None, delta_sep=1e-3, n_pairs=10_000, seed=0):
    """``sum_n c_n e_{f_n}``; with a system, records an empirical separation check.

    The family is reported as separating when no sampled pair has
    ``d(x, y) > delta_sep`` while the weighted pseudometric vanishes.
    """
    if fam is None or len(fam) == 0:
        raise EmptyFamily("empty family")
    comps = tuple(fam)

    def func(x, y):
        total = 0.0
        for c, f in comps:
            total = total + c * np.abs(f(x) - f(y))
        return total

    name = "+".join(f"{c:g}*e[{f.name}]" for c, f in comps)
    separates, info = None, {}
    if system is not None:
        x, y = sample_pairs(system, seed, n_pairs)
        d = system.metric(x, y)
        e = func(x, y)
        bad = np.flatnonzero((d > delta_sep) & (e <= 1e-15))
        separates = len(bad) == 0
        info = {"delta_sep": delta_sep, "n_pairs": len(d), "violations": int(len(bad)),
                "seed": seed}
        if len(bad):
            info["witness_distance"] = float(d[bad[0]])
            warnings.warn(f"family {name} does not separate points: {len(bad)} sampled pairs "
                          f"with d > {delta_sep} and zero pseudodistance", NonSeparatingFamily,
                          stacklevel=2)
    return Pseudometric(name, func, 2.0 * fam.mass, components=comps, system=system,
                        separates=separates, separation=info)


@dataclass
class DominationReport:
    """Empirical evidence for ``g < f`` (smallness of ``f`` forces smallness of ``g``).

    ``delta_hat[i]`` is the supremum of the levels ``delta`` such that every
    sample with ``|f| < delta`` has ``|g| <= eps_grid[i]``, i.e. the smallest
    ``|f|`` among the samples violating ``|g| <= eps``. It is ``inf`` when no
    sample violates and ``0`` when a violating sample has ``|f|`` at or below
    the noise floor.
    """

    eps_grid: list
    delta_hat: list
    verdict: str
    witnesses: dict
    n_samples: int
    domain: str
    floor: float = 0.0

    def to_dict(self):
        return {"eps_grid": list(map(float, self.eps_grid)),
                "delta_hat": [float(d) if np.isfinite(d) else "inf" for d in self.delta_hat],
                "verdict": self.verdict, "witnesses": self.witnesses,
                "n_samples": self.n_samples, "domain": self.domain, "floor": self.floor}


def _values(obj, pairs):
    from .profiles import Profile
    if isinstance(obj, Profile):
        return np.abs(obj.values), ("grid", obj.grid)
    if isinstance(obj, Pseudometric):
        if pairs is None:
            raise DomainMismatch("pseudometrics need a common sample of pairs")
        return obj(*pairs), ("pairs", None)
    arr = np.abs(np.asarray(obj))
    return arr, ("array", arr.shape)


def delta_hat(gv, fv, eps, floor=0.0):
    """Smallest sampled ``|f|`` among samples with ``|g| > eps``, and its index.

    Levels at or below ``floor`` count as zero.
    """
    bad = np.flatnonzero(gv > eps)
    if len(bad) == 0:
        return np.inf, None
    i = int(bad[np.argmin(fv[bad])])
    d = float(fv[i])
    return (0.0 if d <= floor else d), i


def check_domination(g, f, eps_grid, pairs=None, system=None, n_pairs=10_000, seed=0,
                     floor=0.0):
    """Empirical test of ``g < f`` on a common sample domain.

    ``g`` and ``f`` are both Profiles on the same grid, both Pseudometrics
    (evaluated on ``pairs`` or on pairs drawn from ``system``), or arrays of
    equal shape. A violating sample whose ``|f|`` is at most ``floor`` (for
    instance a multiple of the standard error of ``f``) refutes domination.
    """
    from .profiles import Profile
    if isinstance(g, Pseudometric) and isinstance(f, Pseudometric) and pairs is None:
        system = system or g.system or f.system
        if system is None:
            raise DomainMismatch("no system to draw pairs from")
        pairs = sample_pairs(system, seed, n_pairs)
    if isinstance(g, Profile) != isinstance(f, Profile):
        raise DomainMismatch("cannot compare a profile with a pseudometric")
    gv, (gk, gd) = _values(g, pairs)
    fv, (fk, fd) = _values(f, pairs)
    if gk != fk or gv.shape != fv.shape:
        raise DomainMismatch("g and f are not evaluated on a common domain")
    if gk == "grid" and not gd.same_as(fd):
        raise DomainMismatch("profiles live on different grids")
    deltas, witnesses = [], {}
    for eps in eps_grid:
        d, i = delta_hat(gv, fv, eps, floor)
        deltas.append(d)
        if d == 0.0:
            w = {"index": i, "f": float(fv[i]), "g": float(gv[i])}
            if gk == "grid":
                w["t"] = float(gd.values[i])
            witnesses[f"{eps:g}"] = w
    verdict = DOMINATED if all(d > 0 for d in deltas) else NOT_DOMINATED
    return DominationReport(list(eps_grid), deltas, verdict, witnesses, int(gv.size), gk,
                            float(floor))


__all__ = ["Pseudometric", "WeightedFamily", "metric_pseudometric", "pseudometric_from_observable",
           "weighted_pseudometric", "check_domination", "DominationReport", "sample_pairs",
           "delta_hat", "DOMINATED", "NOT_DOMINATED"]
