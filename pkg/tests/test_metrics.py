import warnings

import numpy as np
import pytest

from apspec.errors import DomainMismatch, EmptyFamily, InvalidParameter, NonSeparatingFamily
from apspec.metrics import (DOMINATED, NOT_DOMINATED, WeightedFamily, check_domination,
                            delta_hat, metric_pseudometric, pseudometric_from_observable,
                            sample_pairs, weighted_pseudometric)
from apspec.profiles import GroupGrid, compute_profiles
from apspec.systems import Observable, build_system

ROT = build_system("CircleRotation")
TM = build_system("SubstitutionSubshift")
FIB = build_system({"name": "SubstitutionSubshift", "substitution": "FIBONACCI"})
DBL = build_system("DoublingMap")
EPS = [0.4, 0.2, 0.1, 0.05]


def test_observable_pseudometric_examples():
    e = pseudometric_from_observable(ROT.observable("exp"))
    assert e(np.array([0.0]), np.array([0.5]))[0] == pytest.approx(2.0, abs=1e-15)
    assert e.sup_bound == 2.0
    x = ROT.sample(0, 100)
    assert np.all(e(x, x) == 0)
    const = pseudometric_from_observable(ROT.observable("const"))
    assert np.all(const(x, ROT.sample(1, 100)) == 0)


@pytest.mark.parametrize("config", ["CircleRotation", "TorusTranslation", "DoublingMap",
                                    "BernoulliShift", "SubstitutionSubshift", "OnePoint"])
def test_observable_pseudometric_axioms(config):
    s = build_system(config)
    x = s.sample(1, 30_000)
    a, b, c = x[np.arange(10_000)], x[np.arange(10_000, 20_000)], x[np.arange(20_000, 30_000)]
    for name in s.family_spec()[0][:3] + s.spectral_observables():
        e = pseudometric_from_observable(s.observable(name))
        ab = e(a, b)
        assert np.all(ab >= 0)
        assert np.array_equal(ab, e(b, a))
        assert np.all(ab <= e(a, c) + e(c, b) + 1e-12)
        assert np.all(ab <= e.sup_bound + 1e-12)


def test_single_member_family_equals_observable_pseudometric():
    f = ROT.observable("exp")
    x, y = ROT.sample(0, 1000), ROT.sample(1, 1000)
    w = weighted_pseudometric(WeightedFamily([f], [1.0]))
    assert np.array_equal(w(x, y), pseudometric_from_observable(f)(x, y))


def test_family_scaling_is_linear_and_keeps_separation():
    fam = TM.family()
    e = weighted_pseudometric(fam, TM)
    e3 = weighted_pseudometric(fam.scaled(3.0), TM)
    x, y = sample_pairs(TM, 5, 2000)
    assert np.allclose(e3(x, y), 3.0 * e(x, y), rtol=1e-12, atol=0)
    assert e.separates and e3.separates


def test_family_errors():
    f = ROT.observable("exp")
    with pytest.raises(EmptyFamily):
        WeightedFamily([], [])
    with pytest.raises(InvalidParameter):
        WeightedFamily([f], [0.0])
    with pytest.raises(InvalidParameter):
        WeightedFamily([f, f], [1.0])
    with pytest.raises(InvalidParameter):
        WeightedFamily([f], [1.0], tail=0.1)
    with pytest.raises(EmptyFamily):
        weighted_pseudometric(None)


def test_non_separating_family_is_flagged():
    # sym:0 alone cannot separate sequences that differ elsewhere
    fam = WeightedFamily([TM.observable("sym:0")], [1.0])
    with pytest.warns(NonSeparatingFamily):
        e = weighted_pseudometric(fam, TM)
    assert e.separates is False
    assert e.separation["violations"] > 0


def test_subshift_family_and_cylinder_metric_dominate_each_other():
    for s in (TM, FIB):
        e = weighted_pseudometric(s.family(), s)
        d = metric_pseudometric(s)
        pairs = sample_pairs(s, 3, 10_000)
        assert check_domination(e, d, EPS, pairs=pairs).verdict == DOMINATED
        assert check_domination(d, e, EPS, pairs=pairs).verdict == DOMINATED


def test_domination_trivial_cases():
    f = np.abs(np.random.default_rng(0).normal(size=500))
    r = check_domination(np.zeros(500), f, EPS)
    assert r.verdict == DOMINATED and all(np.isinf(d) for d in r.delta_hat)
    r = check_domination(f, f, EPS)
    assert r.verdict == DOMINATED
    # reflexivity: the first sampled level above eps
    for eps, d in zip(EPS, r.delta_hat):
        assert d == f[f > eps].min()
        assert d == pytest.approx(eps, abs=0.02)


def test_domination_failure_has_witness():
    g = np.array([0.0, 0.9, 0.1])
    f = np.array([0.5, 0.0, 0.2])
    r = check_domination(g, f, [0.5])
    assert r.verdict == NOT_DOMINATED
    assert r.delta_hat == [0.0]
    assert r.witnesses["0.5"]["index"] == 1
    assert delta_hat(g, f, 0.05) == (0.0, 1)


def test_domination_level_and_noise_floor():
    g = np.array([0.0, 0.9, 0.1])
    f = np.array([0.0, 0.3, 0.2])
    r = check_domination(g, f, [0.5, 0.05])
    assert r.verdict == DOMINATED
    assert r.delta_hat == [0.3, 0.2]
    r = check_domination(g, f, [0.5], floor=0.3)
    assert r.verdict == NOT_DOMINATED and r.witnesses["0.5"]["index"] == 1


def test_domain_mismatch():
    ps = compute_profiles(ROT, extent=50, n=1000)
    e = metric_pseudometric(ROT)
    with pytest.raises(DomainMismatch):
        check_domination(ps.d_bar, e, EPS)
    other = compute_profiles(ROT, extent=60, n=1000).d_bar
    with pytest.raises(DomainMismatch):
        check_domination(ps.d_bar, other, EPS)
    with pytest.raises(DomainMismatch):
        check_domination(np.zeros(3), np.zeros(4), EPS)


def test_rotation_observable_average_dominated_by_d_bar():
    f = ROT.observable("exp")
    ps = compute_profiles(ROT, GroupGrid.symmetric(ROT, 500), observables=[f],
                          method="QUADRATURE", n=10_000)
    assert check_domination(ps.e_bar["exp"], ps.d_bar, EPS).verdict == DOMINATED
    # both are functions of ||t alpha||: e_bar_f = 2|sin(pi t alpha)| exactly
    t = ps.d_bar.t
    assert np.allclose(ps.e_bar["exp"].values, 2 * np.abs(np.sin(np.pi * t * ROT.alpha)), atol=1e-12)


@pytest.mark.parametrize("system", [ROT, TM, DBL], ids=["rotation", "thue_morse", "doubling"])
def test_domination_transports_to_averages(system):
    names = system.family_spec()[0][:2]
    obs = [system.observable(n) for n in names]
    fam = system.family()
    d = metric_pseudometric(system)
    candidates = [pseudometric_from_observable(f, system) for f in obs]
    candidates += [weighted_pseudometric(fam, system), d]
    pairs = sample_pairs(system, 9, 10_000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ps = compute_profiles(system, GroupGrid.symmetric(system, 300 if system is not DBL else 60),
                              observables=obs, family=fam, n=20_000, seed=2)
    averaged = [ps.e_bar[n] for n in names] + [ps.e_family, ps.d_bar]
    tested = 0
    for i, e1 in enumerate(candidates):
        for j, e2 in enumerate(candidates):
            if i == j or check_domination(e1, e2, EPS, pairs=pairs).verdict != DOMINATED:
                continue
            tested += 1
            assert check_domination(averaged[i], averaged[j], EPS).verdict == DOMINATED, (i, j)
    assert tested >= 3


def test_observable_wrapper():
    f = Observable("double", lambda x: 2 * x, 2.0)
    assert f(np.array([0.25]))[0] == 0.5
