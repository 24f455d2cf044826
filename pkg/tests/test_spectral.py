import warnings

import numpy as np
import pytest

import oracles
from apspec import almost_periodic as ap
from apspec.errors import NonSeparatingFamily, UnsupportedGroup, WindowTooSmall
from apspec.metrics import WeightedFamily
from apspec.profiles import GroupGrid, Method, Profile, autocorrelation_profile, compute_profiles
from apspec.spectral import (CONTINUOUS, DISCRETE, NOT_DISCRETE, PURE_POINT,
                             VerdictOptions, cross_equivalence_suite, discrete_spectrum_verdict,
                             estimate_spectrum, extract_atoms, generate_group,
                             gram_min_eigenvalue, nf_consistency, observable_spectrum,
                             wiener_atom_mass)
from apspec.systems import GroupKind, build_system

ROT = build_system("CircleRotation")
DBL = build_system("DoublingMap")
TM = build_system("SubstitutionSubshift")
FIB = build_system({"name": "SubstitutionSubshift", "substitution": "FIBONACCI"})
PD = build_system({"name": "SubstitutionSubshift", "substitution": "PERIOD_DOUBLING"})


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args, **kw)


@pytest.fixture(scope="module")
def rot_S():
    return autocorrelation_profile(ROT, ROT.observable("exp"), GroupGrid.symmetric(ROT, 2048),
                                   method="QUADRATURE", n=64)


@pytest.fixture(scope="module")
def dbl_S():
    return _quiet(autocorrelation_profile, DBL, DBL.observable("exp"),
                  GroupGrid.symmetric(DBL, 1024), n=50_000, seed=1)


def _const_profile(E=256):
    grid = GroupGrid(GroupKind.INTEGER, np.arange(-E, E + 1))
    return Profile("S[const]", "S", grid, np.ones(2 * E + 1, complex), np.zeros(2 * E + 1),
                   Method.QUADRATURE, 0, None, real=False, meta={"observable": "const"})


def test_wiener_mass_rotation(rot_S):
    w = wiener_atom_mass(rot_S, [16, 256, 2048])
    assert np.allclose(w.M, 1.0, atol=1e-12)
    assert w.at(256) == pytest.approx(1.0)


def test_wiener_mass_doubling(dbl_S):
    w = wiener_atom_mass(dbl_S, [8, 64, 512, 1024])
    # only the n = 0 term survives, up to sampling noise |S(n)|^2 ~ 1/n_samples
    assert np.all(np.abs(w.M - 1.0 / (2 * w.Ns + 1)) < 1e-4)
    assert w.limit_debiased < 1e-3


def test_wiener_mass_constant_and_errors(rot_S):
    w = wiener_atom_mass(_const_profile())
    assert np.allclose(w.M, 1.0)
    with pytest.raises(WindowTooSmall):
        wiener_atom_mass(rot_S, [4096])


def test_atoms_rotation(rot_S):
    atoms = extract_atoms(rot_S)
    assert len(atoms) == 1
    assert atoms[0].beta == pytest.approx(oracles.GOLDEN, abs=1 / (2 * 2048))
    assert atoms[0].mass == pytest.approx(1.0, abs=1e-3)


def test_atoms_doubling_and_constant(dbl_S):
    assert extract_atoms(dbl_S, theta=0.05) == []
    atoms = extract_atoms(_const_profile())
    assert [(a.beta, round(a.mass, 12)) for a in atoms] == [(0.0, 1.0)]


def test_thue_morse_central_observable_is_continuous():
    est = observable_spectrum(TM, TM.observable("sign:0"), N=1 << 14)
    assert est.profile.method == Method.EXACT
    assert est.atoms == []
    assert est.verdict == CONTINUOUS
    w = est.wiener
    assert w.at(w.Ns[-1]) <= 0.01
    # the Wiener means keep decreasing along dyadic windows
    dyadic = wiener_atom_mass(est.profile, [1 << k for k in range(6, 15)]).M
    assert np.all(np.diff(dyadic) < 0)


def test_estimate_verdicts(rot_S, dbl_S):
    assert estimate_spectrum(rot_S).verdict == PURE_POINT
    assert estimate_spectrum(dbl_S).verdict == CONTINUOUS
    assert estimate_spectrum(_const_profile()).verdict == PURE_POINT


@pytest.mark.parametrize("system,obs", [(FIB, "sign:0"), (PD, "sign:0"), (TM, "pair")],
                         ids=["fibonacci", "period_doubling", "thue_morse_pair"])
def test_atom_masses_match_wiener_limit(system, obs):
    est = _quiet(observable_spectrum, system, system.observable(obs), N=4096, n=20_000)
    assert est.verdict == PURE_POINT
    assert sum(a.mass for a in est.atoms) <= est.s0 + 1e-9
    # Wiener: the Cesaro mean of |S|^2 tends to the sum of squared atom masses
    assert abs(est.atomic_mass_sq - est.wiener.limit) <= 0.02 * est.s0


def _gram_checks(S, floor):
    s0 = S.at(0)
    assert s0.imag == 0.0
    assert np.all(np.abs(S.values) <= s0.real + 1e-12)
    rng = np.random.default_rng(1)
    for _ in range(5):
        pts = rng.choice(np.arange(-32, 33), size=8, replace=False)
        assert gram_min_eigenvalue(S, pts) >= -floor


def test_autocorrelation_positive_definite_exact_routes():
    S = autocorrelation_profile(ROT, ROT.observable("cos"), GroupGrid.symmetric(ROT, 64),
                                method="QUADRATURE", n=1000)
    _gram_checks(S, 1e-8 * S.at(0).real)
    S = autocorrelation_profile(TM, TM.observable("sign:0"), GroupGrid.symmetric(TM, 64),
                                method="EXACT")
    _gram_checks(S, 1e-8)


def test_autocorrelation_positive_definite_monte_carlo():
    # a sample average is not exactly positive definite: allow the spectral norm
    # of an 8x8 perturbation of entries of size 4 stderr
    for s, name in [(TM, "sign:0"), (DBL, "cos"), (FIB, "sign:0")]:
        S = _quiet(autocorrelation_profile, s, s.observable(name), GroupGrid.symmetric(s, 64),
                   n=20_000, seed=3)
        _gram_checks(S, 8 * 4 * float(S.stderr.max()))


def test_group_closure():
    g = generate_group([oracles.GOLDEN], 1e-4, "FROM_OBSERVABLES")
    assert g.contains(0.0)
    for k in range(-10, 11):
        assert g.contains((k * oracles.GOLDEN) % 1.0)
    assert all(g.contains((-e) % 1.0) for e in g.elements)
    assert len(g.elements) == 199
    rational = generate_group([0.25], 1e-6, "FROM_OBSERVABLES")
    assert sorted(rational.elements) == [0.0, 0.25, 0.5, 0.75]
    line = generate_group([1.5], 1e-6, "FROM_D_UNDERLINE", GroupKind.REAL_SAMPLED, bound=4.0)
    assert sorted(line.elements) == [-3.0, -1.5, 0.0, 1.5, 3.0]


def test_nf_consistency_rotation(rot_S):
    est = estimate_spectrum(rot_S)
    r = nf_consistency(est, {0: 1.0}, {0: 1.0})
    assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0, abs=1e-3)
    assert r.consistent
    phi = {0: 1.0, 3: -0.5j, -7: 0.25}
    psi = {1: 2.0, -2: 1.0}
    assert nf_consistency(est, phi, psi).consistent
    z = nf_consistency(est, {}, psi)
    assert z.lhs == 0 and z.rhs == 0 and z.residual == 0.0


def test_nf_consistency_doubling(dbl_S):
    est = estimate_spectrum(dbl_S)
    r = nf_consistency(est, {0: 1.0}, {0: 1.0})
    assert r.lhs == pytest.approx(1.0) and r.rhs == 0
    assert r.residual == pytest.approx(1.0)
    assert r.consistent and r.residual <= est.continuous_remainder + r.bound


def test_nf_consistency_rejects_real_line_without_riemann_flag():
    flow = build_system({"name": "TorusTranslation", "flow": True})
    S = autocorrelation_profile(flow, flow.observable("exp:1,0"), GroupGrid.symmetric(flow, 400),
                                n=200)
    est = estimate_spectrum(S)
    with pytest.raises(UnsupportedGroup):
        nf_consistency(est, {0: 1.0}, {0: 1.0})
    r = nf_consistency(est, {0: 1.0, 5: 1.0}, {0: 1.0}, allow_riemann=True)
    assert r.riemann and r.consistent


def test_one_point_verdict():
    v = discrete_spectrum_verdict(build_system("OnePoint"), VerdictOptions(n_samples=100, extent=64,
                                                                           spectral_N=64))
    assert v.label == DISCRETE
    assert v.group.elements == [0.0]


def test_rotation_verdict_and_group():
    v = discrete_spectrum_verdict(ROT, VerdictOptions(n_samples=200, extent=2000,
                                                      spectral_N=1024, method="QUADRATURE"))
    assert v.label == DISCRETE
    assert v.group.contains(oracles.GOLDEN)
    assert v.per_observable()["exp"] == PURE_POINT


def test_doubling_verdict():
    v = _quiet(discrete_spectrum_verdict, DBL,
               VerdictOptions(n_samples=20_000, extent=500, spectral_N=1024))
    assert v.label == NOT_DISCRETE
    assert v.witness_eps is not None and v.group is None
    assert all(est.verdict == CONTINUOUS for est in v.spectra.values())


def test_equivalence_suite_rotation_and_doubling():
    m = cross_equivalence_suite(ROT, n=500, extent=1000, method="QUADRATURE")
    assert m.agree and set(m.notions.values()) == {ap.AP}
    m = _quiet(cross_equivalence_suite, DBL, n=10_000, extent=500)
    assert m.agree and set(m.notions.values()) == {ap.NOT_AP}


def test_equivalence_suite_constant_family():
    fam = WeightedFamily([ROT.observable("const")], [1.0])
    with pytest.warns(NonSeparatingFamily):
        m = cross_equivalence_suite(ROT, fam, n=500, extent=200, method="QUADRATURE")
    assert m.separates is False
    assert "F[const]" in m.rows and "d_bar" in m.rows
