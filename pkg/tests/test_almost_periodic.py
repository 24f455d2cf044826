import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from apspec.almost_periodic import (AP, INCONCLUSIVE, NOT_AP, almost_period_csv,
                                    cross_check_period_notions, fourier_bohr_coefficients,
                                    measure_theoretic_almost_periods, scan_almost_periods,
                                    translation_defect)
from apspec.errors import MissingZero, NonRealProfile, WindowTooSmall
from apspec.metrics import DOMINATED, Pseudometric, check_domination
from apspec.profiles import GroupGrid, Method, Profile, compute_profiles
from apspec.systems import GroupKind, build_system

ROT = build_system("CircleRotation")
DBL = build_system("DoublingMap")
BER = build_system("BernoulliShift")


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args, **kw)


@pytest.fixture(scope="module")
def rotation():
    return compute_profiles(ROT, GroupGrid.symmetric(ROT, 2000), observables=[ROT.observable("exp")],
                            method="QUADRATURE", n=1000)


@pytest.fixture(scope="module")
def doubling():
    return _quiet(compute_profiles, DBL, GroupGrid.symmetric(DBL, 500),
                  observables=[DBL.observable("exp")], n=20_000, seed=1)


def _profile(values, kind=GroupKind.INTEGER, step=1.0, stderr=None, real=True):
    values = np.asarray(values)
    E = (len(values) - 1) // 2
    grid = GroupGrid(kind, np.arange(-E, E + 1), step)
    se = np.zeros(len(values)) if stderr is None else stderr
    return Profile("test", "F", grid, values, se, Method.QUADRATURE, 0, None, real=real)


def test_rotation_almost_periods_at_fibonacci_denominators(rotation):
    assert oracles.circle_norm(34 * oracles.GOLDEN) == pytest.approx(0.01316, abs=1e-5)
    assert oracles.circle_norm(55 * oracles.GOLDEN) == pytest.approx(0.00813, abs=1e-5)
    p = rotation.d_bar.restrict(200)
    r = scan_almost_periods(p, [0.02], [25, 50, 100, 200])
    s = set(r.almost_period_set(0.02).tolist())
    assert {-55, -34, 0, 34, 55} <= s
    assert s == set(np.flatnonzero(oracles.circle_norm(np.arange(-200, 201) * oracles.GOLDEN)
                                   <= 0.02) - 200)
    assert r.verdict == AP


def test_rotation_default_scan(rotation):
    r = scan_almost_periods(rotation.d_bar)
    assert r.verdict == AP and r.witness_eps is None
    assert r.windows == [250, 500, 1000, 2000]


def test_doubling_is_not_ap(doubling):
    r = scan_almost_periods(doubling.d_bar, [0.1])
    assert r.verdict == NOT_AP and r.witness_eps == 0.1
    assert r.almost_period_set(0.1).tolist() == [0]
    assert all(s.max_gaps[-1] > 1 for s in r.scans)


def test_zero_profile_is_ap():
    r = scan_almost_periods(_profile(np.zeros(201)))
    assert r.verdict == AP
    assert all(g == 1 for s in r.scans for g in s.max_gaps)
    h = 0.01
    r = scan_almost_periods(_profile(np.zeros(201), GroupKind.REAL_SAMPLED, h))
    assert r.verdict == AP and r.scans[0].max_gaps[-1] == pytest.approx(h)


def test_noise_prevents_a_false_not_ap():
    v = np.full(201, 0.5)
    v[100] = 0.0
    assert scan_almost_periods(_profile(v), [0.1]).verdict == NOT_AP
    noisy = _profile(v, stderr=np.full(201, 0.1))
    assert scan_almost_periods(noisy, [0.1]).verdict != NOT_AP


def test_growing_gaps_are_inconclusive():
    # almost periods only at +-2^k: gaps double with the window
    v = np.ones(2049)
    for k in range(12):
        for s in (-1, 1):
            if abs(s * 2 ** k) <= 1024:
                v[1024 + s * 2 ** k] = 0.0
    v[1024] = 0.0
    r = scan_almost_periods(_profile(v), [0.2], [128, 256, 512, 1024])
    assert r.verdict == INCONCLUSIVE


def test_nestedness(rotation, doubling):
    for p in (rotation.d_bar, rotation.F["exp"], doubling.d_bar, doubling.F["exp"]):
        r = scan_almost_periods(p)
        sets = [set(r.almost_period_set(e).tolist()) for e in r.eps_grid]
        for big, small in zip(sets, sets[1:]):
            assert small <= big
        assert all(0 in s for s in sets)


def test_scan_errors():
    with pytest.raises(NonRealProfile):
        scan_almost_periods(_profile(np.zeros(21, complex), real=False))
    v = np.ones(21)
    with pytest.raises(MissingZero):
        scan_almost_periods(_profile(v))
    with pytest.raises(WindowTooSmall):
        scan_almost_periods(_profile(np.zeros(5)))
    with pytest.raises(WindowTooSmall):
        scan_almost_periods(_profile(np.zeros(21)), windows=[5, 50])


def test_almost_period_csv():
    v = np.array([0.3, 0.1, 0.0, 0.1, 0.3])
    rows = almost_period_csv(_profile(v), 0.2).splitlines()
    assert rows[0] == "t,abs_F,included"
    assert [r.split(",")[2] for r in rows[1:]] == ["0", "1", "1", "1", "0"]


@settings(max_examples=50, deadline=None)
@given(arrays(float, 41, elements=st.floats(0, 1)), arrays(float, 41, elements=st.floats(0, 1)))
def test_preservation_under_domination(a, b):
    a[20] = b[20] = 0.0
    F1, F2 = _profile(a), _profile(b)
    eps_grid = [0.5, 0.25, 0.1]
    r = check_domination(F1, F2, eps_grid)
    for eps, d in zip(eps_grid, r.delta_hat):
        close = F2.t[np.abs(F2.values) < d]
        assert np.all(np.abs(F1.values[np.isin(F1.t, close)]) <= eps)
    if r.verdict == DOMINATED:
        assert all(d > 0 for d in r.delta_hat)


def test_translation_defect_of_autocorrelation(rotation, doubling):
    D = translation_defect(rotation.S["exp"])
    assert D.real and D.at(0) == 0.0
    assert scan_almost_periods(D).verdict == AP
    D = translation_defect(doubling.S["exp"])
    assert scan_almost_periods(D).verdict == NOT_AP


def test_fourier_bohr_of_rotation_character(rotation):
    fs = fourier_bohr_coefficients(rotation.S["exp"], N=2000)
    assert len(fs) == 1
    assert fs.betas[0] == pytest.approx(oracles.GOLDEN, abs=fs.resolution)
    assert abs(fs.magnitudes[0] - 1.0) < 1e-3
    # off-peak coefficients decay at rate O(1/N)
    off = fourier_bohr_coefficients(rotation.S["exp"], [0.1, 0.3], N=2000, theta=0.0, taper="none")
    assert np.all(off.magnitudes < 2.0 / 2000)


def test_fourier_bohr_of_constant():
    fs = fourier_bohr_coefficients(_profile(np.ones(201)))
    assert fs.betas.tolist() == [0.0]
    assert fs.coefficients[0] == pytest.approx(1.0, abs=1e-12)


def test_fourier_bohr_of_d_bar_matches_sawtooth_series(rotation):
    fs = fourier_bohr_coefficients(rotation.d_bar)
    ks = np.arange(-40, 41)
    for b in fs.betas:
        dist = oracles.circle_norm(b - ks * oracles.GOLDEN)
        assert dist.min() <= fs.resolution
    c = fourier_bohr_coefficients(rotation.d_bar, [0.0, oracles.GOLDEN, (3 * oracles.GOLDEN) % 1],
                                  theta=0.0)
    expected = [oracles.sawtooth_coefficient(k) for k in (0, 1, 3)]
    assert np.allclose(c.coefficients.real, expected, atol=2e-3)
    assert abs(fourier_bohr_coefficients(rotation.d_bar, [0.2], theta=0.0).magnitudes[0]) < 2e-3


def test_fourier_bohr_errors(rotation):
    with pytest.raises(WindowTooSmall):
        fourier_bohr_coefficients(rotation.d_bar, N=5)
    with pytest.raises(WindowTooSmall):
        fourier_bohr_coefficients(rotation.d_bar, N=5000)


def test_fourier_bohr_magnitudes_bounded(rotation, doubling):
    for p in (rotation.d_bar, rotation.S["exp"], doubling.d_bar, doubling.S["exp"]):
        fs = fourier_bohr_coefficients(p)
        assert np.all(fs.magnitudes <= np.abs(p.values).max() + 1e-12)


def test_zero_frequency_of_autocorrelation_bounds_squared_mean():
    f = BER.observable("sym:0")
    ps = _quiet(compute_profiles, BER, GroupGrid.symmetric(BER, 200), observables=[f],
                n=20_000, seed=2)
    S = ps.S["sym:0"]
    c0 = fourier_bohr_coefficients(S, [0.0], theta=0.0).coefficients[0].real
    x = BER.sample(2, 20_000)
    m = f(x).mean()
    se = f(x).std(ddof=1) / np.sqrt(20_000)
    assert c0 >= m ** 2 - 3 * se
    assert c0 == pytest.approx(0.25, abs=0.01)


def test_measure_periods_rotation():
    mp = measure_theoretic_almost_periods(ROT, eps=0.02, grid=GroupGrid.symmetric(ROT, 500),
                                          n=2000)
    t = np.arange(-500, 501)
    assert set(mp.periods.tolist()) == set(t[oracles.circle_norm(t * oracles.GOLDEN) <= 0.02].tolist())
    assert set(np.unique(mp.fraction)) <= {0.0, 1.0}
    assert mp.fraction[500] == 0.0


def test_measure_periods_doubling():
    mp = measure_theoretic_almost_periods(DBL, eps=0.1, grid=GroupGrid.symmetric(DBL, 100),
                                          n=20_000, seed=3)
    assert mp.periods.tolist() == [0]
    # exceedance law of ||(2^n - 1) x|| is uniform on [0, 1/2]
    nz = mp.t != 0
    assert np.all(np.abs(mp.fraction[nz] - 0.8) < 5 * mp.stderr[nz] + 1e-3)


def test_cross_check_both_directions():
    g = GroupGrid.symmetric(ROT, 500)
    assert cross_check_period_notions(ROT, grid=g, n=2000).consistent
    r = _quiet(cross_check_period_notions, DBL, grid=GroupGrid.symmetric(DBL, 500), n=20_000)
    assert r.consistent
    assert all(row["measure_periods"] == 1 for row in r.rows if row["eps"] <= 0.2)


def test_cross_check_zero_pseudometric():
    zero = Pseudometric("zero", lambda x, y: np.zeros(len(x)), 0.0, system=None)
    r = cross_check_period_notions(ROT, zero, grid=GroupGrid.symmetric(ROT, 50), n=100)
    assert r.consistent
    assert all(row["measure_periods"] == 101 and row["average_periods"] == 101 for row in r.rows)


def test_sampled_real_line_uses_one_step_slack():
    # ||t / p|| sampled with a step that does not divide p: the grid misses the
    # true periods by up to h / 2, and subadditivity bounds the loss by P(h)
    h, p = 0.1, 1.234
    E = 2000
    t = np.arange(-E, E + 1) * h
    values = oracles.circle_norm(t / p)
    prof = _profile(values, GroupKind.REAL_SAMPLED, h)
    r = scan_almost_periods(prof, [0.01])
    scan = r.scans[0]
    assert scan.slack == pytest.approx(oracles.circle_norm(h / p))
    assert r.verdict == AP
    assert scan.max_gaps[-1] <= p + h + 1e-9
    assert scan_almost_periods(_profile(values[::10][E // 10 - 100:E // 10 + 101])).scans[0].slack == 0
