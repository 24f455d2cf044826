"""Averaged displacement of a rotation and of the doubling map, side by side.

The rotation has discrete spectrum: d_bar(t) = ||t alpha|| returns close to 0
along a relatively dense set of times, and its Fourier-Bohr frequencies are
multiples of alpha. The doubling map mixes: d_bar(n) sits at 1/4 for every
n != 0, so 0 is an isolated almost period and no eigenvalue appears.
"""
import warnings

import numpy as np

from apspec import almost_periodic as ap
from apspec import spectral as sp
from apspec.profiles import GroupGrid, compute_profiles
from apspec.systems import build_system

warnings.simplefilter("ignore")

rot = build_system("CircleRotation")
dbl = build_system("DoublingMap")

# %% profiles on shared samples
rp = compute_profiles(rot, GroupGrid.symmetric(rot, 2000), observables=[rot.observable("exp")],
                      method="QUADRATURE", n=2000)
dp = compute_profiles(dbl, GroupGrid.symmetric(dbl, 500), observables=[dbl.observable("exp")],
                      n=20_000, seed=1)
print("rotation d_bar(1..5):", np.round(rp.d_bar.values[2001:2006], 4))
print("doubling d_bar(1..5):", np.round(dp.d_bar.values[501:506], 4))

# %% almost-period scans
for name, p in (("rotation", rp.d_bar), ("doubling", dp.d_bar)):
    r = ap.scan_almost_periods(p)
    gaps = [s.max_gaps[-1] for s in r.scans]
    print(f"{name:9s} verdict {r.verdict:14s} max gaps per eps {gaps}")

eps = 0.02
periods = ap.scan_almost_periods(rp.d_bar.restrict(200), [eps], [25, 50, 100, 200])
print(f"rotation {eps}-almost periods in [0, 200]:",
      [int(t) for t in periods.almost_period_set(eps) if t >= 0])

# %% frequencies of d_bar and the eigenvalue group
fs = ap.fourier_bohr_coefficients(rp.d_bar)
for b, c in sorted(zip(fs.betas, fs.coefficients), key=lambda z: -abs(z[1]))[:4]:
    print(f"  beta = {b:.6f}  |c| = {abs(c):.4f}")
v = sp.discrete_spectrum_verdict(rot, sp.VerdictOptions(extent=4096, method="QUADRATURE",
                                                        n_samples=64, spectral_N=1024))
print("rotation verdict:", v.label, "generators", np.round(v.group.generators, 6))
v = sp.discrete_spectrum_verdict(dbl, sp.VerdictOptions(n_samples=20_000, extent=500,
                                                        spectral_N=1024))
print("doubling verdict:", v.label)
