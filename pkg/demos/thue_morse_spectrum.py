"""Mixed spectrum of the Thue-Morse subshift.

The central symbol observable has a purely continuous spectral measure: its
autocorrelation, computed exactly by the recursion on the substitution, has
Cesaro-averaged square tending to 0. The pair observable x_0 x_1 lives on the
period-doubling factor and shows Bragg-type atoms at dyadic frequencies.
"""
import warnings

import numpy as np

from apspec import spectral as sp
from apspec.profiles import GroupGrid, autocorrelation_profile
from apspec.systems import build_system

warnings.simplefilter("ignore")
tm = build_system("SubstitutionSubshift")

S = autocorrelation_profile(tm, tm.observable("sign:0"), GroupGrid.symmetric(tm, 1 << 14),
                            method="EXACT")
print("S(1..4) =", np.round(S.values[(1 << 14) + 1:(1 << 14) + 5].real, 6))
w = sp.wiener_atom_mass(S, [1 << k for k in range(6, 15)])
for N, M in zip(w.Ns, w.M):
    print(f"  M_{N:<6d} = {M:.5f}")

est = sp.observable_spectrum(tm, tm.observable("pair"), N=4096, n=20_000)
print("pair observable:", est.verdict)
for a in est.atoms:
    print(f"  atom beta = {a.beta:.4f}  mass = {a.mass:.4f}")

v = sp.discrete_spectrum_verdict(tm)
print("full verdict:", v.label, v.per_observable())
