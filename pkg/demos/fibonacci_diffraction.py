"""Diffraction of the Fibonacci chain compared with the integer lattice.

The Patterson autocorrelation of the chain is supported on Z + phi Z, its
Fourier transform concentrates on a dense set of Bragg peaks indexed by
(m + n phi) / sqrt(5), and the averaged autocorrelation of N_phi over the
hull agrees with (phi * phi~) convolved with the autocorrelation measure.
"""
import math

import numpy as np

from apspec import pointsets as dif

PHI = (1 + math.sqrt(5)) / 2

lat = dif.generate_point_set("LATTICE", 1e4)
fib = dif.generate_point_set("FIBONACCI_CHAIN", 1e4)
print(f"lattice: {len(lat)} points; Fibonacci: {len(fib)} points, density "
      f"{fib.empirical_density:.5f} (expected {fib.density:.5f})")

spec = dif.diffraction(dif.patterson_autocorrelation(lat, 500), k_max=3.0)
print("lattice peaks:", [(round(p.k, 3), round(p.intensity, 4)) for p in spec.peaks])

ac = dif.patterson_autocorrelation(fib, 1000)
print("Fibonacci autocorrelation atoms within |z| <= 3:")
for z, w, (m, n) in zip(ac.z, ac.w, ac.golden):
    if 0 <= z <= 3:
        print(f"  z = {z:.4f} = {m} + {n} phi   weight {w:.4f}")

spec = dif.diffraction(ac, k_max=2.0)
top = sorted(spec.peaks, key=lambda p: -p.intensity)[:8]
for p in top:
    q = p.k * math.sqrt(5)
    n = min(range(-10, 11), key=lambda n: abs(q - n * PHI - round(q - n * PHI)))
    m = round(q - n * PHI)
    print(f"  k = {p.k:+.4f} ~ ({m} + {n} phi)/sqrt5   I = {p.intensity:.4f}")

tri = dif.TestFunction("TRIANGLE", 0.5)
chk = dif.gamma_identity_check(fib, tri, np.arange(-3, 3.01, 0.5))
print(f"autocorrelation identity residual: {chk.residual:.2e}")
