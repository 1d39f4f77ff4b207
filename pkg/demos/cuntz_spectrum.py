"""Weighted shifts on the full n-shift with the canonical isometry.

The spectral radius of aT is exp(P(ln(|a|^2 rho)) / 2); without isolated
points the spectrum is the full disk of that radius.

Run: python3 demos/cuntz_spectrum.py
"""
import math

from thermoshift import potentials as pot
from thermoshift import sft, spectra

n = 3
A = sft.full_shift(n)
rho = pot.uniform_cocycle(A)

print("r(T)             =", spectra.cuntz_krieger_radius(A, pot.constant(A, 1.0)).radius)
for i in range(n):
    s_i = pot.pointwise(pot.indicator(A, (i,)), op="scale", t=math.sqrt(n))
    print(f"r(sqrt(n) 1_C{i} T) =", spectra.cuntz_krieger_radius(A, s_i).radius)

a = pot.from_function(A, 1, lambda w: [0.5, 1.0, 2.5][w[0]])
desc = spectra.spectrum_sft(A, a, rho)
var = spectra.variational_radius(A, a, rho, restarts=20)
print(f"spectrum of aT: disk of radius {desc.disk_radius:.12f} (certified={desc.certified})")
print(f"variational side          {var:.12f}")
print("hypotheses:", desc.hypotheses)

# With a sink cycle the theorem does not apply; the output is a labelled diagnostic.
B = sft.validate([[0, 1], [1, 0]])
d = spectra.spectrum_sft(B, pot.from_function(B, 1, lambda w: [2.0, 0.5][w[0]]), pot.constant(B, 1.0, 2))
print("two-cycle diagnostic:", d.to_json())
