"""Predicted spectrum of the bilateral-plus-unilateral tree and its numerical check.

The system glues a bilateral shift with weight 2 and a unilateral shift with
weight 1/2 at one vertex. The prediction is {|z| <= 1/2} U {|z| = 2}, which
misses the unit circle even though naive invariance arguments suggest an
annulus.

Run: python3 demos/tree_lab.py [--full]   (--full uses windows 100,200,400)
"""
import sys

import numpy as np

from thermoshift import treelab

T = treelab.build_example_contrexample()
pred = treelab.predicted_spectrum(T)
dec = treelab.decompose_invariant(T)
print("prediction:", pred.to_json())
print("bijective components:", [c.describe() for c in dec.bijective_components])

windows = (100, 200, 400) if "--full" in sys.argv else (25, 50, 100)
grid = treelab.GridSpec(64, 64, extra_radii=(1.0, 2.0))
lab = treelab.pseudospectrum(T, windows, grid)
print("windows", windows, "counts", lab.counts())
for r in (0.3, 0.5, 1.0, 1.5, 2.0):
    k = int(np.argmin(np.abs(lab.radii - r)))
    print(f"|z| = {lab.radii[k]:.4f}: sigma_min {np.round(lab.values[k, 0], 4).tolist()} -> {lab.verdicts[k, 0]}")
cmp = lab.comparison()
print("contradictions:", cmp["contradictions"], " undecided fraction:", round(cmp["undecided_fraction"], 4))
