"""Pressure, the Gibbs measure and the variational principle on the golden mean shift.

Run: python3 demos/pressure_and_gibbs.py
"""
import math

import numpy as np

from thermoshift import measures, ruelle, sft
from thermoshift import potentials as pot

A = sft.golden_mean()
gamma = (1 + 5 ** 0.5) / 2

# Zero potential: pressure is the topological entropy ln(gamma).
p0 = ruelle.pressure(A, pot.constant(A, 0.0))
print(f"P(0)            = {p0.value:.15f}   ln(gamma) = {math.log(gamma):.15f}")
print(f"  enclosure       [{p0.enclosure[0]:.15f}, {p0.enclosure[1]:.15f}]")

# A depth-2 potential favouring the self-loop at 0.
b = pot.from_mapping(A, 2, {"00": 0.4, "01": -0.1, "10": 0.0})
P = ruelle.pressure(A, b).value
mu = ruelle.gibbs_markov(A, pot.exp(b))
J = measures.integrate(mu, b) + measures.entropy(mu)
print(f"P(b)            = {P:.12f}")
print(f"J(Gibbs measure)= {J:.12f}   (equilibrium attained)")
print("Gibbs transition matrix Q:\n", np.round(mu.Q, 6))

# The variational search never touches the transfer matrix.
res = measures.variational_search(A, b, restarts=20)
print(f"variational max = {res.value:.12f}   gap {P - res.value:.2e}")

# Zero weights are allowed: ln 0 = -inf removes edges.
cut = pot.log(pot.from_mapping(A, 2, {"00": 0.0, "01": 1.0, "10": 1.0}))
print(f"P with 00 cut   = {ruelle.pressure(A, cut).value:.12f}   (only the 2-cycle survives)")
