"""Spectra of weighted shift operators ``aT`` over shifts of finite type.

The spectral radius reduces to pressure: ``r(aT)**2`` is the Perron root of
the transfer matrix of ``|a|**2 * rho`` where ``rho`` is the cocycle of the
isometry ``T``. When the shift space has no isolated points the spectrum is
the closed disk of that radius and coincides with the essential spectrum.
Otherwise only a diagnostic decomposition is produced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import measures
from . import potentials as pot
from . import ruelle
from . import sft

DIAGNOSTIC_NOTE = "theorem hypotheses not met - diagnostic only"


@dataclass(frozen=True)
class Ring:
    r_minus: float
    r_plus: float
    provenance: str = ""


@dataclass(frozen=True)
class SpectrumDescription:
    """Rotation-symmetric spectrum: optional central disk plus annuli.

    The set described is ``{|z| <= disk_radius} U {r_minus <= |z| <= r_plus}``
    over the rings; only radii are stored.
    """

    disk_radius: float | None
    rings: list
    hypotheses: dict = field(default_factory=dict)
    certified: bool = True
    note: str = ""

    def __post_init__(self):
        prev = -math.inf if self.disk_radius is None else self.disk_radius
        for ring in self.rings:
            if not (prev < ring.r_minus <= ring.r_plus):
                raise ValueError(f"rings must be disjoint, sorted and outside the disk: {self.rings}")
            prev = ring.r_plus

    @property
    def radius(self) -> float:
        vals = [r.r_plus for r in self.rings]
        if self.disk_radius is not None:
            vals.append(self.disk_radius)
        return max(vals) if vals else 0.0

    @property
    def n_components(self) -> int:
        return len(self.rings) + (self.disk_radius is not None)

    def radial_intervals(self) -> list:
        out = [] if self.disk_radius is None else [(0.0, self.disk_radius)]
        return out + [(r.r_minus, r.r_plus) for r in self.rings]

    def contains_radius(self, r, tol=0.0) -> bool:
        return any(lo - tol <= r <= hi + tol for lo, hi in self.radial_intervals())

    def distance(self, r) -> float:
        """Distance from the circle ``|z| = r`` to the set."""
        return min((max(lo - r, r - hi, 0.0) for lo, hi in self.radial_intervals()),
                   default=math.inf)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "disk": self.disk_radius,
            "rings": [{"rmin": r.r_minus, "rmax": r.r_plus, "provenance": r.provenance}
                      for r in self.rings],
            "radius": self.radius,
            "hypotheses": dict(self.hypotheses),
            "certified": self.certified,
            "note": self.note,
        }


def from_intervals(intervals, hypotheses=None, certified=True, note="", zero_point=False):
    """Merge radial intervals ``(lo, hi, provenance)`` into a description.

    Any interval reaching 0 (or ``zero_point``) becomes the disk.
    """
    items = sorted((float(lo), float(hi), prov) for lo, hi, prov in intervals)
    if zero_point:
        items.insert(0, (0.0, 0.0, "zero"))
        items.sort()
    merged = []
    for lo, hi, prov in items:
        if merged and lo <= merged[-1][1]:
            plo, phi, pprov = merged[-1]
            merged[-1] = (plo, max(phi, hi), pprov if prov in pprov.split("+") else f"{pprov}+{prov}")
        else:
            merged.append((lo, hi, prov))
    disk = None
    if merged and merged[0][0] == 0.0:
        disk = merged.pop(0)[1]
    rings = [Ring(lo, hi, prov) for lo, hi, prov in merged]
    return SpectrumDescription(disk, rings, hypotheses or {}, certified, note)


# --------------------------------------------------------------------------
# spectral radius

@dataclass(frozen=True)
class RadiusResult:
    radius: float
    enclosure: tuple
    pressure: ruelle.PressureResult

    def __float__(self):
        return self.radius


def transfer_weight(a: pot.CylinderFunction, rho: pot.CylinderFunction) -> pot.CylinderFunction:
    """``|a|**2 * rho``, the weight whose transfer operator governs ``aT``."""
    a2 = pot.pointwise(pot.pointwise(a, op="abs"), pot.pointwise(a, op="abs"), "mul")
    return pot.pointwise(a2, rho, "mul")


def weighted_shift_radius(A, a, rho, tol=ruelle.DEFAULT_TOL) -> RadiusResult:
    """``r(aT) = exp(pressure(ln(|a|^2 rho)) / 2)``."""
    pot.validate_cocycle(rho)
    T = ruelle.build_transfer(A, transfer_weight(a, rho))
    p = ruelle.pressure_of_transfer(T, tol)
    enc = p.radius
    return RadiusResult(math.sqrt(enc.rho), (math.sqrt(enc.lo), math.sqrt(enc.hi)), p)


def variational_radius(A, a, rho, restarts=200, steps=5000, seed=0) -> float:
    """Radius from the variational side: ``exp(max_mu (int ln|a|^2 rho + h) / 2)``."""
    pot.validate_cocycle(rho)
    with np.errstate(divide="ignore"):
        b = pot.log(transfer_weight(a, rho))
    res = measures.variational_search(A, b, restarts, steps, seed)
    return math.exp(res.value / 2)


def cuntz_krieger_radius(A, a, tol=ruelle.DEFAULT_TOL) -> RadiusResult:
    """Radius for the canonical isometry ``rho(i, j) = 1 / #predecessors(j)``."""
    return weighted_shift_radius(A, a, pot.uniform_cocycle(A), tol)


# --------------------------------------------------------------------------
# spectrum

def spectrum_sft(A, a, rho, tol=ruelle.DEFAULT_TOL) -> SpectrumDescription:
    """Spectrum of ``aT`` on the shift of ``A``.

    Without isolated points: the closed disk of radius ``r(aT)``, equal to
    the essential spectrum. With sink cycles the output is flagged
    uncertified: each sink cycle gives the circle of radius equal to the
    geometric mean of ``|a| sqrt(rho)`` around it, and the rest of the block
    graph gives a disk.
    """
    pot.validate_cocycle(rho)
    fr = sft.freeness(A)
    if fr.condition_I:
        rad = weighted_shift_radius(A, a, rho, tol)
        hyp = {"topologically_free": True, "condition_I": True, "essential_equals_full": True}
        return SpectrumDescription(rad.radius, [], hyp, True, "")
    T = ruelle.build_transfer(A, transfer_weight(a, rho))
    pres = T.presentation
    intervals = []
    cyc_blocks = set()
    for cyc in fr.sink_cycles:
        members = set(cyc)
        blocks = [k for k, w in enumerate(pres.block_states) if set(w) <= members]
        cyc_blocks.update(blocks)
        prod = 1.0
        for k in blocks:
            (t,) = np.flatnonzero(pres.graph.entries[k])
            prod *= T.W[k, t]
        r = prod ** (1.0 / (2 * len(blocks))) if prod > 0 else 0.0
        intervals.append((r, r, "sink_cycle:" + "-".join(map(str, cyc))))
    rest = [k for k in range(len(pres.block_states)) if k not in cyc_blocks]
    zero_point = False
    if rest:
        enc = ruelle.spectral_radius(T.W[np.ix_(rest, rest)], tol)
        r0 = math.sqrt(enc.rho)
        if r0 > 0:
            intervals.append((0.0, r0, "complement"))
        else:
            zero_point = True
    hyp = {"topologically_free": False, "condition_I": False, "essential_equals_full": False}
    return from_intervals(intervals, hyp, certified=False, note=DIAGNOSTIC_NOTE, zero_point=zero_point)


def gibbs_radius(A, a, rho, tol=ruelle.DEFAULT_TOL) -> float:
    """``exp(int ln(|a| sqrt(rho)) dmu + h(mu) / 2)`` at the Gibbs measure of ``|a|^2 rho``.

    Needs an irreducible ``A`` and a strictly positive depth <= 2 weight.
    """
    c = transfer_weight(a, rho)
    mu = ruelle.gibbs_markov(A, c, tol)
    half_log = pot.pointwise(pot.log(c), op="scale", t=0.5)
    return math.exp(measures.integrate(mu, half_log) + measures.entropy(mu) / 2)
