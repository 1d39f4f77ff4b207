"""Ruelle transfer operators as nonnegative matrices.

A depth-``N`` weight ``c`` on the shift of ``A`` becomes an edge-weighted
matrix on the ``m``-block presentation (``m = max(N - 1, 1)``): block states
are admissible ``m``-words and the edge ``(x_1..x_m) -> (x_2..x_m, j)``
carries ``c(x_1, ..., x_m, j)``.

Orientation: ``W[s, t]`` is the weight of the edge ``s -> t``. The operator
``(L_c f)(y) = sum_{x in shift^{-1}(y)} c(x) f(x)`` acts on block-state
vectors as ``f -> W.T @ f``.

Perron roots come from power iteration with Collatz-Wielandt enclosures,
one strongly connected component at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import potentials as pot
from . import sft
from .errors import ConvergenceError, NotIrreducible, ValidationError, ZeroEdgeWeight

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class BlockPresentation:
    base: sft.TransitionMatrix
    block_depth: int
    cap: int = sft.DEFAULT_DEPTH_CAP

    @cached_property
    def block_states(self) -> list:
        return sft.admissible_words(self.base, self.block_depth, self.cap)

    @cached_property
    def edge_words(self) -> list:
        """Admissible (m+1)-words; each is one block edge."""
        return sft.admissible_words(self.base, self.block_depth + 1, self.cap)

    @cached_property
    def block_edges(self) -> list:
        idx = sft.word_index(self.block_states)
        return [(idx[w[:-1]], idx[w[1:]]) for w in self.edge_words]

    @cached_property
    def graph(self) -> sft.TransitionMatrix:
        k = len(self.block_states)
        a = np.zeros((k, k), dtype=np.int8)
        for s, t in self.block_edges:
            a[s, t] = 1
        return sft.validate(a)

    def block_of_state(self, i) -> list:
        """Block states whose first symbol is ``i``."""
        return [k for k, w in enumerate(self.block_states) if w[0] == i]


def presentation_for(A, depth, cap=sft.DEFAULT_DEPTH_CAP) -> BlockPresentation:
    return BlockPresentation(A, max(depth - 1, 1), cap)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    presentation: BlockPresentation
    W: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.presentation.graph.entries.astype(bool)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """``L_c`` on a block-state vector."""
        return self.W.T @ f


def build_transfer(A: sft.TransitionMatrix, c: pot.CylinderFunction) -> TransferMatrix:
    """Transfer matrix of the nonnegative weight ``c``."""
    if c.is_complex:
        raise ValidationError("transfer weight must be real; pass |a| or |a|^2")
    if np.any(np.isnan(c.values)) or np.any(c.values < 0):
        raise ValidationError("transfer weight must be >= 0 (exponentiate potentials first)")
    pres = presentation_for(A, c.depth, c.cap)
    cl = pot.lift_depth(c, pres.block_depth + 1)
    k = len(pres.block_states)
    W = np.zeros((k, k))
    for (s, t), v in zip(pres.block_edges, cl.values):
        W[s, t] = v
    W.setflags(write=False)
    return TransferMatrix(pres, W)


def _as_array(W):
    return W.W if isinstance(W, TransferMatrix) else np.asarray(W, dtype=float)


# --------------------------------------------------------------------------
# Perron roots

@dataclass(frozen=True)
class PerronEnclosure:
    rho: float
    lo: float
    hi: float
    converged: bool = True
    iterations: int = 0
    components: list = field(default_factory=list)   # (states, lo, hi) per nontrivial SCC

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class PerronData:
    rho: float
    r: np.ndarray
    l: np.ndarray
    lo: float
    hi: float
    period: int = 1
    converged: bool = True
    iterations: int = 0

    @property
    def enclosure(self):
        return (self.lo, self.hi)


def _cw(B, v):
    Bv = B @ v
    ratios = Bv / v
    return Bv, float(ratios.min()), float(ratios.max())


def _width_ok(lo, hi, tol):
    return hi - lo <= tol * max(1.0, hi)


def _perron_irreducible(B, tol, max_iter, polish=False):
    """Power iteration on one irreducible nonnegative block.

    Returns ``(rho, r, lo, hi, period, converged, iterations)`` with ``r > 0``,
    ``max(r) == 1`` and Collatz-Wielandt bounds of ``B`` at ``r``.

    A period-``k`` block is handled through ``B**k`` restricted to one cyclic
    class (primitive there); the eigenvector of ``B`` is recovered by averaging
    ``(B / rho)**s v`` over ``s = 0..k-1``.

    With ``polish`` the iteration continues past ``tol`` until the enclosure
    stops shrinking, which pushes eigenvector residuals to rounding level.
    """
    n = B.shape[0]
    if n == 1:
        rho = float(B[0, 0])
        return rho, np.ones(1), rho, rho, 1, True, 0
    k, classes = sft.period_and_classes(B > 0, range(n))
    cls0 = np.array(classes[0])
    P = np.linalg.matrix_power(B, k)[np.ix_(cls0, cls0)] if k > 1 else B
    v = np.ones(len(cls0))
    converged = False
    it = 0
    lo_k = hi_k = 0.0
    best, stale = math.inf, 0
    while it < max_iter:
        it += 1
        Pv, lo_k, hi_k = _cw(P, v)
        lo_r, hi_r = lo_k ** (1.0 / k), hi_k ** (1.0 / k)
        if _width_ok(lo_r, hi_r, tol):
            converged = True
            if not polish:
                break
            if hi_r - lo_r < best:
                best, stale = hi_r - lo_r, 0
            else:
                stale += 1
            if stale >= 20 or best == 0:
                break
        v = Pv / Pv.max()
    rho = 0.5 * (lo_k ** (1.0 / k) + hi_k ** (1.0 / k))
    if k > 1:
        full = np.zeros(n)
        full[cls0] = v
        r = np.zeros(n)
        term = full
        for _ in range(k):
            r += term
            term = B @ term / rho
    else:
        r = v
    r = r / r.max()
    _, lo, hi = _cw(B, r)
    if k > 1:
        # both enclosures are valid; keep their intersection
        lo, hi = max(lo, lo_k ** (1.0 / k)), min(hi, hi_k ** (1.0 / k))
    return rho, r, lo, hi, k, converged, it


def strong_components(W) -> list:
    """Nontrivial strongly connected components of the positive part of ``W``."""
    W = _as_array(W)
    _, labels = sft._scc_labels((W > 0).astype(np.int8))
    comps = []
    for c in range(labels.max() + 1):
        st = np.flatnonzero(labels == c)
        if len(st) > 1 or W[st[0], st[0]] > 0:
            comps.append([int(s) for s in st])
    return comps


def spectral_radius(W, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PerronEnclosure:
    """Perron root of a nonnegative matrix with a Collatz-Wielandt enclosure.

    The radius is the maximum over nontrivial strongly connected components;
    acyclic parts contribute 0. Once ``tol`` is met the iteration continues
    while the enclosure keeps shrinking. On budget exhaustion the best
    enclosure is returned with ``converged=False``.
    """
    W = _as_array(W)
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValidationError("spectral_radius needs a finite nonnegative matrix")
    comps = []
    lo = hi = 0.0
    ok = True
    iters = 0
    for st in strong_components(W):
        B = W[np.ix_(st, st)]
        rho, _, clo, chi, _, conv, it = _perron_irreducible(B, tol, max_iter, polish=True)
        comps.append((st, clo, chi))
        lo, hi = max(lo, clo), max(hi, chi)
        ok &= conv
        iters = max(iters, it)
    rho = 0.5 * (lo + hi)
    return PerronEnclosure(rho, lo, hi, ok, iters, comps)


def perron_eigendata(W, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PerronData:
    """Perron root with right and left eigenvectors of an irreducible matrix.

    Normalisation: ``max(r) == 1`` and ``l @ r == 1``.

    Raises
    ------
    NotIrreducible
        If the positive part of ``W`` is not a single strongly connected
        component covering every state.
    MaxIterations
        If either power iteration runs out of budget (``.result`` holds the
        unconverged data).
    """
    W = _as_array(W)
    comps = strong_components(W)
    if len(comps) != 1 or len(comps[0]) != W.shape[0]:
        raise NotIrreducible("matrix is not irreducible")
    rho_r, r, lo, hi, k, conv_r, it_r = _perron_irreducible(W, tol, max_iter, polish=True)
    rho_l, l, lo_l, hi_l, _, conv_l, it_l = _perron_irreducible(W.T.copy(), tol, max_iter, polish=True)
    lo, hi = max(lo, lo_l), min(hi, hi_l)
    if lo > hi:  # rounding-level disagreement between the two sides
        lo, hi = min(lo, hi), max(lo, hi)
    l = l / (l @ r)
    rho = float(l @ W @ r)
    data = PerronData(rho, r, l, lo, hi, k, conv_r and conv_l, max(it_r, it_l))
    if not data.converged:
        raise ConvergenceError("Perron eigendata did not converge", result=data,
                               width=float(hi - lo))
    return data


# --------------------------------------------------------------------------
# pressure

@dataclass(frozen=True)
class PressureResult:
    value: float
    enclosure: tuple
    converged: bool = True
    radius: PerronEnclosure | None = None


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def pressure_of_transfer(T: TransferMatrix, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PressureResult:
    enc = spectral_radius(T, tol, max_iter)
    return PressureResult(_log(enc.rho), (_log(enc.lo), _log(enc.hi)), enc.converged, enc)


def pressure(A: sft.TransitionMatrix, b: pot.CylinderFunction, tol=DEFAULT_TOL,
             max_iter=DEFAULT_MAX_ITER) -> PressureResult:
    """Topological pressure ``ln r(L_{exp b})``; ``-inf`` when the radius is 0."""
    return pressure_of_transfer(build_transfer(A, pot.exp(b)), tol, max_iter)


def preimage_sum_estimate(T: TransferMatrix, y_state: int, n: int) -> float:
    """``(1/n) ln sum_i (W**n)[i, y]``: the preimage-sum route to pressure."""
    W = _as_array(T)
    u = np.zeros(W.shape[0])
    u[y_state] = 1.0
    log_scale = 0.0
    for _ in range(n):
        u = W @ u
        s = u.max()
        if s == 0:
            return -math.inf
        u /= s
        log_scale += math.log(s)
    return (log_scale + math.log(u.sum())) / n


# --------------------------------------------------------------------------
# Gibbs measures and the operator on cylinder functions

def gibbs_markov(A: sft.TransitionMatrix, c: pot.CylinderFunction, tol=DEFAULT_TOL):
    """Equilibrium Markov measure of ``ln c`` for depth <= 2 weights.

    With Perron data ``(rho, r, l)`` of ``W[i, j] = c(i, j)`` on edges,
    ``q[i, j] = W[i, j] r[j] / (rho r[i])`` and ``pi[i] ∝ l[i] r[i]``.
    """
    from .measures import MarkovMeasure

    if c.depth > 2:
        raise ValidationError("gibbs_markov handles depth <= 2; recode deeper weights to blocks")
    T = build_transfer(A, c)
    W = T.W
    if np.any(W[A.entries.astype(bool)] <= 0):
        raise ZeroEdgeWeight("weight vanishes on an admissible edge")
    data = perron_eigendata(W, tol)
    Q = W * data.r[None, :] / (data.rho * data.r[:, None])
    Q = Q / Q.sum(axis=1, keepdims=True)
    pi = data.l * data.r
    pi = pi / pi.sum()
    return MarkovMeasure(A, Q, pi)


def ruelle_apply(c: pot.CylinderFunction, f: pot.CylinderFunction) -> pot.CylinderFunction:
    """``L_c f`` as a cylinder function of depth ``max(max(N, M) - 1, 1)``."""
    if c.A is not f.A and c.A != f.A:
        raise ValidationError("operands live on different shifts")
    A = c.A
    D = max(c.depth, f.depth)
    cf = pot.pointwise(pot.lift_depth(c, D), pot.lift_depth(f, D), "mul")
    out_depth = max(D - 1, 1)
    words = sft.admissible_words(A, out_depth, c.cap)
    idx = cf.index
    dtype = complex if cf.is_complex else float
    vals = np.zeros(len(words), dtype=dtype)
    for k, v in enumerate(words):
        head = v[:D - 1]
        vals[k] = sum(cf.values[idx[(int(i),) + head]] for i in A.predecessors(v[0]))
    return pot.CylinderFunction(A, out_depth, vals, c.cap)


def eigenfunction(T: TransferMatrix, data: PerronData) -> pot.CylinderFunction:
    """The Perron eigenfunction ``h`` of ``L_c`` (left vector ``l`` on block states).

    ``L_c`` is ``W.T``, so its eigenfunction is the left Perron vector of
    ``W`` read as a function of the first ``m`` symbols.
    """
    pres = T.presentation
    return pot.CylinderFunction(pres.base, pres.block_depth, data.l / data.l.max())


def eigenmeasure_mass(T: TransferMatrix, data: PerronData, word) -> float:
    """Mass of a cylinder under the eigenmeasure ``nu`` with ``L_c^* nu = rho nu``.

    Only for depth <= 2 weights (block states are single symbols):
    ``nu(C_w) = r[w_k] prod W[w_i, w_{i+1}] / rho**(k-1)`` with ``sum(r) = 1``.
    """
    if T.presentation.block_depth != 1:
        raise ValidationError("eigenmeasure masses are tabulated for depth <= 2 weights")
    r = data.r / data.r.sum()
    w = tuple(word)
    m = r[w[-1]]
    for a, b in zip(w[:-1], w[1:]):
        m *= T.W[a, b] / data.rho
    return float(m)
