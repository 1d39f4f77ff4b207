"""Markov measures, entropy, and the variational principle.

Shift-invariant Markov measures are the finite-data stand-in for invariant
measures: a row-stochastic ``Q`` supported on the edges of ``A`` plus a
stationary row vector ``pi``. Their Kolmogorov-Sinai entropy is the usual
``-sum_i pi_i sum_j q_ij ln q_ij``.

:func:`variational_search` maximises ``integral(b) + entropy`` directly over
Markov measures. It never touches a transfer matrix, so it serves as an
independent check on :func:`thermoshift.ruelle.pressure`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import potentials as pot
from . import sft
from .errors import ConvergenceError, NoAdmissibleSupport, ValidationError

MEASURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    A: sft.TransitionMatrix
    Q: np.ndarray
    pi: np.ndarray
    ergodic: bool = True

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        pi = np.array(self.pi, dtype=float)
        if Q.shape != (self.A.n, self.A.n) or pi.shape != (self.A.n,):
            raise ValidationError("Q and pi must match the number of states")
        if np.any(Q < 0) or np.any(Q[self.A.entries == 0] > 0):
            raise ValidationError("Q must be nonnegative and supported on admissible edges")
        if np.max(np.abs(Q.sum(axis=1) - 1)) > MEASURE_TOL:
            raise ValidationError("rows of Q must sum to 1")
        if np.any(pi < -MEASURE_TOL) or abs(pi.sum() - 1) > MEASURE_TOL:
            raise ValidationError("pi must be a probability vector")
        if np.max(np.abs(pi @ Q - pi)) > MEASURE_TOL:
            raise ValidationError("pi is not stationary for Q")
        Q.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "pi", pi)

    def to_json(self) -> dict:
        return {"Q": self.Q.tolist(), "pi": self.pi.tolist(), "entropy": entropy(self)}


def bernoulli(A, p) -> MarkovMeasure:
    """Product measure on a full shift with marginal ``p``."""
    p = np.asarray(p, dtype=float)
    return MarkovMeasure(A, np.tile(p, (len(p), 1)), p)


# --------------------------------------------------------------------------
# stationary vectors

def _closed_classes(Q):
    adj = (Q > 0).astype(np.int8)
    ncomp, labels = sft._scc_labels(adj)
    closed = []
    for c in range(ncomp):
        st = np.flatnonzero(labels == c)
        leaves = adj[st].sum(axis=0).astype(bool)
        leaves[st] = False
        if not leaves.any():
            closed.append(st)
    return closed


def _stationary_irreducible(P, max_iter):
    """Least-squares solve of ``pi (I - P) = 0, sum(pi) = 1``, then lazy-chain polish."""
    k = P.shape[0]
    M = np.vstack([(np.eye(k) - P).T, np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi = np.clip(np.linalg.lstsq(M, rhs, rcond=None)[0], 0.0, None)
    pi /= pi.sum()
    lazy = 0.5 * (np.eye(k) + P)
    res = np.max(np.abs(pi @ P - pi))
    for _ in range(max_iter):
        if res <= 1e-14:
            return pi
        pi = pi @ lazy
        pi /= pi.sum()
        res = np.max(np.abs(pi @ P - pi))
    if res <= 1e-12:
        return pi
    raise ConvergenceError("stationary vector did not converge", result=pi, residual=float(res))


def stationary(Q, max_iter=10_000):
    """Stationary probability vector of a row-stochastic matrix.

    Returns ``(pi, ergodic)``. With several closed classes ``pi`` is the
    uniform mixture of the per-class stationary vectors and ``ergodic`` is
    False.
    """
    Q = np.asarray(Q, dtype=float)
    classes = _closed_classes(Q)
    pi = np.zeros(Q.shape[0])
    for st in classes:
        pi[st] += _stationary_irreducible(Q[np.ix_(st, st)], max_iter) / len(classes)
    return pi, len(classes) == 1


def markov_from_Q(A, Q) -> MarkovMeasure:
    pi, erg = stationary(Q)
    return MarkovMeasure(A, Q, pi, erg)


# --------------------------------------------------------------------------
# masses, integrals, entropy

def cylinder_mass(mu: MarkovMeasure, w) -> float:
    w = tuple(int(x) for x in w)
    mu.A.check_word(w)
    m = mu.pi[w[0]]
    for a, b in zip(w[:-1], w[1:]):
        m *= mu.Q[a, b]
    return float(m)


def word_masses(mu: MarkovMeasure, depth: int, cap=sft.DEFAULT_DEPTH_CAP) -> np.ndarray:
    """Masses of all admissible ``depth``-words, in lexicographic order."""
    if depth > cap:
        return np.array([cylinder_mass(mu, w) for w in sft.admissible_words(mu.A, depth, cap)])
    masses = list(mu.pi)
    words = [(i,) for i in range(mu.A.n)]
    succ = [mu.A.successors(i) for i in range(mu.A.n)]
    for _ in range(depth - 1):
        nw, nm = [], []
        for w, m in zip(words, masses):
            for j in succ[w[-1]]:
                nw.append(w + (int(j),))
                nm.append(m * mu.Q[w[-1], j])
        words, masses = nw, nm
    return np.array(masses)


def entropy(mu: MarkovMeasure) -> float:
    Q = mu.Q
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Q > 0, Q * np.log(Q), 0.0)
    return float(max(0.0, -(mu.pi @ terms.sum(axis=1))))


def integrate(mu: MarkovMeasure, f: pot.CylinderFunction) -> float:
    """``sum_w mu(C_w) f(w)`` over admissible depth-N words; ``-inf`` allowed."""
    if f.A != mu.A:
        raise ValidationError("function and measure live on different shifts")
    m = word_masses(mu, f.depth, f.cap)
    v = f.values
    pos = m > 0
    if np.any(np.isneginf(v[pos])):
        return -math.inf
    return float(np.sum(m[pos] * v[pos]))


# --------------------------------------------------------------------------
# variational principle

class VariationalResult(NamedTuple):
    measure: MarkovMeasure
    value: float


def _edge_table(A, b):
    """Potential on block edges: matrix with -inf off the surviving edges."""
    from .ruelle import presentation_for

    pres = presentation_for(A, b.depth, b.cap)
    bl = pot.lift_depth(b, pres.block_depth + 1)
    k = len(pres.block_states)
    B = np.full((k, k), -np.inf)
    for (s, t), v in zip(pres.block_edges, bl.values):
        B[s, t] = v
    return pres, B


def _objective(Q, B, mask):
    """``J``, ``pi`` and per-state rewards for an irreducible ``Q`` on ``mask``."""
    k = Q.shape[0]
    # pi: solve pi (I - Q) = 0 with sum pi = 1
    M = np.vstack([(np.eye(k) - Q).T, np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi = np.linalg.lstsq(M, rhs, rcond=None)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        logQ = np.where(mask, np.log(np.where(mask, Q, 1.0)), 0.0)
        g = np.where(mask, Q * (np.where(mask, B, 0.0) - logQ), 0.0).sum(axis=1)
    return float(pi @ g), pi, g, logQ


def _search_component(B, rng, steps, step_size=0.5, tol=1e-12):
    mask = np.isfinite(B)
    k = B.shape[0]
    Q = np.zeros((k, k))
    for i in range(k):
        js = np.flatnonzero(mask[i])
        Q[i, js] = rng.dirichlet(np.ones(len(js)))
        Q[i, js] = np.maximum(Q[i, js], 1e-300)
        Q[i] /= Q[i].sum()
    J, pi, g, logQ = _objective(Q, B, mask)
    Bf = np.where(mask, B, 0.0)
    for _ in range(steps):
        # relative values h solve (I - Q) h = g - J with pi h = 0
        Mh = np.vstack([np.eye(k) - Q, pi])
        h = np.linalg.lstsq(Mh, np.append(g - J, 0.0), rcond=None)[0]
        # entropic mirror step (KL projection onto each row simplex)
        adv = np.where(mask, Bf - logQ + h[None, :], -np.inf)
        logits = np.where(mask, logQ + step_size * adv, -np.inf)
        logits -= logits.max(axis=1, keepdims=True)
        Qn = np.where(mask, np.exp(logits), 0.0)
        Qn /= Qn.sum(axis=1, keepdims=True)
        Jn, pin, gn, logQn = _objective(Qn, B, mask)
        improvement = Jn - J
        if improvement < -1e-13:
            step_size *= 0.5
            if step_size < 1e-8:
                break
            continue
        Q, J, pi, g, logQ = Qn, Jn, pin, gn, logQn
        if improvement < tol:
            break
    return Q, J


def variational_search(A: sft.TransitionMatrix, b: pot.CylinderFunction, restarts: int = 200,
                       steps: int = 5000, seed: int = 0) -> VariationalResult:
    """Maximise ``integrate(mu, b) + entropy(mu)`` over Markov measures.

    The search runs on the block presentation of ``b`` (memory ``depth - 1``)
    and only over edges where ``b`` is finite. Each restart draws Dirichlet
    rows on one nontrivial strongly connected component of the surviving
    graph (components taken in turn) and climbs with damped entropic mirror
    steps until the gain drops below 1e-12.

    Raises
    ------
    NoAdmissibleSupport
        If no cycle carries a finite potential.
    """
    from .ruelle import strong_components

    pres, B = _edge_table(A, b)
    comps = strong_components(np.where(np.isfinite(B), 1.0, 0.0))
    if not comps:
        raise NoAdmissibleSupport("potential is -inf on every cycle")
    rng = np.random.default_rng(seed)
    best = None
    for r in range(max(restarts, 1)):
        st = comps[r % len(comps)]
        Bc = B[np.ix_(st, st)]
        Qc, J = _search_component(Bc, rng, steps)
        if best is None or J > best[0]:
            best = (J, st, Qc)
    J, st, Qc = best
    G = pres.graph if pres.block_depth > 1 else A
    Q = G.entries.astype(float)
    Q /= Q.sum(axis=1, keepdims=True)
    Q[st] = 0.0
    Q[np.ix_(st, st)] = Qc
    pi = np.zeros(G.n)
    pi[st] = stationary(Qc)[0]
    mu = MarkovMeasure(G, Q, pi)
    # report the value of the returned measure itself
    return VariationalResult(mu, _block_value(mu, B))


def _block_value(mu, B):
    with np.errstate(invalid="ignore"):
        flow = mu.pi[:, None] * mu.Q
        pos = flow > 0
    return float(np.sum(flow[pos] * B[pos])) + entropy(mu)


# --------------------------------------------------------------------------
# t-entropy

def t_entropy(mu: MarkovMeasure, rho: pot.CylinderFunction) -> float:
    """``integrate(mu, ln rho) + entropy(mu)`` for a cocycle ``rho``."""
    pot.validate_cocycle(rho)
    return integrate(mu, pot.log(rho)) + entropy(mu)


def t_entropy_definition_estimate(mu: MarkovMeasure, rho: pot.CylinderFunction, n: int,
                                  partition_depth: int) -> float:
    """Cylinder-partition estimate of t-entropy straight from its definition.

    Returns ``min_{1 <= k <= n} (1/k) sum_g mu(g) ln(mu(L^k g) / mu(g))`` with
    ``g`` running over indicators of admissible ``partition_depth``-cylinders
    and ``L`` the cocycle operator. Terms with ``mu(g) == 0`` count as 0; a
    term with ``mu(g) > 0`` and ``mu(L^k g) == 0`` makes the value ``-inf``.
    Restricting to cylinder partitions can only overestimate the infimum.
    """
    from .ruelle import ruelle_apply

    pot.validate_cocycle(rho)
    A = mu.A
    words = sft.admissible_words(A, partition_depth, rho.cap)
    masses = word_masses(mu, partition_depth, rho.cap)
    totals = np.zeros(n)
    for w, m in zip(words, masses):
        if m <= 0:
            continue
        g = pot.indicator(A, w)
        for k in range(n):
            g = ruelle_apply(rho, g)
            mg = integrate(mu, g)
            if mg <= 0:
                totals[k] = -math.inf
            elif np.isfinite(totals[k]):
                totals[k] += m * math.log(mg / m)
    per_n = totals / np.arange(1, n + 1)
    return float(per_n.min())
