"""Topological Markov shifts as finite directed graphs.

A 0/1 matrix ``A`` defines the one-sided shift space of infinite paths
``(x_1, x_2, ...)`` with ``A[x_i, x_{i+1}] == 1``. Everything here is a finite
graph computation: strongly connected components, essential states, cyclic
periods, and the sink-cycle test that decides whether the shift space has
isolated points.

Words are tuples of state indices; every word-indexed table in the package
uses lexicographic order in state index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DepthCapExceeded,
    InadmissibleWord,
    NoEssentialStates,
    NonBinaryEntry,
    ZeroColumn,
    ZeroRow,
)

DEFAULT_DEPTH_CAP = 12

Word = tuple


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Validated 0/1 transition matrix. Build with :func:`validate`."""

    entries: np.ndarray
    cuntz_krieger: bool = False

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def out_degree(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def successors(self, i):
        return np.flatnonzero(self.entries[i])

    def predecessors(self, j):
        return np.flatnonzero(self.entries[:, j])

    def is_admissible(self, word) -> bool:
        if any(s < 0 or s >= self.n for s in word):
            return False
        return all(self.entries[a, b] for a, b in zip(word[:-1], word[1:]))

    def check_word(self, word):
        if len(word) == 0 or not self.is_admissible(word):
            raise InadmissibleWord(f"word {tuple(word)} is not admissible", word=list(map(int, word)))

    def __eq__(self, other):
        return (isinstance(other, TransitionMatrix)
                and np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"TransitionMatrix({self.entries.tolist()})"


def validate(entries, cuntz_krieger=False) -> TransitionMatrix:
    """Check and freeze a square 0/1 matrix.

    Parameters
    ----------
    entries : array_like
        Square matrix with values in {0, 1}.
    cuntz_krieger : bool
        Additionally require every column to contain a 1.

    Raises
    ------
    NonBinaryEntry, ZeroRow, ZeroColumn
    """
    a = np.asarray(entries)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NonBinaryEntry(f"transition matrix must be square and non-empty, got shape {a.shape}")
    bad = np.argwhere((a != 0) & (a != 1))
    if len(bad):
        i, j = map(int, bad[0])
        raise NonBinaryEntry(f"entry ({i},{j}) = {a[i, j].item()!r} is not 0/1", i=i, j=j)
    a = a.astype(np.int8)
    zero_rows = np.flatnonzero(a.sum(axis=1) == 0)
    if len(zero_rows):
        i = int(zero_rows[0])
        raise ZeroRow(f"row {i} has no admissible successor", i=i)
    if cuntz_krieger:
        zero_cols = np.flatnonzero(a.sum(axis=0) == 0)
        if len(zero_cols):
            j = int(zero_cols[0])
            raise ZeroColumn(f"column {j} has no predecessor", j=j)
    a.setflags(write=False)
    return TransitionMatrix(a, cuntz_krieger)


def from_edges(n, edges, cuntz_krieger=False) -> TransitionMatrix:
    a = np.zeros((n, n), dtype=np.int8)
    for i, j in edges:
        a[i, j] = 1
    return validate(a, cuntz_krieger)


def full_shift(n) -> TransitionMatrix:
    return validate(np.ones((n, n), dtype=np.int8), cuntz_krieger=True)


def golden_mean() -> TransitionMatrix:
    return validate([[1, 1], [1, 0]], cuntz_krieger=True)


def block_diag(*mats) -> TransitionMatrix:
    n = sum(m.n for m in mats)
    a = np.zeros((n, n), dtype=np.int8)
    k = 0
    for m in mats:
        a[k:k + m.n, k:k + m.n] = m.entries
        k += m.n
    return validate(a)


# --------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class StateClassification:
    sccs: list
    essential: frozenset
    condensation: dict
    component_of: np.ndarray = field(repr=False)

    def is_essential(self, i) -> bool:
        return i in self.essential


def _scc_labels(adj):
    ncomp, labels = connected_components(csr_matrix(adj), directed=True, connection="strong")
    # Renumber components by their smallest state so output is deterministic.
    first = {}
    for s, c in enumerate(labels):
        first.setdefault(c, s)
    order = sorted(first, key=first.get)
    remap = {c: k for k, c in enumerate(order)}
    return ncomp, np.array([remap[c] for c in labels], dtype=int)


def classify(A: TransitionMatrix) -> StateClassification:
    """Strongly connected components, essential states and condensation.

    A state is essential when every state reachable from it can reach it
    back, i.e. its component is a sink of the condensation DAG.
    """
    ncomp, labels = _scc_labels(A.entries)
    sccs = [[int(s) for s in np.flatnonzero(labels == c)] for c in range(ncomp)]
    cond = {c: set() for c in range(ncomp)}
    for i, j in zip(*np.nonzero(A.entries)):
        if labels[i] != labels[j]:
            cond[labels[i]].add(int(labels[j]))
    cond = {c: sorted(v) for c, v in cond.items()}
    essential = frozenset(s for c in range(ncomp) if not cond[c] for s in sccs[c])
    return StateClassification(sccs, essential, cond, labels)


def period_and_classes(adj, states):
    """Cyclic period and cyclic classes of an irreducible state set.

    The period is the gcd of ``level[i] + 1 - level[j]`` over internal edges
    for any BFS levelling; class ``k`` holds states with level = k mod period,
    with class 0 containing the smallest state.
    """
    states = sorted(states)
    inside = set(states)
    level = {states[0]: 0}
    queue = [states[0]]
    while queue:
        nxt = []
        for i in queue:
            for j in np.flatnonzero(adj[i]):
                j = int(j)
                if j in inside and j not in level:
                    level[j] = level[i] + 1
                    nxt.append(j)
        queue = nxt
    g = 0
    for i in states:
        for j in np.flatnonzero(adj[i]):
            j = int(j)
            if j in inside:
                g = math.gcd(g, abs(level[i] + 1 - level[j]))
    if g == 0:
        # single state without self-loop: not a genuine irreducible block
        return 0, [states]
    classes = [[s for s in states if level[s] % g == k] for k in range(g)]
    return g, classes


@dataclass(frozen=True)
class IrreducibleDecomposition:
    blocks: list          # sub-matrices on each block's states
    states: list          # original state indices per block, sorted
    relabeling: list      # permutation: essential states block by block, then the rest
    periods: list
    classes: list         # per block, list of cyclic classes (lists of states)


def decompose(A: TransitionMatrix) -> IrreducibleDecomposition:
    """Irreducible components of the essential part, with periods."""
    cl = classify(A)
    blocks_states = [c for c in cl.sccs if c[0] in cl.essential]
    if not blocks_states:  # unreachable: a finite graph with no zero rows has a sink SCC
        raise NoEssentialStates("no essential states")
    blocks, periods, classes = [], [], []
    for st in blocks_states:
        idx = np.array(st)
        blocks.append(np.array(A.entries[np.ix_(idx, idx)]))
        p, c = period_and_classes(A.entries, st)
        assert p >= 1, "essential component must carry a cycle"
        periods.append(p)
        classes.append(c)
    ess = [s for st in blocks_states for s in st]
    rest = [s for s in range(A.n) if s not in cl.essential]
    return IrreducibleDecomposition(blocks, blocks_states, ess + rest, periods, classes)


def permute(A: TransitionMatrix, perm) -> TransitionMatrix:
    """Relabel states: new state ``k`` is old state ``perm[k]``."""
    p = np.asarray(perm)
    return validate(A.entries[np.ix_(p, p)], A.cuntz_krieger)


# --------------------------------------------------------------------------
# isolated points

@dataclass(frozen=True)
class FreenessReport:
    condition_I: bool
    topologically_free: bool
    sink_cycles: list
    feeder_states: list


def freeness(A: TransitionMatrix) -> FreenessReport:
    """Detect isolated points of the shift space.

    An isolated point exists exactly when some cycle consists of states of
    out-degree 1 (its periodic point is isolated, and every isolated point is
    eventually forced onto such a cycle).
    """
    forced = {i: int(A.successors(i)[0]) for i in range(A.n) if A.out_degree[i] == 1}
    on_cycle = {}
    cycles = []
    for start in sorted(forced):
        path, seen = [], {}
        s = start
        while s in forced and s not in seen and s not in on_cycle:
            seen[s] = len(path)
            path.append(s)
            s = forced[s]
        if s in seen:
            cyc = path[seen[s]:]
            k = cyc.index(min(cyc))
            cyc = cyc[k:] + cyc[:k]
            for c in cyc:
                on_cycle[c] = len(cycles)
            cycles.append(cyc)
    feeders = []
    for start in sorted(forced):
        if start in on_cycle:
            continue
        s, steps = start, 0
        while s in forced and s not in on_cycle and steps <= A.n:
            s = forced[s]
            steps += 1
        if s in on_cycle:
            feeders.append(start)
    free = not cycles
    return FreenessReport(free, free, cycles, feeders)


# --------------------------------------------------------------------------
# words

def admissible_words(A: TransitionMatrix, n: int, cap: int = DEFAULT_DEPTH_CAP) -> list:
    """Lexicographically ordered admissible words of length ``n``."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    if n > cap:
        raise DepthCapExceeded(f"depth {n} exceeds cap {cap}", depth=n, cap=cap)
    words = [(i,) for i in range(A.n)]
    succ = [tuple(int(j) for j in A.successors(i)) for i in range(A.n)]
    for _ in range(n - 1):
        words = [w + (j,) for w in words for j in succ[w[-1]]]
    return words


def word_index(words) -> dict:
    return {w: k for k, w in enumerate(words)}


def parse_word(s, n_states=None) -> Word:
    """Parse ``"010"`` or ``"0,1,10"`` into a tuple of ints."""
    if isinstance(s, (list, tuple)):
        return tuple(int(x) for x in s)
    s = str(s).strip()
    if "," in s or " " in s:
        return tuple(int(x) for x in s.replace(",", " ").split())
    if n_states is not None and n_states > 10:
        raise ValueError(f"ambiguous digit-string word {s!r} for {n_states} states; use commas")
    return tuple(int(ch) for ch in s)


def format_word(w, n_states=None) -> str:
    if n_states is not None and n_states > 10:
        return ",".join(str(x) for x in w)
    return "".join(str(x) for x in w)
