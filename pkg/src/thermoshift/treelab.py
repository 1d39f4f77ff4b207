"""Weighted composition operators on directed trees.

A :class:`TreeSystem` is a finite presentation of a map ``Phi`` on a
countable vertex set: a finite core, inbound rays feeding core vertices and
outbound tails leaving them, with eventually periodic weights on the rays
and tails. The operator is ``(S h)(v) = lambda_v * h(Phi(v))`` on ``l2(V)``.

The predicted spectrum comes from cutting zero-weight edges and reading off
the geometric means of the periodic weight words; it is checked numerically
by finite sections and pseudospectrum grids.

Vertex identifiers are ``("c", name)`` for core vertices, ``("r", i, k)``
for the ``k``-th vertex (``k >= 1``) of ray ``i`` counted from its attach
point, and ``("t", j, k)`` for the ``k``-th vertex of tail ``j``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridTooCoarse, InvalidTree, NonPeriodicWeights
from .spectra import SpectrumDescription, from_intervals

DEFAULT_WINDOWS = (100, 200, 400)
DEFAULT_EPSILON = 1e-2
DEFAULT_GRID = (64, 64)
DENSE_LIMIT = 400
PREDICTION_FLAG = "derived, lab-certified"


@dataclass(frozen=True)
class Branch:
    """Eventually periodic chain: ``preperiod`` weights, then ``period`` forever."""

    anchor: str
    preperiod: tuple
    period: tuple

    def weight(self, k: int) -> complex:
        """Weight of the ``k``-th chain vertex, ``k >= 1``."""
        p = len(self.preperiod)
        if k <= p:
            return self.preperiod[k - 1]
        return self.period[(k - p - 1) % len(self.period)]

    @property
    def geometric_mean(self) -> float:
        mods = np.abs(np.asarray(self.period))
        if np.any(mods == 0):
            return 0.0
        return float(np.prod(mods) ** (1.0 / len(mods)))


@dataclass(frozen=True, eq=False)
class TreeSystem:
    """Finitely presented tree system.

    Parameters
    ----------
    core : list of str
        Core vertex names, in window order.
    core_map : dict
        ``Phi`` on core vertices that map into the core.
    core_weights : dict
        ``lambda_v`` for every core vertex.
    rays : list of Branch
        Inbound rays; ``anchor`` is the attach vertex.
    tails : list of Branch
        Outbound tails; ``anchor`` is the core vertex that maps onto the
        first tail vertex.
    """

    core: tuple
    core_map: dict
    core_weights: dict
    rays: tuple = ()
    tails: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "core", tuple(self.core))
        object.__setattr__(self, "rays", tuple(self.rays))
        object.__setattr__(self, "tails", tuple(self.tails))
        _validate(self)

    # -- the map -----------------------------------------------------------
    @cached_property
    def _tail_of(self) -> dict:
        return {b.anchor: j for j, b in enumerate(self.tails)}

    @cached_property
    def _core_preimages(self) -> dict:
        pre = {u: [] for u in self.core}
        for u, v in self.core_map.items():
            pre[v].append(("c", u))
        for i, b in enumerate(self.rays):
            pre[b.anchor].append(("r", i, 1))
        return pre

    def phi(self, v):
        kind = v[0]
        if kind == "c":
            u = v[1]
            if u in self.core_map:
                return ("c", self.core_map[u])
            return ("t", self._tail_of[u], 1)
        if kind == "r":
            _, i, k = v
            return ("c", self.rays[i].anchor) if k == 1 else ("r", i, k - 1)
        _, j, k = v
        return ("t", j, k + 1)

    def preimages(self, v) -> list:
        kind = v[0]
        if kind == "c":
            return list(self._core_preimages[v[1]])
        if kind == "r":
            _, i, k = v
            return [("r", i, k + 1)]
        _, j, k = v
        return [("c", self.tails[j].anchor)] if k == 1 else [("t", j, k - 1)]

    def weight(self, v) -> complex:
        kind = v[0]
        if kind == "c":
            return self.core_weights[v[1]]
        if kind == "r":
            return self.rays[v[1]].weight(v[2])
        return self.tails[v[1]].weight(v[2])

    @property
    def sup_weight(self) -> float:
        vals = [abs(w) for w in self.core_weights.values()]
        for b in self.rays + self.tails:
            vals += [abs(w) for w in b.preperiod + b.period]
        return max(vals, default=0.0)

    def vertex_order(self, n: int) -> list:
        """First ``n`` vertices: core, then rays and tails round-robin by depth."""
        out = [("c", u) for u in self.core][:n]
        k = 1
        while len(out) < n:
            for i in range(len(self.rays)):
                out.append(("r", i, k))
            for j in range(len(self.tails)):
                out.append(("t", j, k))
            k += 1
        return out[:n]

    def with_weights(self, fn) -> "TreeSystem":
        """Apply ``fn`` to every weight (e.g. ``abs`` for the gauge-fixed system)."""
        return TreeSystem(
            self.core, dict(self.core_map), {u: fn(w) for u, w in self.core_weights.items()},
            [Branch(b.anchor, tuple(map(fn, b.preperiod)), tuple(map(fn, b.period))) for b in self.rays],
            [Branch(b.anchor, tuple(map(fn, b.preperiod)), tuple(map(fn, b.period))) for b in self.tails],
        )

    def to_json(self) -> dict:
        def enc(w):
            w = complex(w)
            return w.real if w.imag == 0 else [w.real, w.imag]

        return {
            "schema": 1,
            "kind": "tree",
            "core": {"vertices": list(self.core), "map": dict(self.core_map),
                     "weights": {u: enc(w) for u, w in self.core_weights.items()}},
            "rays": [{"attach": b.anchor, "preperiod": [enc(w) for w in b.preperiod],
                      "period": [enc(w) for w in b.period]} for b in self.rays],
            "tails": [{"source": b.anchor, "preperiod": [enc(w) for w in b.preperiod],
                       "period": [enc(w) for w in b.period]} for b in self.tails],
        }


def _validate(T: TreeSystem):
    core = set(T.core)
    if len(core) != len(T.core) or not core:
        raise InvalidTree("core vertex names must be unique and non-empty")
    for u, w in T.core_weights.items():
        if u not in core:
            raise InvalidTree(f"weight given for unknown vertex {u!r}", vertex=str(u))
    for u in T.core:
        if u not in T.core_weights:
            raise InvalidTree(f"core vertex {u!r} has no weight", vertex=str(u))
    for u, v in T.core_map.items():
        if u not in core or v not in core:
            raise InvalidTree(f"core map entry {u!r} -> {v!r} leaves the core")
    sources = [b.anchor for b in T.tails]
    if len(set(sources)) != len(sources):
        raise InvalidTree("a core vertex can feed at most one tail")
    for u in T.core:
        if (u in T.core_map) == (u in sources):
            raise InvalidTree(f"core vertex {u!r} needs exactly one image (core map or tail)",
                              vertex=str(u))
    for b in T.rays:
        if b.anchor not in core:
            raise InvalidTree(f"ray attached to unknown vertex {b.anchor!r}")
    # no cycles in the core map
    for u in T.core:
        seen, s = set(), u
        while s in T.core_map:
            if s in seen:
                raise InvalidTree(f"core map has a cycle through {s!r}", vertex=str(s))
            seen.add(s)
            s = T.core_map[s]
    # surjectivity: every core vertex has a preimage
    hit = set(T.core_map.values()) | {b.anchor for b in T.rays}
    for u in T.core:
        if u not in hit:
            raise InvalidTree(f"core vertex {u!r} has no preimage (Phi not surjective)",
                              vertex=str(u))
    for b in T.rays + T.tails:
        if len(b.period) == 0:
            raise NonPeriodicWeights(f"empty period on branch at {b.anchor!r}")
        ws = b.preperiod + b.period
        if not all(np.isfinite(complex(w)) for w in ws):
            raise NonPeriodicWeights("weights must be finite")
    if not all(np.isfinite(complex(w)) for w in T.core_weights.values()):
        raise InvalidTree("core weights must be finite")


def _weight(w):
    if isinstance(w, (list, tuple)):
        re, im = w
        return complex(float(re), float(im))
    if isinstance(w, str):
        return complex(w.replace("i", "j"))
    w = complex(w)
    return w.real if w.imag == 0 else w


def _branch(d, anchor_key):
    if "period" not in d:
        raise NonPeriodicWeights("branch weights must be given as preperiod + period")
    return Branch(str(d[anchor_key]), tuple(_weight(w) for w in d.get("preperiod", [])),
                  tuple(_weight(w) for w in d["period"]))


def from_json(doc: dict) -> TreeSystem:
    """Parse the tree configuration format (see :meth:`TreeSystem.to_json`)."""
    try:
        c = doc["core"]
        core = [str(u) for u in c["vertices"]]
        cmap = {str(u): str(v) for u, v in c.get("map", {}).items()}
        weights = {str(u): _weight(w) for u, w in c["weights"].items()}
        rays = [_branch(r, "attach") for r in doc.get("rays", [])]
        tails = [_branch(t, "source") for t in doc.get("tails", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTree(f"malformed tree description: {exc}") from None
    return TreeSystem(core, cmap, weights, rays, tails)


# --------------------------------------------------------------------------
# built-in systems

def build_example_contrexample() -> TreeSystem:
    """Bilateral shift with weight 2 plus a decoupled unilateral part with weight 1/2.

    ``v_0`` is the core; ray 0 carries ``v_{-1}, v_{-2}, ...``, ray 1 carries
    ``w_{-1}, w_{-2}, ...`` (weight 0 on ``w_{-1}``, then 1/2), and the tail
    carries ``v_1, v_2, ...``.
    """
    return TreeSystem(
        ["v0"], {}, {"v0": 2.0},
        [Branch("v0", (), (2.0,)), Branch("v0", (0.0,), (0.5,))],
        [Branch("v0", (), (2.0,))],
    )


def build_line(minus_period=(1.0,), plus_period=(1.0,), core_weight=None) -> TreeSystem:
    """A single line ``Z``: ray with ``minus_period``, tail with ``plus_period``."""
    cw = plus_period[0] if core_weight is None else core_weight
    return TreeSystem(["o"], {}, {"o": cw}, [Branch("o", (), tuple(minus_period))],
                      [Branch("o", (), tuple(plus_period))])


def build_unilateral(weight=1.0) -> TreeSystem:
    """Backward shift on ``N`` (``v_k -> v_{k+1}``) with a decoupled zero ray keeping ``Phi`` onto."""
    return TreeSystem(["o"], {}, {"o": weight}, [Branch("o", (), (0.0,))],
                      [Branch("o", (), (weight,))])


def random_tree_system(rng: np.random.Generator, max_core=3, max_extra_rays=2,
                       zero_prob=0.1) -> TreeSystem:
    """Random presentation with moduli in [1/2, 2] and periods of length 1 or 2."""

    def w():
        if rng.random() < zero_prob:
            return 0.0
        return complex(rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.random()))

    def period():
        return tuple(complex(rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.random()))
                     for _ in range(rng.integers(1, 3)))

    m = int(rng.integers(1, max_core + 1))
    core = [f"c{k}" for k in range(m)]
    cmap, sources = {}, ["c0"]
    for k in range(1, m):
        if rng.random() < 0.3:
            sources.append(core[k])
        else:
            cmap[core[k]] = core[int(rng.integers(0, k))]
    weights = {u: w() for u in core}
    hit = set(cmap.values())
    rays = [Branch(u, tuple(w() for _ in range(rng.integers(0, 2))), period())
            for u in core if u not in hit]
    for _ in range(int(rng.integers(0, max_extra_rays + 1))):
        rays.append(Branch(core[int(rng.integers(0, m))],
                           tuple(w() for _ in range(rng.integers(0, 2))), period()))
    tails = [Branch(u, tuple(w() for _ in range(rng.integers(0, 2))), period()) for u in sources]
    return TreeSystem(core, cmap, weights, rays, tails)


# --------------------------------------------------------------------------
# isometry view

def isometry_weights(T: TreeSystem) -> TreeSystem:
    """Same map with ``lambda_v = 1 / sqrt(#Phi^{-1}(Phi(v)))``, the canonical isometry."""
    def lam(v):
        return 1.0 / math.sqrt(len(T.preimages(T.phi(v))))

    rays = []
    for i, b in enumerate(T.rays):
        rays.append(Branch(b.anchor, (lam(("r", i, 1)),), (1.0,)))
    tails = [Branch(b.anchor, (), (1.0,)) for b in T.tails]
    return TreeSystem(T.core, dict(T.core_map), {u: lam(("c", u)) for u in T.core}, rays, tails)


def is_isometry(T: TreeSystem, tol=1e-12) -> bool:
    """``sum_{v in Phi^{-1}(u)} |lambda_v|^2 == 1`` for every vertex ``u``."""
    probe = [("c", u) for u in T.core]
    for i, b in enumerate(T.rays):
        probe += [("r", i, k) for k in range(1, len(b.preperiod) + len(b.period) + 2)]
    for j, b in enumerate(T.tails):
        probe += [("t", j, k) for k in range(1, len(b.preperiod) + len(b.period) + 2)]
    return all(abs(sum(abs(T.weight(v)) ** 2 for v in T.preimages(u)) - 1.0) <= tol for u in probe)


# --------------------------------------------------------------------------
# invariant decomposition and predicted spectrum

@dataclass
class Piece:
    """Connected part of the presentation after cutting zero-weight edges."""

    nodes: set = field(default_factory=set)
    rays: list = field(default_factory=list)      # (geometric mean, ray index)
    tail: tuple | None = None                      # (geometric mean, tail index)
    has_leaf: bool = False


@dataclass(frozen=True)
class BijectiveComponent:
    ray: int
    tail: int
    core_path: tuple
    g_minus: float
    g_plus: float

    def describe(self) -> str:
        return f"line:ray{self.ray}+tail{self.tail}"


@dataclass(frozen=True)
class InvariantDecomposition:
    bijective_components: list
    residual_rays: list
    residual_tails: list
    pieces: list
    zero_point: bool

    @property
    def N(self) -> int:
        return len(self.bijective_components)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "bijective_components": [
                {"id": c.describe(), "ray": c.ray, "tail": c.tail, "core_path": list(c.core_path),
                 "g_minus": c.g_minus, "g_plus": c.g_plus} for c in self.bijective_components],
            "residual": {"rays": self.residual_rays, "tails": self.residual_tails},
        }


def _skeleton(T: TreeSystem):
    """Finite graph: core, preperiod vertices, and one node per periodic remainder.

    Returns ``(edges, zero_point)`` with edges ``(u, Phi(u), weight)``.
    """
    edges = []
    zero_point = False
    for u in T.core:
        if u in T.core_map:
            tgt = ("c", T.core_map[u])
        else:
            j = T._tail_of[u]
            tgt = ("tp", j, 1) if T.tails[j].preperiod else ("te", j)
        edges.append((("c", u), tgt, T.core_weights[u]))
    for i, b in enumerate(T.rays):
        p = len(b.preperiod)
        for k in range(1, p + 1):
            tgt = ("c", b.anchor) if k == 1 else ("rp", i, k - 1)
            edges.append((("rp", i, k), tgt, b.preperiod[k - 1]))
        if b.geometric_mean > 0:
            tgt = ("c", b.anchor) if p == 0 else ("rp", i, p)
            edges.append((("re", i), tgt, b.period[0]))
        else:
            # the periodic part splits into finite chains: contributes only 0
            zero_point = True
    for j, b in enumerate(T.tails):
        p = len(b.preperiod)
        for k in range(1, p + 1):
            tgt = ("te", j) if k == p else ("tp", j, k + 1)
            edges.append((("tp", j, k), tgt, b.preperiod[k - 1]))
        if b.geometric_mean == 0:
            zero_point = True
    return edges, zero_point


def _pieces(T: TreeSystem):
    edges, zero_point = _skeleton(T)
    nodes = {e[0] for e in edges} | {e[1] for e in edges}
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    live_in = {v: 0 for v in nodes}
    for u, v, w in edges:
        if w != 0:
            parent[find(u)] = find(v)
            live_in[v] += 1
    groups = {}
    for v in nodes:
        groups.setdefault(find(v), Piece()).nodes.add(v)
    pieces = sorted(groups.values(), key=lambda p: sorted(map(str, p.nodes)))
    for pc in pieces:
        for v in pc.nodes:
            if v[0] == "re":
                pc.rays.append((T.rays[v[1]].geometric_mean, v[1]))
            elif v[0] == "te":
                g = T.tails[v[1]].geometric_mean
                if g > 0:
                    pc.tail = (g, v[1])
            if v[0] != "re" and live_in[v] == 0:
                pc.has_leaf = True
        pc.rays.sort(key=lambda t: (-t[0], t[1]))
        if not pc.rays and pc.tail is None:
            pc.has_leaf = True
        zero_point |= pc.has_leaf
    return pieces, zero_point


def decompose_invariant(T: TreeSystem) -> InvariantDecomposition:
    """Split into bijective lines and a residual part.

    Zero weights decouple the operator, so the map is considered on the
    graph with zero-weight edges removed. Each connected piece with a tail
    and at least one ray contains a line; the ray with the largest
    geometric mean (lowest index on ties) is glued to the tail, because
    the spectrum of the piece is governed by that ray. Everything else is
    residual.
    """
    pieces, zero_point = _pieces(T)
    comps, used_rays, used_tails = [], set(), set()
    for pc in pieces:
        if pc.tail is None or not pc.rays:
            continue
        g, i = pc.rays[0]
        j = pc.tail[1]
        path, u = [], T.rays[i].anchor
        while True:
            path.append(u)
            if u not in T.core_map:
                break
            u = T.core_map[u]
        comps.append(BijectiveComponent(i, j, tuple(path), g, pc.tail[0]))
        used_rays.add(i)
        used_tails.add(j)
    comps.sort(key=lambda c: (c.tail, c.ray))
    return InvariantDecomposition(
        comps,
        [i for i in range(len(T.rays)) if i not in used_rays],
        [j for j in range(len(T.tails)) if j not in used_tails],
        pieces, zero_point)


def predicted_spectrum(T: TreeSystem) -> SpectrumDescription:
    """Disk and annuli predicted from tail geometric means.

    Per connected piece (zero-weight edges cut), with ray means
    ``g_1 >= g_2 >= ...`` and tail mean ``g_t``:

    * tail and rays: annulus between ``g_1`` and ``g_t``, plus the disk of
      radius ``g_2`` when a second ray exists;
    * tail only: disk of radius ``g_t``;
    * rays only: disk of radius ``g_1``;
    * leaves or finite pieces add the point 0.
    """
    dec = decompose_invariant(T)
    intervals = []
    for pc in dec.pieces:
        gs = [g for g, _ in pc.rays]
        if pc.tail is not None:
            gt, j = pc.tail
            if gs:
                i = pc.rays[0][1]
                intervals.append((min(gs[0], gt), max(gs[0], gt), f"line:ray{i}+tail{j}"))
                if len(gs) >= 2:
                    intervals.append((0.0, gs[1], "residual"))
            else:
                intervals.append((0.0, gt, "residual"))
        elif gs:
            intervals.append((0.0, gs[0], "residual"))
    hyp = {"topologically_free": True, "condition_I": True, "essential_equals_full": False}
    return from_intervals(intervals, hyp, certified=False, note=PREDICTION_FLAG,
                          zero_point=dec.zero_point)


# --------------------------------------------------------------------------
# finite sections

@dataclass(frozen=True)
class WindowTruncation:
    n: int
    vertices: list
    M: sp.csr_matrix

    @property
    def entries(self) -> list:
        """``(row, col, weight)`` for every in-window edge, zero weights included."""
        coo = self.M.tocoo()
        return sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))


def truncate(T: TreeSystem, n: int) -> WindowTruncation:
    """Compress ``S`` to the first ``n`` vertices: ``M[v, Phi(v)] = lambda_v``.

    Zero weights are stored explicitly so the edge pattern stays visible.
    """
    if n < 1:
        raise ValueError("window size must be positive")
    verts = T.vertex_order(n)
    pos = {v: k for k, v in enumerate(verts)}
    rows, cols, vals = [], [], []
    for k, v in enumerate(verts):
        t = pos.get(T.phi(v))
        if t is not None:
            rows.append(k)
            cols.append(t)
            vals.append(complex(T.weight(v)))
    data = np.array(vals, dtype=complex)
    if np.all(data.imag == 0):
        data = data.real
    M = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return WindowTruncation(n, verts, M)


def bordered_sections(T: TreeSystem, verts: list, lam: complex):
    """Tall sections of ``S - lam`` and ``S* - conj(lam)`` on columns ``verts``.

    The rows run over every vertex the columns can reach, so
    ``||(S - lam) x|| = ||B x||`` exactly for ``x`` supported on the window
    (likewise for the adjoint). Hence the smallest singular value is an
    upper bound for the true lower bound of the operator and decreases
    along nested windows.
    """
    n = len(verts)
    pos = {v: k for k, v in enumerate(verts)}

    def row(v, table):
        if v not in table:
            table[v] = len(table)
        return table[v]

    rA, rB = dict(pos), dict(pos)
    ea, eb = [], []
    for k, u in enumerate(verts):
        ea.append((k, k, -lam))
        for v in T.preimages(u):
            ea.append((row(v, rA), k, T.weight(v)))
        eb.append((k, k, -np.conj(lam)))
        eb.append((row(T.phi(u), rB), k, np.conj(T.weight(u))))

    def build(entries, nrows):
        r, c, d = zip(*entries)
        return sp.csr_matrix((np.array(d, dtype=complex), (r, c)), shape=(nrows, n))

    return build(ea, len(rA)), build(eb, len(rB))


def sigma_min(B) -> float:
    """Smallest singular value of a tall matrix (dense SVD up to ``DENSE_LIMIT`` columns)."""
    n = B.shape[1]
    if n <= DENSE_LIMIT:
        return float(scipy.linalg.svdvals(B.toarray(), check_finite=False)[-1])
    G = (B.conj().T @ B).tocsc()
    try:
        ev = spla.eigsh(G, k=1, sigma=0, which="LM", return_eigenvectors=False)
        return float(math.sqrt(max(ev[0].real, 0.0)))
    except RuntimeError:  # exactly singular normal matrix
        return 0.0


def section_value(T: TreeSystem, verts, lam) -> float:
    """``min`` of the two bordered-section singular values at ``lam``."""
    BA, BB = bordered_sections(T, verts, lam)
    return min(sigma_min(BA), sigma_min(BB))


# --------------------------------------------------------------------------
# pseudospectrum

@dataclass(frozen=True)
class GridSpec:
    n_radii: int = DEFAULT_GRID[0]
    n_angles: int = DEFAULT_GRID[1]
    radius: float | None = None        # bounding radius; default 1.1 * sup |lambda|
    extra_radii: tuple = ()

    def radii(self, sup_weight: float) -> np.ndarray:
        R = self.radius if self.radius is not None else 1.1 * sup_weight
        r = np.linspace(0.0, R, self.n_radii)
        return np.unique(np.concatenate([r, np.asarray(self.extra_radii, float)]))

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_angles) / self.n_angles


@dataclass
class PseudospectrumGrid:
    radii: np.ndarray
    angles: np.ndarray
    windows: tuple
    epsilon: float
    values: np.ndarray            # (n_radii, n_angles, n_windows)
    verdicts: np.ndarray          # (n_radii, n_angles) of "IN" / "OUT" / "UNDECIDED"
    prediction: SpectrumDescription | None = None

    def verdict_at_radius(self, k) -> str:
        return str(self.verdicts[k, 0])

    def counts(self) -> dict:
        vals, cnt = np.unique(self.verdicts, return_counts=True)
        out = {"IN": 0, "OUT": 0, "UNDECIDED": 0}
        out.update({str(v): int(c) for v, c in zip(vals, cnt)})
        return out

    def comparison(self, margin=None) -> dict:
        """Agreement with the prediction.

        A contradiction is an OUT verdict on a predicted radius, or an IN
        verdict farther than ``margin`` (default ``5 * epsilon``) from the
        predicted set. A predicted component is confirmed when some IN
        radius lies in it.
        """
        if self.prediction is None:
            return {}
        margin = 5 * self.epsilon if margin is None else margin
        dist = np.array([self.prediction.distance(r) for r in self.radii])
        is_in = np.any(self.verdicts == "IN", axis=1)
        is_out = np.any(self.verdicts == "OUT", axis=1)
        bad = (self.verdicts == "IN") & (dist[:, None] > margin)
        bad |= (self.verdicts == "OUT") & (dist[:, None] == 0)
        confirmed = [bool(np.any(is_in & (self.radii >= lo) & (self.radii <= hi)))
                     for lo, hi in self.prediction.radial_intervals()]
        return {
            "contradictions": int(bad.sum()),
            "undecided_fraction": float(np.mean(self.verdicts == "UNDECIDED")),
            "max_in_distance": float(dist[is_in].max()) if is_in.any() else 0.0,
            "out_inside_prediction": int(np.sum(is_out & (dist == 0))),
            "confirmed_components": confirmed,
            "margin": margin,
        }

    def certified(self) -> bool:
        """True when no verdict contradicts the prediction."""
        return self.comparison()["contradictions"] == 0

    def to_csv(self) -> str:
        head = ["radius", "angle"] + [f"sigma_min_n{n}" for n in self.windows] + ["verdict"]
        lines = [",".join(head)]
        for a in range(len(self.radii)):
            for b in range(len(self.angles)):
                vals = [_fmt(self.radii[a]), _fmt(self.angles[b])]
                vals += [_fmt(x) for x in self.values[a, b]]
                lines.append(",".join(vals + [str(self.verdicts[a, b])]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        out = {
            "schema": 1,
            "windows": list(self.windows),
            "epsilon": self.epsilon,
            "grid": {"radii": len(self.radii), "angles": len(self.angles),
                     "bounding_radius": float(self.radii[-1])},
            "counts": self.counts(),
        }
        if self.prediction is not None:
            out["prediction"] = self.prediction.to_json()
            out["comparison"] = self.comparison()
            out["certified"] = self.certified()
        return out


def _fmt(x) -> str:
    return format(float(x), ".17g")


def verdict(values, epsilon) -> str:
    """Verdict from section values for increasing windows.

    IN: last value ``<= epsilon`` and the sequence nonincreasing (up to
    rounding). OUT: last value at least ``5 * epsilon`` plus the last drop,
    i.e. the values have settled above the threshold. Otherwise UNDECIDED.
    """
    v = np.asarray(values, float)
    slack = 1e-12 + 1e-9 * v[:-1]
    monotone = bool(np.all(v[1:] <= v[:-1] + slack))
    if v[-1] <= epsilon and monotone:
        return "IN"
    drop = max(0.0, v[-2] - v[-1]) if len(v) > 1 else 0.0
    if v[-1] >= 5 * epsilon + drop:
        return "OUT"
    return "UNDECIDED"


def pseudospectrum(T: TreeSystem, windows=DEFAULT_WINDOWS, grid: GridSpec = GridSpec(),
                   epsilon=DEFAULT_EPSILON, threads=1, full=False) -> PseudospectrumGrid:
    """Evaluate bordered-section singular values on a polar grid.

    The operator is unitarily equivalent to its rotations and to the system
    with weights replaced by their moduli (diagonal phase gauge on a tree),
    so by default one real point per radius is computed and the result is
    shared by all angles. ``full=True`` evaluates every grid point with the
    original complex weights.
    """
    if grid.n_angles < 16 or grid.n_radii < 32:
        raise GridTooCoarse(f"grid {grid.n_radii}x{grid.n_angles} below the 32x16 minimum",
                            radii=grid.n_radii, angles=grid.n_angles)
    sup = T.sup_weight
    if grid.radius is not None and grid.radius < 1.1 * sup - 1e-12:
        raise GridTooCoarse(f"bounding radius {grid.radius} below 1.1 * sup|lambda| = {1.1 * sup}")
    windows = tuple(sorted(int(n) for n in windows))
    radii, angles = grid.radii(sup), grid.angles()
    order = T.vertex_order(windows[-1])

    if full:
        pts = [(a, b) for a in range(len(radii)) for b in range(len(angles))]
        system = T
    else:
        pts = [(a, 0) for a in range(len(radii))]
        system = T.with_weights(abs)

    def work(p):
        a, b = p
        lam = radii[a] * np.exp(1j * angles[b]) if full else radii[a]
        return [section_value(system, order[:n], lam) for n in windows]

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(work, pts))
    else:
        res = [work(p) for p in pts]

    values = np.zeros((len(radii), len(angles), len(windows)))
    for (a, b), v in zip(pts, res):
        values[a, b] = v
    if not full:
        values[:] = values[:, :1, :]
    verdicts = np.empty(values.shape[:2], dtype=object)
    for a in range(len(radii)):
        for b in range(len(angles)):
            verdicts[a, b] = verdict(values[a, b], epsilon)
    return PseudospectrumGrid(radii, angles, windows, epsilon, values, verdicts.astype(str),
                              predicted_spectrum(T))
