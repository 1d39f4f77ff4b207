"""Locally constant functions on a shift space.

A :class:`CylinderFunction` of depth ``N`` is a table of values over the
admissible ``N``-words of a transition matrix (in lexicographic word order).
It represents potentials ``b``, weights ``a`` and cocycles.

Real tables may contain ``-inf``; this is how ``ln 0`` is represented, and
``exp(-inf) == 0`` brings it back.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import sft
from .errors import (
    DomainError,
    InadmissibleWord,
    NotNormalized,
    OutOfRange,
    ValidationError,
    ZeroColumn,
)

COCYCLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    A: sft.TransitionMatrix
    depth: int
    values: np.ndarray
    cap: int = sft.DEFAULT_DEPTH_CAP

    def __post_init__(self):
        v = np.array(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if len(v) != len(self.words):
            raise ValidationError(
                f"expected {len(self.words)} values for depth {self.depth}, got {len(v)}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def words(self) -> list:
        return sft.admissible_words(self.A, self.depth, self.cap)

    @cached_property
    def index(self) -> dict:
        return sft.word_index(self.words)

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    @cached_property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def __call__(self, word):
        """Value on an admissible word of length >= depth (prefix rule)."""
        w = tuple(word)
        if len(w) < self.depth:
            raise InadmissibleWord(f"word {w} shorter than depth {self.depth}")
        try:
            return self.values[self.index[w[:self.depth]]]
        except KeyError:
            raise InadmissibleWord(f"word {w} is not admissible") from None

    def as_dict(self) -> dict:
        return {sft.format_word(w, self.A.n): v for w, v in zip(self.words, self.values.tolist())}

    def __mul__(self, other):
        if isinstance(other, CylinderFunction):
            return pointwise(self, other, "mul")
        return pointwise(self, op="scale", t=other)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CylinderFunction(depth={self.depth}, n_words={len(self.words)})"


# --------------------------------------------------------------------------
# constructors

def constant(A, value, depth=1, cap=sft.DEFAULT_DEPTH_CAP) -> CylinderFunction:
    n = len(sft.admissible_words(A, depth, cap))
    dtype = complex if isinstance(value, complex) else float
    return CylinderFunction(A, depth, np.full(n, value, dtype=dtype), cap)


def from_function(A, depth, fn, cap=sft.DEFAULT_DEPTH_CAP) -> CylinderFunction:
    words = sft.admissible_words(A, depth, cap)
    return CylinderFunction(A, depth, np.array([fn(w) for w in words]), cap)


def indicator(A, prefix, depth=None) -> CylinderFunction:
    """Indicator of the cylinder of words starting with ``prefix``."""
    prefix = tuple(prefix)
    depth = depth or len(prefix)
    return from_function(A, depth, lambda w: 1.0 if w[:len(prefix)] == prefix else 0.0)


def from_mapping(A, depth, mapping, cap=sft.DEFAULT_DEPTH_CAP) -> CylinderFunction:
    """Build from ``{word: value}``; every admissible word must be present."""
    words = sft.admissible_words(A, depth, cap)
    idx = sft.word_index(words)
    vals = [None] * len(words)
    for key, v in mapping.items():
        w = sft.parse_word(key, A.n)
        if len(w) != depth or w not in idx:
            raise InadmissibleWord(f"key {key!r} is not an admissible {depth}-word", word=str(key))
        vals[idx[w]] = _scalar(v)
    missing = [sft.format_word(w, A.n) for w, v in zip(words, vals) if v is None]
    if missing:
        raise ValidationError(f"missing values for admissible words {missing[:5]}", missing=missing)
    return CylinderFunction(A, depth, np.array(vals), cap)


def _scalar(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("-inf", "-infinity"):
            return -np.inf
        return complex(s.replace("i", "j")) if ("j" in s or "i" in s) else float(s)
    return v


# --------------------------------------------------------------------------
# operations

def lift_depth(f: CylinderFunction, M: int) -> CylinderFunction:
    """Re-tabulate ``f`` on admissible ``M``-words (value = f on the prefix)."""
    if M < f.depth:
        raise ValueError(f"cannot lower depth {f.depth} to {M}")
    if M == f.depth:
        return f
    words = sft.admissible_words(f.A, M, f.cap)
    idx = f.index
    vals = f.values[[idx[w[:f.depth]] for w in words]]
    return CylinderFunction(f.A, M, vals, f.cap)


def common_depth(*fs):
    d = max(f.depth for f in fs)
    return [lift_depth(f, d) for f in fs]


def pointwise(f: CylinderFunction, g: CylinderFunction | None = None, op: str = "mul",
              t=None) -> CylinderFunction:
    """Pointwise ``mul``, ``abs``, ``ln``, ``exp`` or ``scale`` (by ``t``).

    ``ln`` maps 0 to ``-inf`` and rejects negative or complex input;
    ``exp`` maps ``-inf`` to 0.
    """
    if op == "mul":
        if g is None:
            raise ValueError("mul needs two operands")
        if g.A is not f.A and g.A != f.A:
            raise ValidationError("operands live on different shifts")
        f2, g2 = common_depth(f, g)
        return CylinderFunction(f.A, f2.depth, f2.values * g2.values, f.cap)
    if g is not None:
        raise ValueError(f"{op} is unary")
    v = f.values
    if op == "abs":
        out = np.abs(v)
    elif op == "ln":
        if f.is_complex:
            raise DomainError("ln needs real input; take abs first")
        if np.any(v < 0):
            raise DomainError("ln of a negative value")
        with np.errstate(divide="ignore"):
            out = np.log(v)
    elif op == "exp":
        out = np.exp(v)
    elif op == "scale":
        out = v * t
    else:
        raise ValueError(f"unknown op {op!r}")
    return CylinderFunction(f.A, f.depth, out, f.cap)


def log(f):
    return pointwise(f, op="ln")


def exp(f):
    return pointwise(f, op="exp")


@dataclass(frozen=True)
class CocycleCheck:
    ok: bool
    strict: bool
    min_value: float
    max_defect: float


def validate_cocycle(rho: CylinderFunction, tol: float = COCYCLE_TOL) -> CocycleCheck:
    """Check that preimage sums of ``rho`` equal 1.

    For each admissible ``N``-word ``v`` (standing for the points of its
    cylinder) the values on the words ``(i, v_1, ..., v_{N-1})`` with
    ``A[i, v_1] == 1`` must sum to 1 within ``tol``.
    """
    if rho.is_complex:
        raise OutOfRange("cocycle must be real")
    v = rho.values
    if np.any(~np.isfinite(v)) or np.any(v < -tol) or np.any(v > 1 + tol):
        k = int(np.flatnonzero(~np.isfinite(v) | (v < -tol) | (v > 1 + tol))[0])
        raise OutOfRange(f"cocycle value {v[k]} on {rho.words[k]} outside [0,1]",
                         word=list(rho.words[k]))
    A, N = rho.A, rho.depth
    idx = rho.index
    worst = 0.0
    for w in rho.words:
        tail = w[:N - 1]
        s = sum(v[idx[(int(i),) + tail]] for i in A.predecessors(w[0]))
        defect = abs(s - 1.0)
        worst = max(worst, defect)
        if defect > tol:
            raise NotNormalized(f"preimage sum over {w} is {s}", word=list(w), sum=float(s))
    return CocycleCheck(True, bool(v.min() > 0), float(v.min()), worst)


def uniform_cocycle(A: sft.TransitionMatrix) -> CylinderFunction:
    """``rho(i, j) = 1 / (number of predecessors of j)``."""
    cols = A.in_degree
    if np.any(cols == 0):
        j = int(np.flatnonzero(cols == 0)[0])
        raise ZeroColumn(f"column {j} has no predecessor", j=j)
    return from_function(A, 2, lambda w: 1.0 / cols[w[1]])
