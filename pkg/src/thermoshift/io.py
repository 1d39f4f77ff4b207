"""Model files and deterministic JSON output.

Model files are JSON with a top-level ``"schema": 1``. An SFT model::

    {"schema": 1, "kind": "sft",
     "matrix": [[1, 1], [1, 0]],            # or "states": n, "edges": [[i, j], ...]
     "cuntz_krieger": false,
     "functions": {
        "potential": {"depth": 2, "values": {"00": 0.1, "01": -0.3, "10": 0.0}},
        "weight":    {"constant": 1.0},
        "cocycle":   "uniform"
     }}

A function is ``{"depth": N, "values": {word: value}}``, ``{"constant": v}``,
``{"edges": matrix}`` (depth 2, entry ``[i][j]`` on the word ``ij``) or the
string ``"uniform"`` (the uniform cocycle). Complex values are ``[re, im]``
and ``"-inf"`` stands for ``ln 0``. Tree models use ``"kind": "tree"``; see
:func:`thermoshift.treelab.from_json`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import potentials as pot
from . import sft
from .errors import ValidationError

SCHEMA = 1
FUNCTION_NAMES = ("potential", "weight", "cocycle", "measure")


# --------------------------------------------------------------------------
# output

def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits.

    ``inf``/``-inf``/``nan`` become the strings ``"inf"``/``"-inf"``/``"nan"``.
    Key order is preserved, so equal inputs give byte-identical output.
    """

    def enc(o, level):
        o = _plain(o)
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _num(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(_plain(v), (int, float, bool, str)) or v is None for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


# --------------------------------------------------------------------------
# input

@dataclass
class SFTModel:
    A: sft.TransitionMatrix
    functions: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def get(self, name, default=None):
        return self.functions.get(name, default)


def _check_schema(doc):
    if not isinstance(doc, dict):
        raise ValidationError("model must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ValidationError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA}")


def parse_matrix(doc) -> sft.TransitionMatrix:
    ck = bool(doc.get("cuntz_krieger", False))
    if "matrix" in doc:
        return sft.validate(doc["matrix"], cuntz_krieger=ck)
    if "states" in doc and "edges" in doc:
        return sft.from_edges(int(doc["states"]), [tuple(e) for e in doc["edges"]], ck)
    raise ValidationError("sft model needs 'matrix' or 'states' + 'edges'")


def parse_function(A, fdesc, name="function") -> pot.CylinderFunction:
    if fdesc == "uniform" or (isinstance(fdesc, dict) and fdesc.get("kind") == "uniform"):
        return pot.uniform_cocycle(A)
    if not isinstance(fdesc, dict):
        raise ValidationError(f"cannot parse {name!r}: {fdesc!r}")
    if "constant" in fdesc:
        return pot.constant(A, pot._scalar(fdesc["constant"]), int(fdesc.get("depth", 1)))
    if "edges" in fdesc:
        E = fdesc["edges"]
        return pot.from_function(A, 2, lambda w: pot._scalar(E[w[0]][w[1]]))
    if "values" in fdesc:
        vals = fdesc["values"]
        depth = fdesc.get("depth")
        if depth is None:
            depth = len(sft.parse_word(next(iter(vals)), A.n))
        return pot.from_mapping(A, int(depth), vals)
    raise ValidationError(f"function {name!r} needs 'constant', 'edges' or 'values'")


def parse_model(doc):
    """SFT models become :class:`SFTModel`; tree models a ``TreeSystem``."""
    from . import treelab

    _check_schema(doc)
    kind = doc.get("kind", "sft")
    if kind == "tree":
        return treelab.from_json(doc)
    if kind != "sft":
        raise ValidationError(f"unknown model kind {kind!r}")
    A = parse_matrix(doc)
    funcs = {}
    for name, fdesc in (doc.get("functions") or {}).items():
        if name == "measure":
            funcs[name] = fdesc
        else:
            funcs[name] = parse_function(A, fdesc, name)
    return SFTModel(A, funcs, doc)


def load_model(path):
    """Read a model file, or the built-in tree ``contrexample``."""
    from . import treelab

    if path == "contrexample":
        return treelab.build_example_contrexample()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return parse_model(doc)
