"""Command-line interface.

Every command reads a model (JSON file, or the built-in tree name
``contrexample``) and writes a JSON result to stdout or ``--out``. Exit
codes: 0 success, 2 invalid input, 3 numerical non-convergence (the best
available enclosure is still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, measures, render, ruelle, sft, spectra, treelab
from . import potentials as pot
from .errors import ConvergenceError, ThermoshiftError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3

COMMANDS = ("validate", "decompose", "freeness", "pressure", "gibbs", "radius", "spectrum",
            "tentropy", "tree-spectrum", "pseudospectrum", "render")


class Nonconverged(Exception):
    def __init__(self, payload):
        self.payload = payload


# --------------------------------------------------------------------------
# helpers

def _sft(model) -> io.SFTModel:
    if not isinstance(model, io.SFTModel):
        raise ValidationError("this command needs an sft model")
    return model


def _tree(model) -> treelab.TreeSystem:
    if not isinstance(model, treelab.TreeSystem):
        raise ValidationError("this command needs a tree model")
    return model


def _potential(m: io.SFTModel):
    return m.get("potential") or pot.constant(m.A, 0.0)


def _weight(m: io.SFTModel):
    return m.get("weight") or pot.constant(m.A, 1.0)


def _cocycle(m: io.SFTModel):
    return m.get("cocycle") or pot.uniform_cocycle(m.A)


def _gibbs_weight(m: io.SFTModel):
    if m.get("weight") is not None:
        return m.get("weight")
    return pot.exp(_potential(m))


def _parse_grid(s):
    try:
        r, a = s.lower().split("x")
        return int(r), int(a)
    except ValueError:
        raise ValidationError(f"--grid expects RxA, got {s!r}") from None


def _parse_windows(s):
    try:
        w = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise ValidationError(f"--windows expects n1,n2,..., got {s!r}") from None
    if len(w) < 2 or any(n < 1 for n in w):
        raise ValidationError("--windows needs at least two positive sizes")
    return w


def _lab_args(args):
    nr, na = _parse_grid(args.grid)
    return dict(windows=_parse_windows(args.windows), grid=treelab.GridSpec(nr, na),
                epsilon=args.epsilon, threads=args.threads)


def _check_converged(payload, converged):
    if not converged:
        payload["error"] = "MaxIterations"
        raise Nonconverged(payload)
    return payload


# --------------------------------------------------------------------------
# commands

def cmd_validate(model, args):
    if isinstance(model, treelab.TreeSystem):
        dec = treelab.decompose_invariant(model)
        return {"schema": 1, "ok": True, "kind": "tree", "core": len(model.core),
                "rays": len(model.rays), "tails": len(model.tails), "N": dec.N,
                "isometry": treelab.is_isometry(model)}
    m = _sft(model)
    out = {"schema": 1, "ok": True, "kind": "sft", "states": m.A.n,
           "cuntz_krieger_columns": bool(np.all(m.A.in_degree > 0)), "functions": {}}
    for name, f in m.functions.items():
        if isinstance(f, pot.CylinderFunction):
            out["functions"][name] = {"depth": f.depth, "words": len(f.words),
                                      "complex": f.is_complex}
    if m.get("cocycle") is not None:
        chk = pot.validate_cocycle(m.get("cocycle"), args.tol if args.tol < 1e-6 else 1e-12)
        out["functions"]["cocycle"].update({"strict": chk.strict, "max_defect": chk.max_defect})
    return out


def cmd_decompose(model, args):
    A = _sft(model).A
    cl = sft.classify(A)
    dec = sft.decompose(A)
    return {"schema": 1, "sccs": cl.sccs, "essential": sorted(cl.essential),
            "condensation": {str(k): v for k, v in cl.condensation.items()},
            "blocks": [{"states": s, "period": p, "cyclic_classes": c, "matrix": b.tolist()}
                       for s, p, c, b in zip(dec.states, dec.periods, dec.classes, dec.blocks)],
            "relabeling": dec.relabeling}


def cmd_freeness(model, args):
    fr = sft.freeness(_sft(model).A)
    return {"schema": 1, "condition_I": fr.condition_I, "topologically_free": fr.topologically_free,
            "sink_cycles": fr.sink_cycles, "feeder_states": fr.feeder_states}


def cmd_pressure(model, args):
    m = _sft(model)
    res = ruelle.pressure(m.A, _potential(m), args.tol, args.max_iter)
    enc = res.radius
    payload = {"schema": 1, "pressure": res.value, "enclosure": list(res.enclosure),
               "perron_root": enc.rho, "perron_enclosure": [enc.lo, enc.hi],
               "converged": res.converged, "iterations": enc.iterations}
    return _check_converged(payload, res.converged)


def cmd_gibbs(model, args):
    m = _sft(model)
    c = _gibbs_weight(m)
    T = ruelle.build_transfer(m.A, c)
    try:
        data = ruelle.perron_eigendata(T.W, args.tol, args.max_iter)
    except ConvergenceError as exc:
        d = exc.result
        raise Nonconverged({"schema": 1, "error": "MaxIterations", "perron_root": d.rho,
                            "perron_enclosure": [d.lo, d.hi]}) from None
    mu = ruelle.gibbs_markov(m.A, c, args.tol)
    W = T.W
    res_h = float(np.max(np.abs(W.T @ data.l - data.rho * data.l)) / np.max(np.abs(data.l)))
    res_nu = float(np.max(np.abs(W @ data.r - data.rho * data.r)) / np.max(np.abs(data.r)))
    out = {"schema": 1, "measure": mu.to_json(), "pressure": float(np.log(data.rho)),
           "perron_root": data.rho, "perron_enclosure": [data.lo, data.hi],
           "residuals": {"eigenfunction": res_h, "eigenmeasure": res_nu},
           "block_states": [list(w) for w in T.presentation.block_states],
           "eigenfunction": data.l.tolist(), "eigenmeasure": (data.r / data.r.sum()).tolist()}
    return out


def cmd_radius(model, args):
    m = _sft(model)
    a, rho = _weight(m), _cocycle(m)
    rad = spectra.weighted_shift_radius(m.A, a, rho, args.tol)
    out = {"schema": 1, "radius": rad.radius, "enclosure": list(rad.enclosure),
           "pressure": rad.pressure.value, "converged": rad.pressure.converged}
    if args.variational:
        out["variational_radius"] = spectra.variational_radius(m.A, a, rho, args.restarts,
                                                               seed=args.seed)
    return _check_converged(out, rad.pressure.converged)


def cmd_spectrum(model, args):
    m = _sft(model)
    a, rho = _weight(m), _cocycle(m)
    desc = spectra.spectrum_sft(m.A, a, rho, args.tol)
    out = desc.to_json()
    rad = spectra.weighted_shift_radius(m.A, a, rho, args.tol)
    out["enclosure"] = list(rad.enclosure)
    if args.svg:
        Path(args.svg).write_text(render.spectrum_svg(out))
    return out


def cmd_tentropy(model, args):
    m = _sft(model)
    rho = _cocycle(m)
    mdesc = m.get("measure")
    if isinstance(mdesc, dict) and "Q" in mdesc:
        mu = measures.markov_from_Q(m.A, np.asarray(mdesc["Q"], float))
    else:
        mu = ruelle.gibbs_markov(m.A, _gibbs_weight(m), args.tol)
    value = measures.t_entropy(mu, rho)
    est = measures.t_entropy_definition_estimate(mu, rho, args.horizon, args.partition_depth)
    return {"schema": 1, "t_entropy": value, "definition_estimate": est,
            "horizon": args.horizon, "partition_depth": args.partition_depth,
            "gap": est - value, "measure": mu.to_json()}


def cmd_tree_spectrum(model, args):
    T = _tree(model)
    pred = treelab.predicted_spectrum(T)
    dec = treelab.decompose_invariant(T)
    out = {"schema": 1, "prediction": pred.to_json(), "decomposition": dec.to_json(),
           "components": pred.n_components, "component_bound": dec.N + 1}
    if args.certify:
        g = treelab.pseudospectrum(T, **_lab_args(args))
        comp = g.comparison()
        out["certification"] = {"verdict": "PASS" if g.certified() else "FAIL", **comp,
                                "counts": g.counts(), "windows": list(g.windows),
                                "epsilon": g.epsilon}
    if args.svg:
        Path(args.svg).write_text(render.spectrum_svg(pred.to_json()))
    return out


def cmd_pseudospectrum(model, args):
    T = _tree(model)
    g = treelab.pseudospectrum(T, **_lab_args(args))
    csv_path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
    if csv_path:
        Path(csv_path).write_text(g.to_csv())
    if args.svg:
        Path(args.svg).write_text(render.pseudospectrum_svg(g.radii, g.angles, g.verdicts))
    out = g.to_json()
    out["csv"] = csv_path
    return out


def cmd_render(path, args):
    target = args.svg or args.out
    if not target:
        raise ValidationError("render needs --svg or --out")
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    desc = doc.get("prediction", doc)
    if "disk" not in desc or "rings" not in desc:
        raise ValidationError("render needs a spectrum result (with 'disk' and 'rings')")
    Path(target).write_text(render.spectrum_svg(desc))
    return {"schema": 1, "svg": target}


HANDLERS = {
    "validate": cmd_validate, "decompose": cmd_decompose, "freeness": cmd_freeness,
    "pressure": cmd_pressure, "gibbs": cmd_gibbs, "radius": cmd_radius,
    "spectrum": cmd_spectrum, "tentropy": cmd_tentropy, "tree-spectrum": cmd_tree_spectrum,
    "pseudospectrum": cmd_pseudospectrum,
}


# --------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermoshift",
                                description="Pressure, Gibbs measures and weighted shift spectra.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("model", help="model JSON file, or 'contrexample' for the built-in tree")
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--tol", type=float, default=ruelle.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=int(ruelle.DEFAULT_MAX_ITER))
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variational", action="store_true",
                   help="radius: also report the variational-search radius")
    p.add_argument("--horizon", type=int, default=6, help="tentropy: n in the definition estimate")
    p.add_argument("--partition-depth", type=int, default=6,
                   help="tentropy: cylinder depth m in the definition estimate")
    p.add_argument("--grid", default="64x64", help="radii x angles")
    p.add_argument("--epsilon", type=float, default=treelab.DEFAULT_EPSILON)
    p.add_argument("--windows", default=",".join(map(str, treelab.DEFAULT_WINDOWS)))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--svg", help="also write an SVG picture")
    p.add_argument("--csv", help="pseudospectrum: CSV path (default: next to --out)")
    p.add_argument("--certify", action="store_true", help="tree-spectrum: run the pseudospectrum lab")
    return p


def _emit(payload, out):
    text = io.dumps(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            payload = cmd_render(args.model, args)
        else:
            model = io.load_model(args.model)
            payload = HANDLERS[args.command](model, args)
    except Nonconverged as exc:
        _emit(exc.payload, args.out)
        return EXIT_NONCONVERGED
    except ConvergenceError as exc:
        _emit(exc.as_dict(), args.out)
        return EXIT_NONCONVERGED
    except ThermoshiftError as exc:
        sys.stderr.write(io.dumps(exc.as_dict()))
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        sys.stderr.write(io.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        return EXIT_INVALID
    _emit(payload, args.out)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
