"""Command-line front end.

Exit status: 0 on success, 1 when a checked property fails (a witness is
printed on stderr), 2 on malformed input or an exceeded cap.
"""

import argparse
import math
import re
import sys

import numpy as np

from . import approx_engine as ae
from .cat0_deform import cat0_metric, sandwich_rows
from .coarse_models import (
    closeness_distance,
    euclidean_rotation_gap,
    graph_model,
    make_qi,
    pullback,
    pushforward,
)
from .cube_complex import one_skeleton, skeleton_to_json
from .formats import (
    DocumentError,
    algebra_from_doc,
    dumps_csv,
    dumps_json,
    graph_from_doc,
    hashable,
    instance_from_doc,
    load_json,
    model_from_doc,
)
from .median_core import (
    EXHAUSTIVE_CAP,
    InternalConsistencyError,
    MedianAlgebraError,
    closure_indices,
    crossing_matrix,
    cached_wall_masks,
    enumerate_walls,
    rank,
    verify_median_axioms,
)
from .median_metrics import rectified_metric, verify_median_metric, wall_thickness


class CheckFailed(Exception):
    """A verified property does not hold; carries the report to emit."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _algebra_doc(doc):
    return doc["algebra"] if isinstance(doc, dict) and "kind" not in doc and "algebra" in doc else doc


def _mode(args, n, cap):
    if args.mode == "exhaustive" and n > cap:
        raise DocumentError(f"cap exceeded: exhaustive mode allows at most {cap} points, got {n}")
    return args.mode


def _label(v):
    return list(v) if isinstance(v, tuple) else v


def cmd_validate(args, doc):
    M = algebra_from_doc(_algebra_doc(doc))
    mode = _mode(args, len(M), EXHAUSTIVE_CAP)
    rep = verify_median_axioms(M, mode=mode, samples=args.samples, seed=args.seed)
    out = {
        "size": len(M),
        "axioms": {
            "ok": rep.ok,
            "exhaustive": rep.exhaustive,
            "checked": rep.checked,
            "counts": rep.counts,
            "witnesses": [[name, [_label(v) for v in t]] for name, t in rep.violations[:10]],
        },
    }
    ok = rep.ok
    if ok and isinstance(doc, dict) and "algebra" in doc:
        inst = instance_from_doc(doc)
        mm = verify_median_metric(inst.metric, algebra=M)
        out["median_metric"] = {
            "ok": mm.ok,
            "matches_algebra": mm.matches_algebra,
            "reason": mm.reason,
            "witness": None if mm.witness is None else [_label(v) for v in mm.witness],
        }
        ok = mm.ok and bool(mm.matches_algebra)
        if not ok:
            raise CheckFailed(f"median metric check failed at {mm.witness}: {mm.reason or 'median differs'}", out)
    if not ok:
        raise CheckFailed(f"median identity fails: {rep.violations[0]}", out)
    return out, None


def cmd_closure(args, doc):
    M = algebra_from_doc(_need_key(doc, "algebra"))
    subset = [hashable(v) for v in _need_key(doc, "subset")]
    idx = closure_indices(M, M.indices_of(subset))
    pts = [M.elements[i] for i in idx]
    k = len(set(subset))
    bound = 2 ** (2**k) if k <= 5 else None
    out = {"closure": [_label(p) for p in pts], "size": len(pts), "generators": k, "bound": bound}
    rows = [[_label(p)] for p in pts]
    return out, (["element"], rows)


def _need_key(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise DocumentError(f"document is missing {key!r}")
    return doc[key]


def cmd_walls(args, doc):
    M = algebra_from_doc(_algebra_doc(doc))
    walls = enumerate_walls(M)
    masks = cached_wall_masks(M)
    cross = crossing_matrix(masks) if walls else np.zeros((0, 0), bool)
    idx = M.index
    out = {
        "walls": [
            {"half": sorted(idx[e] for e in W.half), "cohalf": sorted(idx[e] for e in W.cohalf)} for W in walls
        ],
        "crossing": [[i, j] for i in range(len(walls)) for j in range(i + 1, len(walls)) if cross[i, j]],
        "rank": rank(M),
    }
    rows = [[w, " ".join(map(str, d["half"])), " ".join(map(str, d["cohalf"]))] for w, d in enumerate(out["walls"])]
    return out, (["wall", "half", "cohalf"], rows)


def cmd_cubify(args, doc):
    M = algebra_from_doc(_algebra_doc(doc))
    skel = one_skeleton(M)
    out = skeleton_to_json(skel)
    rows = [[a, b, w] for (a, b), w in zip(skel.edges, skel.edge_wall)]
    return out, (["u", "v", "wall"], rows)


def _pair_rows(M, *mats):
    rows = []
    for i in range(len(M)):
        for j in range(i + 1, len(M)):
            rows.append([_label(M.elements[i]), _label(M.elements[j])] + [float(m[i, j]) for m in mats])
    return rows


def cmd_metric(args, doc):
    inst = instance_from_doc(doc)
    M = inst.algebra
    mm = verify_median_metric(inst.metric, algebra=M)
    out = {
        "elements": [_label(e) for e in M.elements],
        "matrix": inst.D,
        "median_metric": mm.ok,
        "matches_algebra": mm.matches_algebra,
    }
    if not (mm.ok and mm.matches_algebra):
        raise CheckFailed(f"not a median metric for med at {mm.witness}: {mm.reason or 'median differs'}", out)
    return out, (["x", "y", "d"], _pair_rows(M, inst.D))


def cmd_rectify(args, doc):
    inst = instance_from_doc(doc)
    M = inst.algebra
    rect = rectified_metric(inst)
    walls = enumerate_walls(M)
    th = wall_thickness(inst) if len(M) > 1 else {}
    out = {
        "elements": [_label(e) for e in M.elements],
        "thickness": {str(w): list(th[W]) for w, W in enumerate(walls)},
        "rectified": rect.matrix,
    }
    return out, (["x", "y", "d", "d_rect"], _pair_rows(M, inst.D, rect.matrix))


def cmd_cat0(args, doc):
    inst = instance_from_doc(doc)
    try:
        sigma = cat0_metric(inst)
    except InternalConsistencyError as exc:
        raise CheckFailed(str(exc)) from exc
    rows = sandwich_rows(inst, sigma)
    rows = [[_label(x), _label(y), d, s, lo, hi] for x, y, d, s, lo, hi in rows]
    out = {
        "rank": rank(inst.algebra),
        "rows": [dict(zip(("x", "y", "d", "sigma", "lower", "upper"), r)) for r in rows],
    }
    return out, (["x", "y", "d", "sigma", "lower", "upper"], rows)


def cmd_hypmedian(args, doc):
    verts, edges = graph_from_doc(doc)
    sides = doc.get("sides", "interval")
    tie = args.tie or doc.get("tie", "lex")
    g = graph_model((verts, edges), sides=sides, tie=tie)
    other = graph_model((verts, edges), sides=sides, tie="revlex" if tie == "lex" else "lex")
    n = len(g.vertices)
    mode = _mode(args, n, 64)
    est = closeness_distance(g.med, other.med, g.points, g.dist, mode, args.samples, args.seed)
    out = {
        "vertices": n,
        "K": g.K,
        "delta": g.delta,
        "h0": g.h0,
        "tie": tie,
        "tie_closeness": est.sup_observed,
        "tie_closeness_exhaustive": est.exhaustive,
    }
    rows = []
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                rows.append([_label(g.vertices[x]) for x in (i, j, k, g.centers[i, j, k])] + [float(g.quality[i, j, k])])
    return out, (["x", "y", "z", "median", "quality"], rows)


_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")


def parse_angle(text):
    """Radians from ``"0.5"``, ``"pi"``, ``"pi/4"``, ``"3pi/4"`` or ``"3*pi/4"``."""
    m = _ANGLE.match(text)
    if m:
        coef = m.group(1)
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return c * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    try:
        return float(text)
    except ValueError:
        raise DocumentError(f"cannot parse angle {text!r}") from None


def parse_k(values):
    ks = []
    for v in values:
        if ":" in v:
            a, b = v.split(":")
            ks.extend(float(x) for x in range(int(a), int(b) + 1))
        else:
            ks.append(float(v))
    return ks


def cmd_gap(args, doc):
    angle = parse_angle(args.angle)
    rows = [[k, euclidean_rotation_gap(k, angle)] for k in parse_k(args.k)]
    out = {"angle": angle, "rows": [{"k": k, "gap": g} for k, g in rows]}
    return out, (["k", "gap"], rows)


def _qi_from_doc(doc):
    X, Y = model_from_doc(_need_key(doc, "X")), model_from_doc(_need_key(doc, "Y"))
    fwd = {hashable(a): hashable(b) for a, b in _need_key(doc, "forward")}
    bwd = {hashable(a): hashable(b) for a, b in _need_key(doc, "backward")}
    missing = [x for x in X.points if x not in fwd] or [y for y in Y.points if y not in bwd]
    if missing:
        raise DocumentError(f"map is not total: no image for {missing[0]!r}")
    return make_qi(fwd, bwd, X, Y), X, Y


def _transport(args, doc, push):
    qi, X, Y = _qi_from_doc(doc)
    src, dst = (X, Y) if push else (Y, X)
    moved = pushforward(qi, X) if push else pullback(qi, Y)
    mode = _mode(args, len(dst.points), 64)
    est = closeness_distance(moved.med, dst.med, dst.points, dst.dist, mode, args.samples, args.seed)
    out = {
        "multiplicative": qi.multiplicative,
        "additive": qi.additive,
        "closeness_x": qi.closeness_x,
        "closeness_y": qi.closeness_y,
        "k": moved.k,
        "h0": moved.h0,
        "closeness": est.sup_observed,
        "exhaustive": est.exhaustive,
        "samples": est.sample_count,
        "witness": None if est.witness is None else [_label(v) for v in est.witness],
    }
    return out, (["key", "value"], [[k, out[k]] for k in sorted(out) if k != "witness"])


def cmd_push(args, doc):
    return _transport(args, doc, True)


def cmd_pull(args, doc):
    return _transport(args, doc, False)


def cmd_approx(args, doc):
    model = model_from_doc(_need_key(doc, "model"))
    A = [hashable(a) for a in _need_key(doc, "A")]
    name = doc.get("resolver", "lattice")
    if name == "lattice":
        resolver, kw = ae.lattice_resolver, {}
    elif name == "tree":
        resolver = ae.tree_resolver
        kw = {"basepoint": hashable(doc["basepoint"])} if "basepoint" in doc else {}
    else:
        raise DocumentError(f"unknown resolver {name!r}")
    try:
        rep = ae.approximate(A, model, resolver, bool(doc.get("exactify", False)), seed=args.seed, **kw)
    except ae.AprioriBoundError as exc:
        raise CheckFailed(str(exc)) from exc
    out = ae.report_to_json(rep)
    out["geodesic_check"] = ae.geodesic_bound_check(rep, samples=min(args.samples, 1000), seed=args.seed)
    if not out["covered"]:
        raise CheckFailed("A is not covered by f(M)", out)
    keys = ["alpha", "epsilon", "beta", "gamma", "covered", "rank", "quasimorphism_bound"]
    return out, (["key", "value"], [[k, out[k]] for k in keys])


COMMANDS = {
    "validate": (cmd_validate, "check the median identities (and a metric if given)"),
    "closure": (cmd_closure, "median closure of a subset"),
    "walls": (cmd_walls, "walls, crossing pairs and rank"),
    "cubify": (cmd_cubify, "1-skeleton of the associated cube complex"),
    "metric": (cmd_metric, "wall metric d_l and median-metric check"),
    "rectify": (cmd_rectify, "edge thickness and rectified metric"),
    "cat0": (cmd_cat0, "sigma_d table with the sandwich check"),
    "hypmedian": (cmd_hypmedian, "K-center median of a graph"),
    "gap": (cmd_gap, "rotation gap of the l1 median in the plane"),
    "push": (cmd_push, "pushforward of a coarse median along a quasi-isometry"),
    "pull": (cmd_pull, "pullback of a coarse median along a quasi-isometry"),
    "approx": (cmd_approx, "median metric approximation of a finite subset"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="coarsemedian", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", "-i", help="input JSON document")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="seed for every sampler")
        p.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "gap":
            p.add_argument("--angle", default="pi/4")
            p.add_argument("--k", nargs="+", default=["1"], help="values or inclusive ranges like 1:100")
        if name == "hypmedian":
            p.add_argument("--tie", choices=("lex", "revlex"))
    return parser


def _emit(args, out, table):
    if args.format == "csv" and table is not None:
        text = dumps_csv(*table)
    else:
        text = dumps_json(out)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        if args.mode == "sampled" and args.seed is None:
            raise DocumentError("sampled mode needs an explicit --seed")
        if args.seed is None:
            args.seed = 0
        if args.samples < 1:
            raise DocumentError("--samples must be positive")
        doc = None
        if args.command != "gap":
            if not args.input:
                raise DocumentError(f"{args.command} needs --input")
            doc = load_json(args.input)
        out, table = fn(args, doc)
    except CheckFailed as exc:
        if exc.report is not None:
            _emit(args, exc.report, None)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MedianAlgebraError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(args, out, table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
