"""JSON documents in, deterministic JSON/CSV reports out.

Algebra documents carry a ``kind``::

    {"kind": "majority", "dim": 3}
    {"kind": "hypercube" | "path", "size": n}
    {"kind": "grid", "size": [n, m]}
    {"kind": "tree", "vertices": [...], "edges": [[u, v], ...]}
    {"kind": "points", "points": [[...], ...]}          # coordinatewise median
    {"kind": "table", "elements": [...], "table": [[[i, ...]]]}
    {"kind": "product", "left": {...}, "right": {...}}

A metric instance is ``{"algebra": {...}}`` plus either ``"matrix"`` or
``"lengths"`` (list aligned with the wall order, or ``{"wall_index": l}``);
with neither, every wall has length 1.
"""

import csv
import io
import json
import math

import numpy as np

from .coarse_models import euclidean_model, graph_model, l1_lattice_model
from .cube_complex import standard_models
from .median_core import (
    CoordinateMedianAlgebra,
    MajorityAlgebra,
    MedianAlgebraError,
    ProductMedianAlgebra,
    TableMedianAlgebra,
    TreeMedianAlgebra,
    enumerate_walls,
)
from .median_metrics import FiniteMetric, MetricMedianAlgebraInstance, wall_metric

DIGITS = 9


class DocumentError(MedianAlgebraError):
    """Malformed or unsupported input document."""


def hashable(v):
    if isinstance(v, list):
        return tuple(hashable(x) for x in v)
    return v


def _need(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise DocumentError(f"document is missing {key!r}")
    return doc[key]


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON in {path}: {exc}") from exc


def algebra_from_doc(doc):
    kind = _need(doc, "kind")
    if kind == "majority":
        return MajorityAlgebra(int(_need(doc, "dim")))
    if kind in ("hypercube", "path"):
        return standard_models(kind, int(_need(doc, "size")))
    if kind == "grid":
        return standard_models("grid", tuple(_need(doc, "size")))
    if kind == "tree":
        verts = [hashable(v) for v in _need(doc, "vertices")]
        edges = [tuple(hashable(x) for x in e) for e in _need(doc, "edges")]
        return TreeMedianAlgebra(verts, edges)
    if kind == "points":
        return CoordinateMedianAlgebra([hashable(p) for p in _need(doc, "points")])
    if kind == "table":
        elems = [hashable(e) for e in _need(doc, "elements")]
        table = np.asarray(_need(doc, "table"))
        if table.shape != (len(elems),) * 3 or not np.issubdtype(table.dtype, np.integer):
            raise DocumentError("table must be an n x n x n array of element indices")
        return TableMedianAlgebra(elems, table)
    if kind == "product":
        return ProductMedianAlgebra(algebra_from_doc(_need(doc, "left")), algebra_from_doc(_need(doc, "right")))
    raise DocumentError(f"unknown algebra kind {kind!r}")


def instance_from_doc(doc):
    """Median algebra plus metric from a metric document."""
    M = algebra_from_doc(_need(doc, "algebra"))
    if "matrix" in doc:
        metric = FiniteMetric(M.elements, doc["matrix"])
        return MetricMedianAlgebraInstance(M, metric)
    walls = enumerate_walls(M)
    lengths = doc.get("lengths")
    if lengths is None:
        vec = np.ones(len(walls))
    elif isinstance(lengths, dict):
        vec = np.full(len(walls), np.nan)
        for key, val in lengths.items():
            w = int(key)
            if not 0 <= w < len(walls):
                raise DocumentError(f"wall index {w} out of range")
            vec[w] = float(val)
        if np.isnan(vec).any():
            raise DocumentError(f"missing length for wall {int(np.argmax(np.isnan(vec)))}")
    else:
        vec = np.asarray(lengths, dtype=np.float64)
    return MetricMedianAlgebraInstance(M, wall_metric(M, vec))


def graph_from_doc(doc):
    verts = [hashable(v) for v in _need(doc, "vertices")]
    edges = [tuple(hashable(x) for x in e) for e in _need(doc, "edges")]
    known = set(verts)
    for e in edges:
        if len(e) != 2 or e[0] not in known or e[1] not in known:
            raise DocumentError(f"edge {list(e)} does not join two listed vertices")
    return verts, edges


def model_from_doc(doc):
    kind = _need(doc, "kind")
    if kind == "l1_lattice":
        box = doc.get("box", 8)
        return l1_lattice_model(int(_need(doc, "dim")), box if isinstance(box, int) else [tuple(b) for b in box])
    if kind == "euclidean":
        return euclidean_model([hashable(p) for p in _need(doc, "points")], int(doc.get("dim", 2)))
    if kind == "graph":
        return graph_model(graph_from_doc(doc), sides=doc.get("sides", "interval"), tie=doc.get("tie", "lex"))
    raise DocumentError(f"unknown model kind {kind!r}")


def plain(obj):
    """JSON-ready copy with floats rounded to 9 digits and tuples as lists."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v) or math.isnan(v):
            return str(v)
        v = round(v, DIGITS)
        return 0.0 if v == 0 else v
    if isinstance(obj, (frozenset, set)):
        return sorted((plain(v) for v in obj), key=repr)
    return obj


def dumps_json(obj):
    return json.dumps(plain(obj), sort_keys=True, indent=2) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{DIGITS}f}"
    if isinstance(v, (tuple, list)):
        return json.dumps(plain(v), separators=(",", ":"))
    return str(v)


def dumps_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()
