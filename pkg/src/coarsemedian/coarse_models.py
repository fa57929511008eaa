"""Concrete coarse median spaces and transport along quasi-isometries.

A :class:`CoarseMedianSpace` is a finite carrier together with a distance
and a ternary operation defined on (at least) that carrier. Geometric
models act on coordinate tuples, graph models on vertex labels.
"""

import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import shortest_path

from . import _kernels
from .distortion import fit_distortion
from .median_core import MedianAlgebraError

__all__ = [
    "CoarseMedianSpace",
    "GraphCoarseMedianSpace",
    "QuasiIsometryPair",
    "ClosenessEstimate",
    "l1_median",
    "l1_lattice_model",
    "euclidean_model",
    "algebra_model",
    "lattice_box",
    "disk_points",
    "rotation",
    "euclidean_rotation_gap",
    "graph_model",
    "gromov_delta",
    "make_qi",
    "compose_qi",
    "pushforward",
    "pullback",
    "closeness_distance",
    "invariance_defect",
    "lipschitz_defect",
]

EXHAUSTIVE_CLOSENESS_CAP = 64
EXHAUSTIVE_LIPSCHITZ_CAP = 32


@dataclass
class CoarseMedianSpace:
    points: list
    dist: Callable
    med: Callable
    k: float = 1.0
    h: Callable = field(default=lambda n: 0.0)
    rank_bound: object = None
    name: str = ""

    @property
    def h0(self):
        return float(self.h(0))

    def __len__(self):
        return len(self.points)


def _const(c):
    return lambda n: c


def l1_median(x, y, z):
    return tuple(sorted(t)[1] for t in zip(x, y, z))


def _l1(p, q):
    return float(sum(abs(a - b) for a, b in zip(p, q)))


def _l2(p, q):
    return float(math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q))))


def lattice_box(n, box):
    """Integer points of a box: ``box`` is a side length (coordinates
    ``0..box-1``) or a sequence of inclusive ``(lo, hi)`` pairs."""
    if isinstance(box, int):
        ranges = [range(box)] * n
    else:
        ranges = [range(int(lo), int(hi) + 1) for lo, hi in box]
        if len(ranges) != n:
            raise MedianAlgebraError("box needs one (lo, hi) pair per dimension")
    return [tuple(p) for p in iproduct(*ranges)]


def l1_lattice_model(n, box):
    """Z^n box with the l1 metric and the coordinatewise median (k = 1, h = 0)."""
    if n < 1:
        raise MedianAlgebraError("dimension must be at least 1")
    return CoarseMedianSpace(lattice_box(n, box), _l1, l1_median, 1.0, _const(0.0), n, f"l1_lattice_{n}")


def euclidean_model(points, n=2):
    """Euclidean metric with the l1 (coordinatewise) median; k = 1, h = 0."""
    return CoarseMedianSpace([tuple(p) for p in points], _l2, l1_median, 1.0, _const(0.0), n, f"euclidean_{n}")


def algebra_model(M, D):
    """A finite median algebra with a median metric on it (k = 1, h = 0)."""
    D = np.asarray(D, dtype=np.float64)
    idx = M.index

    def dist(p, q):
        return float(D[idx[p], idx[q]])

    return CoarseMedianSpace(list(M.elements), dist, M.med, 1.0, _const(0.0), None, "median_algebra")


def disk_points(radius):
    r = int(math.floor(radius))
    return [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if x * x + y * y <= radius * radius]


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)

    def rot(p):
        x, y = p
        return (c * x - s * y, s * x + c * y)

    return rot


def euclidean_rotation_gap(k_scale, angle):
    """|| mu(Ax, Ay, A0) - A mu(x, y, 0) ||_2 for x = (k, 0), y = (0, k)."""
    if not k_scale > 0:
        raise MedianAlgebraError("k_scale must be positive")
    A = rotation(angle)
    x, y, o = (float(k_scale), 0.0), (0.0, float(k_scale)), (0.0, 0.0)
    return _l2(l1_median(A(x), A(y), A(o)), A(l1_median(x, y, o)))


# ---------------------------------------------------------------------------
# hyperbolic graph models


@dataclass
class GraphCoarseMedianSpace(CoarseMedianSpace):
    vertices: tuple = ()
    index: dict = field(default_factory=dict)
    D: object = None
    centers: object = None
    quality: object = None
    K: float = 0.0
    delta: float = 0.0
    sides: str = "interval"
    tie: str = "lex"


def _as_graph(graph):
    if isinstance(graph, nx.Graph):
        return graph
    vertices, edges = graph
    G = nx.Graph()
    G.add_nodes_from(vertices)
    G.add_edges_from(edges)
    return G


def _vertex_order(G):
    try:
        return tuple(sorted(G.nodes))
    except TypeError:
        return tuple(sorted(G.nodes, key=repr))


def _bfs_side(D, nbrs, u, v, pick):
    """Vertices of the geodesic from v back to u, choosing parents by ``pick``."""
    path = [v]
    w = v
    while w != u:
        cand = [p for p in nbrs[w] if D[u, p] == D[u, w] - 1]
        w = pick(cand)
        path.append(w)
    return path


def graph_model(graph, sides="interval", tie="lex"):
    """Graph metric with a K-center median.

    For each triple the median is the vertex minimizing the largest
    distance to the three sides, ties broken by vertex order (``"lex"``)
    or reversed order (``"revlex"``). With ``sides="interval"`` a side
    is the union of all geodesics between its endpoints; with
    ``sides="geodesic"`` it is one BFS geodesic with parents chosen by the
    same tie rule. ``K`` is the worst achieved center quality and
    ``delta`` the four-point constant.
    """
    G = _as_graph(graph)
    verts = _vertex_order(G)
    n = len(verts)
    if n == 0:
        raise MedianAlgebraError("empty graph")
    if not nx.is_connected(G):
        raise MedianAlgebraError("graph is disconnected")
    if tie not in ("lex", "revlex"):
        raise MedianAlgebraError(f"unknown tie policy {tie!r}")
    index = {v: i for i, v in enumerate(verts)}
    A = nx.to_scipy_sparse_array(G, nodelist=verts)
    D = shortest_path(A, method="D", unweighted=True)
    side = np.empty((n, n, n))
    if sides == "interval":
        for u in range(n):
            mask = D[u][None, :] + D == D[u][:, None]  # mask[v, s]: s in I(u, v)
            side[u] = np.where(mask[:, None, :], D[None, :, :], np.inf).min(axis=2)
    elif sides == "geodesic":
        nbrs = [sorted(index[w] for w in G.neighbors(v)) for v in verts]
        pick = min if tie == "lex" else max
        for u in range(n):
            for v in range(u, n):
                path = _bfs_side(D, nbrs, u, v, pick)
                side[u, v] = side[v, u] = D[:, path].min(axis=1)
    else:
        raise MedianAlgebraError(f"unknown side rule {sides!r}")
    if tie == "lex":
        centers, quality = _kernels.minmax_centers(side)
    else:
        c, quality = _kernels.minmax_centers(np.ascontiguousarray(side[:, :, ::-1]))
        centers = (n - 1 - c).astype(np.int32)
    K = float(quality.max())
    delta = _kernels.four_point_delta(D)

    def dist(p, q):
        return float(D[index[p], index[q]])

    def med(x, y, z):
        return verts[centers[index[x], index[y], index[z]]]

    h_one = _one_slot_defect(D, centers, 1.0)
    return GraphCoarseMedianSpace(
        list(verts),
        dist,
        med,
        1.0,
        _const(3.0 * h_one),
        1,
        f"graph_{sides}_{tie}",
        vertices=verts,
        index=index,
        D=D,
        centers=centers,
        quality=quality,
        K=K,
        delta=delta,
        sides=sides,
        tie=tie,
    )


def _one_slot_defect(D, centers, k):
    """max over a, b, c, c' of d(mu(a,b,c), mu(a,b,c')) - k d(c, c')."""
    n = len(D)
    best = 0.0
    for a in range(n):
        c = centers[a]  # (b, c)
        m = D[c[:, :, None], c[:, None, :]] - k * D[None, :, :]
        best = max(best, float(m.max()))
    return best


def gromov_delta(D):
    return _kernels.four_point_delta(np.asarray(D, dtype=np.float64))


# ---------------------------------------------------------------------------
# condition (i), closeness, invariance


@dataclass
class ClosenessEstimate:
    sup_observed: float
    exhaustive: bool
    sample_count: int
    seed: object = None
    witness: tuple = None


def _triples(n, mode, samples, seed, cap):
    if mode == "auto":
        mode = "exhaustive" if n <= cap else "sampled"
    if mode == "exhaustive":
        return True, iproduct(range(n), repeat=3), n**3
    if mode != "sampled":
        raise MedianAlgebraError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, size=(samples, 3))
    return False, (tuple(int(v) for v in row) for row in t), samples


def closeness_distance(mu1, mu2, carrier, dist, mode="auto", samples=10_000, seed=0, probes=()):
    """sup over triples of d(mu1(t), mu2(t)).

    Exhaustive over carrier^3 when the carrier has at most 64 points (or
    ``mode="exhaustive"``), otherwise ``samples`` seeded triples. ``probes``
    are extra triples evaluated in either mode.
    """
    carrier = list(carrier)
    exhaustive, it, count = _triples(len(carrier), mode, samples, seed, EXHAUSTIVE_CLOSENESS_CAP)
    best, witness = 0.0, None
    for t in it:
        x, y, z = (carrier[i] for i in t)
        v = dist(mu1(x, y, z), mu2(x, y, z))
        if v > best:
            best, witness = v, (x, y, z)
    for x, y, z in probes:
        v = dist(mu1(x, y, z), mu2(x, y, z))
        if v > best:
            best, witness = v, (x, y, z)
    return ClosenessEstimate(float(best), exhaustive, count + len(probes), None if exhaustive else seed, witness)


def _check_isometry(g, carrier, dist, samples, seed):
    n = len(carrier)
    if n * n <= 4 * samples:
        pairs = iproduct(range(n), repeat=2)
    else:
        rng = np.random.default_rng(seed)
        pairs = (tuple(int(v) for v in r) for r in rng.integers(0, n, size=(samples, 2)))
    for i, j in pairs:
        p, q = carrier[i], carrier[j]
        a, b = dist(g(p), g(q)), dist(p, q)
        if abs(a - b) > 1e-9 * max(1.0, b):
            raise MedianAlgebraError(f"transformation is not an isometry: d moves from {b} to {a} at {(p, q)}")


def invariance_defect(model, transformations, mode="auto", samples=10_000, seed=0, probes=()):
    """sup over (g, triple) of d(mu(g x, g y, g z), g mu(x, y, z))."""
    carrier = list(model.points)
    best = 0.0
    for g in transformations:
        _check_isometry(g, carrier, model.dist, samples, seed)
        est = closeness_distance(
            lambda x, y, z: model.med(g(x), g(y), g(z)),
            lambda x, y, z: g(model.med(x, y, z)),
            carrier,
            model.dist,
            mode,
            samples,
            seed,
            probes,
        )
        best = max(best, est.sup_observed)
    return best


def lipschitz_defect(space, mode="auto", samples=100_000, seed=0):
    """Largest d(mu(t), mu(t')) - k * sum d(t_i, t'_i) observed.

    The declared parameters are consistent when this is <= h(0). Exhaustive
    mode (carriers up to 32 points) scans every pair of triples differing in
    one slot, which bounds the general case by chaining; sampled mode draws
    full 6-tuples.
    """
    pts = list(space.points)
    n = len(pts)
    if mode == "auto":
        mode = "exhaustive" if n <= EXHAUSTIVE_LIPSCHITZ_CAP else "sampled"
    d, mu, k = space.dist, space.med, space.k
    best = -math.inf
    if mode == "exhaustive":
        for a, b in iproduct(pts, repeat=2):
            meds = [mu(a, b, c) for c in pts]
            for i in range(n):
                for j in range(n):
                    v = d(meds[i], meds[j]) - k * d(pts[i], pts[j])
                    if v > best:
                        best = v
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(samples, 6))
        for row in idx:
            x, y, z, xx, yy, zz = (pts[i] for i in row)
            v = d(mu(x, y, z), mu(xx, yy, zz)) - k * (d(x, xx) + d(y, yy) + d(z, zz))
            if v > best:
                best = v
    return float(best)


# ---------------------------------------------------------------------------
# quasi-isometries


@dataclass
class QuasiIsometryPair:
    forward: Callable
    backward: Callable
    X: CoarseMedianSpace
    Y: CoarseMedianSpace
    multiplicative: float = 1.0
    additive: float = 0.0
    closeness_x: float = 0.0
    closeness_y: float = 0.0


def make_qi(forward, backward, X, Y):
    """Wrap f: X -> Y with quasi-inverse g and measure constants on the carriers.

    ``forward``/``backward`` may be callables or mappings.
    """
    f = forward.__getitem__ if isinstance(forward, dict) else forward
    g = backward.__getitem__ if isinstance(backward, dict) else backward
    xs, ys = list(X.points), list(Y.points)
    src, dst = [], []
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            src.append(X.dist(xs[i], xs[j]))
            dst.append(Y.dist(f(xs[i]), f(xs[j])))
    alpha, eps = fit_distortion(src, dst)
    cx = max((X.dist(g(f(x)), x) for x in xs), default=0.0)
    cy = max((Y.dist(f(g(y)), y) for y in ys), default=0.0)
    return QuasiIsometryPair(f, g, X, Y, alpha, max(eps, cx, cy), cx, cy)


def compose_qi(first, second):
    """second after first, with quasi-inverse first.backward after second.backward."""
    f1, g1, f2, g2 = first.forward, first.backward, second.forward, second.backward
    return make_qi(lambda x: f2(f1(x)), lambda z: g1(g2(z)), first.X, second.Y)


def _transport(carrier, dist, mu, k, rank_bound, name):
    space = CoarseMedianSpace(list(carrier), dist, mu, k, _const(0.0), rank_bound, name)
    h0 = max(0.0, lipschitz_defect(space))
    if len(space.points) <= EXHAUSTIVE_LIPSCHITZ_CAP:
        h0 *= 3.0  # one-slot scan, chained over three slots
    space.h = _const(h0)
    return space


def pushforward(qi, space_X):
    """f o mu_X o (g x g x g) on Y, with k = mult^2 * k_X and h(0) re-measured."""
    f, g = qi.forward, qi.backward

    def mu(a, b, c):
        return f(space_X.med(g(a), g(b), g(c)))

    k = space_X.k * qi.multiplicative**2
    return _transport(qi.Y.points, qi.Y.dist, mu, k, space_X.rank_bound, f"push({space_X.name})")


def pullback(qi, space_Y):
    """g o mu_Y o (f x f x f) on X, with k = mult^2 * k_Y and h(0) re-measured."""
    f, g = qi.forward, qi.backward

    def mu(a, b, c):
        return g(space_Y.med(f(a), f(b), f(c)))

    k = space_Y.k * qi.multiplicative**2
    return _transport(qi.X.points, qi.X.dist, mu, k, space_Y.rank_bound, f"pull({space_Y.name})")
