"""Approximating finite subsets of coarse median spaces by finite median metric spaces.

Pipeline: a resolver yields a finite median algebra M with maps
lambda: M -> X and pi: A -> M; optionally the pair is made exact on A by
passing to M x T(A); walls get lengths from edge images; the resulting
wall metric on M is compared with the ambient metric through lambda.
"""

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .cube_complex import one_skeleton, parallel_classes, skeleton_to_json
from .distortion import fit_distortion, fit_one_sided
from .median_core import (
    CoordinateMedianAlgebra,
    InternalConsistencyError,
    MedianAlgebraError,
    ProductMedianAlgebra,
    TreeMedianAlgebra,
    closure_indices,
    rank,
)
from .median_metrics import REL_TOL, verify_median_metric, wall_metric

__all__ = [
    "ResolverOutput",
    "WallLengths",
    "ApproximationReport",
    "AprioriBoundError",
    "lattice_resolver",
    "tree_resolver",
    "exactify",
    "quasimorphism_defect",
    "assign_wall_lengths",
    "parallel_edge_constants",
    "geodesic_bound_check",
    "approximate",
    "report_to_json",
]

EXHAUSTIVE_DEFECT_CAP = 48


class AprioriBoundError(InternalConsistencyError):
    """Parallel image edges exceed k * length + h(0) + 2L: the reported L is wrong."""


@dataclass
class ResolverOutput:
    algebra: object
    lam: list  # model point for each algebra index
    pi: dict  # a -> algebra index
    bound: float
    name: str
    exact: bool = False
    details: dict = field(default_factory=dict)


def _check_points(model, A):
    A = [tuple(a) if isinstance(a, list) else a for a in A]
    if not A:
        raise MedianAlgebraError("A must be non-empty")
    carrier = set(model.points)
    for a in A:
        if a not in carrier:
            raise MedianAlgebraError(f"{a!r} is not a point of the model")
    seen = []
    for a in A:
        if a not in seen:
            seen.append(a)
    return seen


def lattice_resolver(model, A):
    """Median closure of A inside the lattice; lambda is the inclusion, L = 0."""
    A = _check_points(model, A)
    arr = np.array(A, dtype=np.int64).reshape(len(A), -1)
    levels = [np.unique(arr[:, c]) for c in range(arr.shape[1])]
    grid = CoordinateMedianAlgebra([tuple(int(v) for v in p) for p in iproduct(*levels)])
    gen = grid.indices_of([tuple(int(v) for v in a) for a in A])
    idx = closure_indices(grid, gen)
    pts = [grid.elements[i] for i in idx]
    M = CoordinateMedianAlgebra(pts)
    pi = {a: M.index[tuple(int(v) for v in a)] for a in A}
    return ResolverOutput(M, list(M.elements), pi, 0.0, "lattice", exact=True)


def _widest(gp):
    B = gp.copy()
    for k in range(len(B)):
        B = np.maximum(B, np.minimum(B[:, k][:, None], B[k][None, :]))
    return B


def tree_resolver(model, A, basepoint=None):
    """Approximating tree of A in a graph model, from bottleneck Gromov products at w."""
    A = _check_points(model, A)
    w = A[0] if basepoint is None else basepoint
    if w not in A:
        raise MedianAlgebraError("basepoint must belong to A")
    D = model.D
    ia = np.array([model.index[a] for a in A])
    iw = model.index[w]
    dw = D[ia, iw]
    sub = D[np.ix_(ia, ia)]
    gp = (dw[:, None] + dw[None, :] - sub) / 2.0
    np.fill_diagonal(gp, dw)
    B = np.round(_widest(gp), 9)
    dT = dw[:, None] + dw[None, :] - 2.0 * B
    np.fill_diagonal(dT, 0.0)

    m = len(A)

    def key(a, t):
        rep = min(b for b in range(m) if B[a, b] >= t)
        return (float(t), rep)

    nodes, edges = set(), {}
    for a in range(m):
        ts = sorted({0.0, float(B[a, a])} | {float(B[a, b]) for b in range(m)})
        ks = [key(a, t) for t in ts]
        nodes.update(ks)
        for (t0, r0), (t1, r1) in zip(ks, ks[1:]):
            edges[((t0, r0), (t1, r1))] = t1 - t0
    order = sorted(nodes)
    labels = {k: (A[k[1]], k[0]) for k in order}
    node_idx = {k: i for i, k in enumerate(order)}
    T = TreeMedianAlgebra([labels[k] for k in order], [(labels[u], labels[v]) for u, v in edges])
    nt = len(order)
    if edges:
        r = [node_idx[u] for u, v in edges] + [node_idx[v] for u, v in edges]
        c = [node_idx[v] for u, v in edges] + [node_idx[u] for u, v in edges]
        wts = list(edges.values()) * 2
        dtree = shortest_path(csr_matrix((wts, (r, c)), shape=(nt, nt)), method="D")
    else:
        dtree = np.zeros((1, 1))
    pi_node = [node_idx[key(a, B[a, a])] for a in range(m)]
    pi = {A[a]: pi_node[a] for a in range(m)}
    # lambda: graph vertex whose distances to A best match the tree's
    target = dtree[:, pi_node]  # (nt, m)
    dev = np.abs(D[:, ia][None, :, :] - target[:, None, :]).max(axis=2)  # (nt, n)
    lam_idx = np.argmin(dev, axis=1)
    lam = [model.vertices[i] for i in lam_idx]
    out = ResolverOutput(T, lam, pi, 0.0, "tree", details={"tree_metric": dT, "basepoint": w, "tree_distances": dtree})
    out.bound = quasimorphism_defect(out, model, A)
    return out


def quasimorphism_defect(res, model, A, mode="auto", samples=20_000, seed=0):
    """max(sup_t d(lam(mu_M t), mu(lam t)), max_a d(a, lam(pi(a))))."""
    M = res.algebra
    n = len(M)
    lam = res.lam
    close = max((model.dist(a, lam[res.pi[a]]) for a in A), default=0.0)
    if mode == "auto":
        mode = "exhaustive" if n <= EXHAUSTIVE_DEFECT_CAP else "sampled"
    if mode == "exhaustive":
        ar = np.arange(n)
        trip = np.array(np.meshgrid(ar, ar, ar, indexing="ij")).reshape(3, -1)
    else:
        rng = np.random.default_rng(seed)
        trip = rng.integers(0, n, size=(3, samples))
    meds = M.median_many(trip[0], trip[1], trip[2])
    best = 0.0
    for (i, j, k), mm in zip(trip.T, meds):
        v = model.dist(lam[mm], model.med(lam[i], lam[j], lam[k]))
        if v > best:
            best = v
    return float(max(best, close))


def exactify(res, A, model, mode="auto", seed=0):
    """Pass to M x T(A) so that lambda o pi is exactly the inclusion of A.

    T(A) is the path through A in the given order. Records the measured
    quasi-morphism defect next to the bound (k + 2) L + h(0).
    """
    A = _check_points(model, A)
    M = res.algebra
    path = TreeMedianAlgebra(list(range(len(A))), [(i, i + 1) for i in range(len(A) - 1)])
    P = ProductMedianAlgebra(M, path)
    n2 = len(A)
    pos = {a: i for i, a in enumerate(A)}
    lam = []
    for y in range(len(M)):
        for j, a in enumerate(A):
            lam.append(a if res.pi[a] == y else res.lam[y])
    pi = {a: res.pi[a] * n2 + pos[a] for a in A}
    out = ResolverOutput(P, lam, pi, 0.0, res.name + "+exact", exact=True, details=dict(res.details))
    L, k, h0 = res.bound, model.k, model.h0
    out.bound = quasimorphism_defect(out, model, A, mode=mode, seed=seed)
    out.details.update(
        {
            "base_bound": L,
            "bound_formula": (k + 2) * L + h0,
            "bound_chained": (3 * k + 2) * L + h0,
        }
    )
    return out


@dataclass
class WallLengths:
    lengths: np.ndarray  # aligned with skeleton.walls
    chosen: list  # edge used per wall
    spread: list  # (min, max) image length per wall
    edge_lengths: np.ndarray  # aligned with skeleton.edges
    skeleton: object = None


def assign_wall_lengths(M, lam, model, skel=None):
    """l(W) = d(lam(e-), lam(e+)) for the lexicographically first edge e crossing W."""
    skel = skel or one_skeleton(M, check=False)
    if not skel.edges:
        return WallLengths(np.zeros(0), [], [], np.zeros(0), skel)
    elen = np.array([model.dist(lam[a], lam[b]) for a, b in skel.edges], dtype=np.float64)
    W = len(skel.walls)
    chosen = [None] * W
    lo, hi = np.full(W, np.inf), np.zeros(W)
    lengths = np.zeros(W)
    for e, w in enumerate(skel.edge_wall):
        if chosen[w] is None:
            chosen[w] = skel.edges[e]
            lengths[w] = elen[e]
        lo[w] = min(lo[w], elen[e])
        hi[w] = max(hi[w], elen[e])
    positive = elen[elen > 0]
    if positive.size == 0:
        raise MedianAlgebraError("λ collapses M")
    lengths = np.where(lengths > 0, lengths, positive.min() * 1e-6)
    return WallLengths(lengths, chosen, list(zip(lo.tolist(), hi.tolist())), elen, skel)


def parallel_edge_constants(M, lam, model, L=0.0, wl=None):
    """Measured (beta, gamma) for parallel image edges plus the a-priori check.

    Every ordered pair (e1, e2) of parallel edges must satisfy
    |f e2| <= k |f e1| + h(0) + 2L; otherwise AprioriBoundError.
    """
    wl = wl or assign_wall_lengths(M, lam, model)
    skel = wl.skeleton
    classes = parallel_classes(skel)
    pos = {e: i for i, e in enumerate(skel.edges)}
    a_all, b_all = [], []
    k, h0 = model.k, model.h0
    bound_gamma = h0 + 2 * L
    for W, es in classes.items():
        ls = wl.edge_lengths[[pos[e] for e in es]]
        if len(ls) < 2:
            continue
        aa, bb = np.meshgrid(ls, ls, indexing="ij")
        off = ~np.eye(len(ls), dtype=bool)
        a, b = aa[off], bb[off]
        slack = REL_TOL * np.maximum(1.0, b)
        if np.any(b > k * a + bound_gamma + slack):
            i = int(np.argmax(b - k * a))
            raise AprioriBoundError(
                f"parallel edges of {sorted(W.half, key=repr)[:3]}...: {b[i]} > {k} * {a[i]} + {bound_gamma}"
            )
        a_all.append(a)
        b_all.append(b)
    if not a_all:
        return 1.0, 0.0, (k, bound_gamma)
    beta, gamma = fit_one_sided(np.concatenate(a_all), np.concatenate(b_all))
    return beta, gamma, (k, bound_gamma)


@dataclass
class ApproximationReport:
    algebra: object
    skeleton: object
    lengths: np.ndarray
    f: list
    alpha: float
    epsilon: float
    beta: float
    gamma: float
    covered: bool
    spread: list
    rank: int
    resolver: str
    quasimorphism_bound: float
    apriori: tuple
    d_l: object = None
    model_distances: object = None
    details: dict = field(default_factory=dict)
    pi: dict = None


def approximate(A, model, resolver, exactify_output=False, seed=0, **resolver_kwargs):
    """Run resolver (then exactify if asked), weight walls, and measure (alpha, eps)."""
    A = _check_points(model, A)
    res = resolver(model, A, **resolver_kwargs)
    if exactify_output:
        res = exactify(res, A, model, seed=seed)
    M = res.algebra
    f = res.lam
    n = len(M)
    covered = all(any(model.dist(a, p) == 0 for p in f) for a in A) if not res.exact else set(A) <= set(f)
    if exactify_output and not all(f[res.pi[a]] == a for a in A):
        raise InternalConsistencyError("exactified maps do not restrict to the inclusion of A")
    if n == 1:
        skel = one_skeleton(M)
        return ApproximationReport(
            M, skel, np.zeros(0), f, 1.0, 0.0, 1.0, 0.0, covered, [], 0, res.name, res.bound,
            (model.k, model.h0 + 2 * res.bound), details=res.details, pi=res.pi,
        )
    wl = assign_wall_lengths(M, f, model)
    dl = wall_metric(M, wl.lengths)
    check = verify_median_metric(dl, algebra=M)
    if not (check.ok and check.matches_algebra):
        raise InternalConsistencyError(f"d_l is not a median metric with median med: {check.witness}")
    Dm = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            Dm[i, j] = Dm[j, i] = model.dist(f[i], f[j])
    iu = np.triu_indices(n, 1)
    alpha, eps = fit_distortion(dl.matrix[iu], Dm[iu])
    beta, gamma, apriori = parallel_edge_constants(M, f, model, res.bound, wl)
    return ApproximationReport(
        M, wl.skeleton, wl.lengths, f, alpha, eps, beta, gamma, covered, wl.spread, rank(M),
        res.name, res.bound, apriori, dl, Dm, res.details, res.pi,
    )


def geodesic_bound_check(report, samples=200, seed=0):
    """Count steps of sampled skeleton geodesics breaking the step bound.

    For a combinatorial geodesic x_0..x_m each step must satisfy
    d(f x_i, f x_i+1) <= beta d(f x_0, f x_m) + gamma. Returns violation
    counts for the a-priori constants and the measured ones.
    """
    skel = report.skeleton
    n = len(report.algebra)
    if n < 2:
        return {"checked": 0, "apriori": 0, "measured": 0}
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(skel.edges)
    rng = np.random.default_rng(seed)
    Dm = report.model_distances
    kb, gb = report.apriori
    out = {"checked": 0, "apriori": 0, "measured": 0}
    for _ in range(samples):
        x, y = (int(v) for v in rng.choice(n, size=2, replace=False))
        path = nx.shortest_path(G, x, y)
        ends = Dm[x, y]
        for p, q in zip(path, path[1:]):
            step = Dm[p, q]
            out["checked"] += 1
            if step > kb * ends + gb + REL_TOL * max(1.0, step):
                out["apriori"] += 1
            if step > report.beta * ends + report.gamma + REL_TOL * max(1.0, step):
                out["measured"] += 1
    return out


def _jsonable(p):
    if isinstance(p, (tuple, list)):
        return [_jsonable(v) for v in p]
    if isinstance(p, (np.integer,)):
        return int(p)
    if isinstance(p, (np.floating, float)):
        return round(float(p), 9)
    return p


def report_to_json(report):
    return {
        "M": skeleton_to_json(report.skeleton),
        "f": [_jsonable(p) for p in report.f],
        "lengths": {str(w): round(float(v), 9) for w, v in enumerate(report.lengths)},
        "alpha": round(report.alpha, 9),
        "epsilon": round(report.epsilon, 9),
        "beta": round(report.beta, 9),
        "gamma": round(report.gamma, 9),
        "covered": bool(report.covered),
        "rank": report.rank,
        "resolver": report.resolver,
        "quasimorphism_bound": round(report.quasimorphism_bound, 9),
        "apriori": [round(v, 9) for v in report.apriori],
        "spread": {str(w): [round(a, 9), round(b, 9)] for w, (a, b) in enumerate(report.spread)},
    }
