"""Metrics on finite median algebras.

Distances are float64 matrices aligned with the algebra's element order.
Comparisons are exact when every entry is integral and otherwise use a
relative tolerance of ``REL_TOL``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cube_complex import one_skeleton
from .median_core import (
    MATERIALIZE_CAP,
    MedianAlgebraError,
    SubAlgebra,
    cached_wall_masks,
    closure_indices,
    enumerate_walls,
    is_closed,
)

REL_TOL = 1e-9

__all__ = [
    "REL_TOL",
    "FiniteMetric",
    "MetricMedianAlgebraInstance",
    "MedianMetricReport",
    "MonotonicityReport",
    "RectifiabilityReport",
    "wall_metric",
    "verify_median_metric",
    "edge_thickness",
    "wall_thickness",
    "rectified_metric",
    "restrict",
    "check_monotonicity",
    "rectifiability_diagnostics",
]


class FiniteMetric:
    """Finite metric space given by an ordered point list and a distance matrix."""

    def __init__(self, points, matrix, check=True):
        self.points = tuple(points)
        self.matrix = np.array(matrix, dtype=np.float64)
        n = len(self.points)
        if self.matrix.shape != (n, n):
            raise MedianAlgebraError(f"distance matrix must be {n}x{n}")
        self.exact = bool(np.all(self.matrix == np.round(self.matrix)))
        if check:
            self.validate()

    def __len__(self):
        return len(self.points)

    def validate(self):
        D = self.matrix
        n = len(self.points)
        if not np.array_equal(D, D.T):
            raise MedianAlgebraError("distance matrix is not symmetric")
        if np.any(np.diag(D) != 0):
            raise MedianAlgebraError("distance matrix has a non-zero diagonal")
        off = D[~np.eye(n, dtype=bool)]
        if np.any(off <= 0):
            raise MedianAlgebraError("distinct points at distance zero (or negative)")
        slack = 0.0 if self.exact else REL_TOL * max(1.0, float(D.max(initial=0.0)))
        for k in range(n):
            if np.any(D > D[:, k][:, None] + D[k][None, :] + slack):
                i, j = np.argwhere(D > D[:, k][:, None] + D[k][None, :] + slack)[0]
                raise MedianAlgebraError(
                    f"triangle inequality fails for {(self.points[i], self.points[k], self.points[j])}"
                )

    def d(self, x, y):
        return float(self.matrix[self.points.index(x), self.points.index(y)])


@dataclass(frozen=True)
class MetricMedianAlgebraInstance:
    algebra: object
    metric: FiniteMetric

    def __post_init__(self):
        if tuple(self.metric.points) != tuple(self.algebra.elements):
            raise MedianAlgebraError("metric points must match the algebra's elements in order")

    @property
    def D(self):
        return self.metric.matrix


def _lengths_vector(walls, lengths):
    if isinstance(lengths, dict):
        missing = [W for W in walls if W not in lengths]
        if missing:
            raise MedianAlgebraError(f"missing wall length for {missing[0]}")
        vec = np.array([lengths[W] for W in walls], dtype=np.float64)
    else:
        vec = np.asarray(lengths, dtype=np.float64)
        if vec.shape != (len(walls),):
            raise MedianAlgebraError(f"expected {len(walls)} wall lengths, got {vec.shape}")
    if np.any(~(vec > 0)):
        raise MedianAlgebraError("wall lengths must be strictly positive")
    return vec


def wall_metric(M, lengths):
    """d_l(a, b) = sum of l(W) over walls W separating a and b.

    ``lengths`` is a mapping Wall -> length or a sequence aligned with
    ``enumerate_walls(M)``.
    """
    walls = enumerate_walls(M)
    vec = _lengths_vector(walls, lengths)
    n = len(M)
    D = np.zeros((n, n), dtype=np.float64)
    masks = cached_wall_masks(M)
    for w in range(len(walls)):
        m = masks[w]
        D += np.where(m[:, None] != m[None, :], vec[w], 0.0)
    return FiniteMetric(M.elements, D, check=False)


@dataclass
class MedianMetricReport:
    ok: bool
    medians: object = None  # (n, n, n) index table when n is small enough
    witness: tuple = None
    reason: str = ""
    matches_algebra: object = None


def verify_median_metric(X, algebra=None):
    """Check that every triple's three metric intervals meet in exactly one point.

    With ``algebra`` (same element order) the intrinsic median is also
    compared with the algebra's median on every triple.
    """
    D = X.matrix if isinstance(X, FiniteMetric) else np.asarray(X, dtype=np.float64)
    points = X.points if isinstance(X, FiniteMetric) else tuple(range(len(D)))
    exact = X.exact if isinstance(X, FiniteMetric) else bool(np.all(D == np.round(D)))
    n = len(D)
    bits = _kernels.interval_bitsets(D, exact, REL_TOL)
    keep = n <= MATERIALIZE_CAP
    table = np.empty((n, n, n), dtype=np.int32) if keep else None
    ar = np.arange(n)
    matches = None if algebra is None else True
    mismatch = None
    for x in range(n):
        res = _kernels.median_scan(bits, x)
        if np.any(res < 0):
            y, z = np.argwhere(res < 0)[0]
            kind = "empty" if res[y, z] == -1 else "several points in"
            return MedianMetricReport(
                False,
                witness=(points[x], points[y], points[z]),
                reason=f"{kind} the interval intersection",
            )
        if keep:
            table[x] = res
        if algebra is not None and matches:
            expected = algebra.median_many(x, ar[:, None], ar[None, :])
            if not np.array_equal(expected, res):
                y, z = np.argwhere(expected != res)[0]
                matches = False
                mismatch = (points[x], points[y], points[z])
    return MedianMetricReport(True, medians=table, witness=mismatch, matches_algebra=matches)


def edge_thickness(inst, skel=None):
    """lambda(e) = d(e-, e+) for each skeleton edge, aligned with ``skel.edges``."""
    skel = skel or one_skeleton(inst.algebra, check=False)
    if not skel.edges:
        return skel, np.zeros(0)
    a, b = np.array(skel.edges).T
    return skel, inst.D[a, b]


def _thickness_arrays(inst):
    skel, lam = edge_thickness(inst)
    W = len(skel.walls)
    lo = np.full(W, np.inf)
    hi = np.zeros(W)
    for e, w in enumerate(skel.edge_wall):
        lo[w] = min(lo[w], lam[e])
        hi[w] = max(hi[w], lam[e])
    return skel, lo, hi


def wall_thickness(inst):
    """Per wall, (min, max) of d over the edges crossing it."""
    skel, lo, hi = _thickness_arrays(inst)
    return {W: (float(lo[w]), float(hi[w])) for w, W in enumerate(skel.walls)}


def rectified_metric(inst):
    """Wall metric with each wall weighted by its maximal edge thickness."""
    if len(inst.algebra) == 1:
        return FiniteMetric(inst.algebra.elements, np.zeros((1, 1)), check=False)
    _, _, hi = _thickness_arrays(inst)
    return wall_metric(inst.algebra, hi)


def restrict(inst, idx):
    """Instance induced on the med-closed subset ``idx`` (indices into the ambient algebra)."""
    sub = SubAlgebra(inst.algebra, idx)
    p = sub.parent_indices
    return MetricMedianAlgebraInstance(sub, FiniteMetric(sub.elements, inst.D[np.ix_(p, p)], check=False))


@dataclass
class MonotonicityReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def check_monotonicity(ambient, nested_pairs, x=None, y=None):
    """Compare rectified distances on nested subalgebras M of N.

    ``nested_pairs`` holds ``(M, N)`` element-id collections. Each side is
    rectified on its induced subalgebra with the ambient metric; every pair
    of M (or only ``(x, y)``) must satisfy d_M <= d_N.
    """
    A = ambient.algebra
    report = MonotonicityReport()
    for Mset, Nset in nested_pairs:
        mi, ni = A.indices_of(Mset), A.indices_of(Nset)
        for name, idx in (("M", mi), ("N", ni)):
            if not is_closed(A, idx):
                raise MedianAlgebraError(f"{name} is not closed under the median")
        if not np.all(np.isin(mi, ni)):
            raise MedianAlgebraError("M is not contained in N")
        dM = rectified_metric(restrict(ambient, mi)).matrix
        dN_full = rectified_metric(restrict(ambient, ni)).matrix
        pos = np.searchsorted(ni, mi)
        dN = dN_full[np.ix_(pos, pos)]
        if x is not None:
            a, b = A.index[x], A.index[y]
            ia, ib = int(np.searchsorted(mi, a)), int(np.searchsorted(mi, b))
            cand = [(ia, ib)]
        else:
            cand = [(i, j) for i in range(len(mi)) for j in range(i + 1, len(mi))]
        for i, j in cand:
            report.checked += 1
            if dM[i, j] > dN[i, j] * (1 + REL_TOL) + REL_TOL:
                report.violations.append(
                    (frozenset(Mset), frozenset(Nset), A.elements[mi[i]], A.elements[mi[j]], dM[i, j], dN[i, j])
                )
    return report


@dataclass
class RectifiabilityReport:
    ratio: float
    spread: float
    ratio_witness: tuple = None
    subalgebras: int = 0


def rectifiability_diagnostics(inst, samples=32, seed=0, generators=3):
    """Finite-scale proxies for uniform rectifiability.

    Over the whole algebra plus ``samples`` seeded subalgebras (closures of
    ``generators`` random points) reports the largest d_mu^M / d over pairs
    and the largest lambda_max / lambda_min over walls.
    """
    A = inst.algebra
    n = len(A)
    rng = np.random.default_rng(seed)
    subsets = [np.arange(n)]
    for _ in range(samples):
        k = min(n, generators)
        subsets.append(closure_indices(A, rng.choice(n, size=k, replace=False)))
    ratio, spread, witness = 1.0, 1.0, None
    for idx in subsets:
        if len(idx) < 2:
            continue
        sub = restrict(inst, idx) if len(idx) < n else inst
        _, lo, hi = _thickness_arrays(sub)
        spread = max(spread, float((hi / lo).max()))
        dm = rectified_metric(sub).matrix
        d = sub.D
        off = ~np.eye(len(idx), dtype=bool)
        r = np.where(off, dm / np.where(off, d, 1.0), 0.0)
        i, j = np.unravel_index(np.argmax(r), r.shape)
        if r[i, j] > ratio:
            ratio = float(r[i, j])
            witness = (sub.algebra.elements[i], sub.algebra.elements[j])
    return RectifiabilityReport(ratio, spread, witness, len(subsets))
