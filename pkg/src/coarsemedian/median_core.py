"""Finite median algebras as values.

Every algebra works in *index space*: element ``i`` is ``elements[i]`` and the
median is evaluated on integer index arrays through :meth:`median_many`.
Concrete subclasses differ only in how that map is computed (explicit table,
bitwise majority, coordinatewise median, tree distances, products, induced
subsets).
"""

from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import _kernels

TABLE_CAP = 4096
MATERIALIZE_CAP = 256
EXHAUSTIVE_CAP = 64
DEFAULT_MAX_WITNESSES = 1000

__all__ = [
    "MedianAlgebraError",
    "InternalConsistencyError",
    "FiniteMedianAlgebra",
    "TableMedianAlgebra",
    "MajorityAlgebra",
    "CoordinateMedianAlgebra",
    "TreeMedianAlgebra",
    "ProductMedianAlgebra",
    "SubAlgebra",
    "Wall",
    "AxiomReport",
    "verify_median_axioms",
    "median_closure",
    "closure_indices",
    "is_closed",
    "interval",
    "interval_indices",
    "enumerate_walls",
    "wall_masks",
    "separating_walls",
    "separation_matrix",
    "crossing",
    "crossing_matrix",
    "cached_wall_masks",
    "rank",
]


class MedianAlgebraError(ValueError):
    """Malformed input or a violated precondition."""


class InternalConsistencyError(RuntimeError):
    """A self-check failed; usually a non-median input slipped through."""


class FiniteMedianAlgebra:
    """Base class. Subclasses implement ``_median_idx`` on broadcastable int arrays."""

    def __init__(self, elements):
        self.elements = tuple(elements)
        if not self.elements:
            raise MedianAlgebraError("an algebra needs at least one element")
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise MedianAlgebraError("duplicate element identifiers")
        self._table = None
        self._walls = None

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"{type(self).__name__}(size={len(self)})"

    def _median_idx(self, i, j, k):
        raise NotImplementedError

    def median_many(self, i, j, k):
        i, j, k = np.broadcast_arrays(np.asarray(i), np.asarray(j), np.asarray(k))
        if self._table is not None:
            return self._table[i, j, k]
        return np.asarray(self._median_idx(i, j, k), dtype=np.int64)

    def med_idx(self, i, j, k):
        return int(self.median_many(i, j, k))

    def med(self, x, y, z):
        ix = self.index
        return self.elements[self.med_idx(ix[x], ix[y], ix[z])]

    def indices_of(self, subset):
        try:
            return np.array(sorted(self.index[e] for e in subset), dtype=np.int64)
        except KeyError as exc:
            raise MedianAlgebraError(f"unknown element {exc.args[0]!r}") from None

    def ids(self, indices):
        return frozenset(self.elements[int(i)] for i in indices)

    @property
    def table_backed(self):
        return False

    def table(self):
        """Dense ``(n, n, n)`` int32 median table (cached)."""
        if self._table is None:
            n = len(self)
            if n > max(MATERIALIZE_CAP, TABLE_CAP if self.table_backed else 0):
                raise MedianAlgebraError(f"refusing to materialize a table for {n} elements")
            out = np.empty((n, n, n), dtype=np.int32)
            ar = np.arange(n)
            for x in range(n):
                i, j, k = (np.ascontiguousarray(a) for a in np.broadcast_arrays(x, ar[:, None], ar[None, :]))
                out[x] = self._median_idx(i, j, k)
            self._table = out
        return self._table

    def materializable(self):
        return self._table is not None or len(self) <= MATERIALIZE_CAP

    def _fast_walls(self):
        return None


class TableMedianAlgebra(FiniteMedianAlgebra):
    """Explicit ``(n, n, n)`` table; ``table[i, j, k]`` is the index of med(i, j, k)."""

    def __init__(self, elements, table):
        super().__init__(elements)
        n = len(self.elements)
        if n > TABLE_CAP:
            raise MedianAlgebraError(f"table-backed algebras are capped at {TABLE_CAP} elements")
        table = np.asarray(table)
        if table.shape != (n, n, n):
            raise MedianAlgebraError(f"median table must have shape {(n, n, n)}, got {table.shape}")
        if table.size and (table.min() < 0 or table.max() >= n):
            raise MedianAlgebraError("median table entries must index the element list")
        self._table = np.ascontiguousarray(table, dtype=np.int32)

    @property
    def table_backed(self):
        return True

    def _median_idx(self, i, j, k):
        return self._table[i, j, k]

    @classmethod
    def from_function(cls, elements, fn):
        """Tabulate ``fn(x, y, z) -> element`` over all triples."""
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        table = np.empty((n, n, n), dtype=np.int32)
        for a, x in enumerate(elements):
            for b, y in enumerate(elements):
                for c, z in enumerate(elements):
                    table[a, b, c] = index[fn(x, y, z)]
        return cls(elements, table)


class MajorityAlgebra(FiniteMedianAlgebra):
    """{0,1}^dim with coordinatewise majority.

    Element ``i`` is the bit vector of ``i`` written most-significant first,
    so the default identifiers are bit tuples in lexicographic order.
    """

    def __init__(self, dim, labels=None):
        if dim < 0:
            raise MedianAlgebraError("dimension must be non-negative")
        self.dim = dim
        if labels is None:
            labels = [tuple((i >> (dim - 1 - b)) & 1 for b in range(dim)) for i in range(2**dim)]
        elif len(labels) != 2**dim:
            raise MedianAlgebraError(f"majority_bits of dim {dim} needs {2**dim} elements")
        super().__init__(labels)

    def _median_idx(self, i, j, k):
        return (i & j) | (j & k) | (i & k)

    def _fast_walls(self):
        n = len(self)
        ar = np.arange(n)
        masks = [((ar >> (self.dim - 1 - b)) & 1).astype(bool) for b in range(self.dim)]
        return masks


class CoordinateMedianAlgebra(FiniteMedianAlgebra):
    """A finite set of points in R^d closed under the coordinatewise median."""

    def __init__(self, points, check=True):
        pts = [tuple(p) for p in points]
        super().__init__(pts)
        self.coords = np.array(pts, dtype=np.float64).reshape(len(pts), -1)
        self._levels = [np.unique(self.coords[:, c]) for c in range(self.coords.shape[1])]
        self._radix = np.array([len(lv) for lv in self._levels], dtype=np.int64)
        keys = self._encode(self.coords)
        if keys is None:
            raise MedianAlgebraError("coordinate encoding failed")
        order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[order]
        self._sorted_idx = order
        if check and len(pts) <= MATERIALIZE_CAP:
            ar = np.arange(len(pts))
            for i in ar:
                self._median_idx(np.full((len(pts), len(pts)), i), ar[:, None] + 0 * ar, ar[None, :] + 0 * ar[:, None])

    def _encode(self, arr):
        key = np.zeros(arr.shape[0], dtype=np.int64)
        for c, lv in enumerate(self._levels):
            r = np.searchsorted(lv, arr[:, c])
            r = np.minimum(r, len(lv) - 1)
            if not np.all(lv[r] == arr[:, c]):
                return None
            key = key * self._radix[c] + r
        return key

    def _median_idx(self, i, j, k):
        shape = i.shape
        a = self.coords[i.ravel()]
        b = self.coords[j.ravel()]
        c = self.coords[k.ravel()]
        m = np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))
        keys = self._encode(m)
        if keys is None:
            raise MedianAlgebraError("point set is not closed under the coordinatewise median")
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        if not np.all(self._sorted_keys[pos] == keys):
            raise MedianAlgebraError("point set is not closed under the coordinatewise median")
        return self._sorted_idx[pos].reshape(shape)


class TreeMedianAlgebra(FiniteMedianAlgebra):
    """Vertex set of a finite tree; med(x,y,z) is the unique vertex on all three geodesics."""

    def __init__(self, vertices, edges):
        super().__init__(vertices)
        n = len(self.elements)
        try:
            pairs = [(self.index[a], self.index[b]) for a, b in edges]
        except (KeyError, TypeError, ValueError):
            raise MedianAlgebraError("malformed tree edge list") from None
        if len(pairs) != n - 1 or any(a == b for a, b in pairs):
            raise MedianAlgebraError("malformed tree edge list: a tree on n vertices has n-1 edges")
        self.edges = tuple(tuple(sorted(p)) for p in pairs)
        if n > 1:
            rows = [a for a, b in pairs] + [b for a, b in pairs]
            cols = [b for a, b in pairs] + [a for a, b in pairs]
            adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
            ncomp, _ = connected_components(adj, directed=False)
            if ncomp != 1:
                raise MedianAlgebraError("malformed tree edge list: graph is not connected")
            self.hops = shortest_path(adj, method="D", unweighted=True).astype(np.int64)
        else:
            self.hops = np.zeros((1, 1), dtype=np.int64)

    def _median_idx(self, i, j, k):
        shape = i.shape
        fi, fj, fk = i.ravel(), j.ravel(), k.ravel()
        out = np.empty(fi.shape[0], dtype=np.int64)
        step = max(1, 2_000_000 // len(self))
        for s in range(0, fi.shape[0], step):
            tot = self.hops[fi[s : s + step]] + self.hops[fj[s : s + step]] + self.hops[fk[s : s + step]]
            out[s : s + step] = np.argmin(tot, axis=1)
        return out.reshape(shape)


class ProductMedianAlgebra(FiniteMedianAlgebra):
    """Cartesian product with componentwise median; element ``i1 * n2 + i2`` is ``(a_i1, b_i2)``."""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        n = len(left) * len(right)
        if n > 1_000_000:
            raise MedianAlgebraError("product size cap exceeded")
        super().__init__([(a, b) for a in left.elements for b in right.elements])

    def _median_idx(self, i, j, k):
        n2 = len(self.right)
        li = self.left.median_many(i // n2, j // n2, k // n2)
        ri = self.right.median_many(i % n2, j % n2, k % n2)
        return li * n2 + ri

    def _fast_walls(self):
        n1, n2 = len(self.left), len(self.right)
        lm = cached_wall_masks(self.left)
        rm = cached_wall_masks(self.right)
        masks = [np.repeat(m, n2) for m in lm] + [np.tile(m, n1) for m in rm]
        return masks


class SubAlgebra(FiniteMedianAlgebra):
    """Algebra induced on a med-closed subset of a parent (given by parent indices)."""

    def __init__(self, parent, indices, check=True):
        idx = np.array(sorted(set(int(i) for i in indices)), dtype=np.int64)
        if len(idx) == 0:
            raise MedianAlgebraError("empty subset")
        self.parent = parent
        self.parent_indices = idx
        super().__init__([parent.elements[i] for i in idx])
        self._lookup = np.full(len(parent), -1, dtype=np.int64)
        self._lookup[idx] = np.arange(len(idx))
        if check and not is_closed(parent, idx):
            raise MedianAlgebraError("subset is not closed under the median")

    def _median_idx(self, i, j, k):
        p = self.parent_indices
        out = self._lookup[self.parent.median_many(p[i], p[j], p[k])]
        if np.any(out < 0):
            raise MedianAlgebraError("subset is not closed under the median")
        return out


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    ok: bool
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    exhaustive: bool = True
    checked: int = 0


def _witness(M, name, idx):
    return (name, tuple(M.elements[int(i)] for i in idx))


def verify_median_axioms(M, mode="auto", samples=100_000, seed=0, max_witnesses=DEFAULT_MAX_WITNESSES):
    """Check the three median-algebra identities.

    ``mode="exhaustive"`` scans every tuple (all 5-tuples for distributivity);
    ``"sampled"`` draws ``samples`` seeded tuples per identity. ``"auto"`` is
    exhaustive up to ``EXHAUSTIVE_CAP`` elements. Witness lists are capped at
    ``max_witnesses`` per identity; ``counts`` holds the full tallies.
    """
    n = len(M)
    if mode == "auto":
        mode = "exhaustive" if n <= EXHAUSTIVE_CAP else "sampled"
    violations = []
    counts = {}
    if mode == "exhaustive":
        T = M.table()
        ar = np.arange(n)
        bad = (T != T.transpose(0, 2, 1)) | (T != T.transpose(1, 2, 0))
        sym = np.argwhere(bad)
        counts["symmetry"] = len(sym)
        violations += [_witness(M, "symmetry", w) for w in sym[:max_witnesses]]
        diag = T[ar, ar, :]
        maj = np.argwhere(diag != ar[:, None])
        counts["majority"] = len(maj)
        violations += [_witness(M, "majority", (x, x, y)) for x, y in maj[:max_witnesses]]
        cnt, wit = _kernels.distributivity_violations(T, max_witnesses)
        counts["distributivity"] = cnt
        violations += [_witness(M, "distributivity", w) for w in wit]
        checked = 2 * n**3 + n**5
        exhaustive = True
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        x, y, z, u, v = (rng.integers(0, n, samples) for _ in range(5))
        m = M.median_many
        a = m(x, y, z)
        bad = np.nonzero((a != m(x, z, y)) | (a != m(y, z, x)))[0]
        counts["symmetry"] = len(bad)
        violations += [_witness(M, "symmetry", (x[s], y[s], z[s])) for s in bad[:max_witnesses]]
        bad = np.nonzero(m(x, x, y) != x)[0]
        counts["majority"] = len(bad)
        violations += [_witness(M, "majority", (x[s], x[s], y[s])) for s in bad[:max_witnesses]]
        lhs = m(a, u, v)
        rhs = m(x, m(y, u, v), m(z, u, v))
        bad = np.nonzero(lhs != rhs)[0]
        counts["distributivity"] = len(bad)
        violations += [
            _witness(M, "distributivity", (x[s], y[s], z[s], u[s], v[s])) for s in bad[:max_witnesses]
        ]
        checked = 3 * samples
        exhaustive = False
    else:
        raise MedianAlgebraError(f"unknown mode {mode!r}")
    return AxiomReport(not violations, violations, counts, exhaustive, checked)


# ---------------------------------------------------------------------------
# closure, intervals, convexity


def _triple_medians(M, idx):
    """All medians of triples drawn from ``idx`` (chunked over the first slot)."""
    idx = np.asarray(idx, dtype=np.int64)
    out = []
    for a in idx:
        out.append(np.unique(M.median_many(a, idx[:, None], idx[None, :])))
    return np.unique(np.concatenate(out)) if out else idx


def closure_indices(M, idx):
    current = np.unique(np.asarray(idx, dtype=np.int64))
    if len(current) == 0:
        raise MedianAlgebraError("empty generating set")
    while True:
        new = np.union1d(current, _triple_medians(M, current))
        if len(new) == len(current):
            return current
        current = new


def median_closure(M, A):
    """The subalgebra generated by ``A`` (fixed-point iteration over triples)."""
    A = list(A)
    if not A:
        raise MedianAlgebraError("empty generating set")
    return M.ids(closure_indices(M, M.indices_of(A)))


def is_closed(M, idx):
    idx = np.unique(np.asarray(idx, dtype=np.int64))
    return bool(np.all(np.isin(_triple_medians(M, idx), idx)))


def interval_indices(M, i, j):
    ar = np.arange(len(M))
    return np.nonzero(M.median_many(i, j, ar) == ar)[0]


def interval(M, x, y):
    """{z : med(x, y, z) = z}."""
    return M.ids(interval_indices(M, M.index[x], M.index[y]))


def _is_convex_mask(M, mask):
    members = np.nonzero(mask)[0]
    if len(members) <= 1:
        return True
    ar = np.arange(len(M))
    for a in members:
        med = M.median_many(a, members[:, None], ar[None, :])
        if not np.all(mask[med]):
            return False
    return True


# ---------------------------------------------------------------------------
# walls


@dataclass(frozen=True)
class Wall:
    """Convex bipartition; ``half`` holds the first element of the algebra."""

    half: frozenset
    cohalf: frozenset

    def separates(self, a, b):
        return (a in self.half) != (b in self.half)


def _wall_from_mask(M, mask):
    return Wall(M.ids(np.nonzero(~mask)[0]), M.ids(np.nonzero(mask)[0]))


def wall_masks(M, walls):
    """``(len(walls), n)`` bool array; True marks cohalf membership."""
    n = len(M)
    out = np.zeros((len(walls), n), dtype=bool)
    for w, W in enumerate(walls):
        for e in W.cohalf:
            out[w, M.index[e]] = True
    return out


def _generic_wall_masks(M):
    n = len(M)
    ar = np.arange(n)
    seen = {}
    for a in range(n):
        meds = M.median_many(a, ar[:, None], ar[None, :])
        sizes = (meds == ar[None, :]).sum(axis=1)
        for b in range(a + 1, n):
            if sizes[b] != 2:
                continue
            # edge a~b: the half on a's side
            mask = meds[b] != a
            if mask[0]:
                mask = ~mask
            key = np.packbits(mask).tobytes()
            if key not in seen:
                seen[key] = mask
    return list(seen.values())


def enumerate_walls(M):
    """All walls of ``M`` in canonical orientation, each exactly once.

    Walls are read off skeleton edges (pairs whose interval is just the
    pair). Every result is checked for convexity and the wall set for
    separating all pairs; a failure raises InternalConsistencyError.
    """
    if M._walls is not None:
        return list(M._walls)
    n = len(M)
    if n == 1:
        M._walls = ()
        return []
    fast = M._fast_walls()
    if fast is not None:
        masks = [m if not m[0] else ~m for m in fast]
    else:
        masks = _generic_wall_masks(M)
        for mask in masks:
            if not (_is_convex_mask(M, mask) and _is_convex_mask(M, ~mask)):
                raise InternalConsistencyError(
                    f"wall {sorted(np.nonzero(mask)[0].tolist())} is not a convex bipartition"
                )
    if not masks:
        raise InternalConsistencyError("no walls found in an algebra with two or more elements")
    stack = np.array(masks, dtype=bool)
    if len(np.unique(np.packbits(stack, axis=0).T, axis=0)) != n:
        raise InternalConsistencyError("walls fail to separate some pair of distinct elements")
    order = sorted(range(len(masks)), key=lambda w: tuple(np.nonzero(masks[w])[0].tolist()))
    M._walls = tuple(_wall_from_mask(M, masks[w]) for w in order)
    M._wall_masks = stack[order]
    return list(M._walls)


def cached_wall_masks(M):
    enumerate_walls(M)
    if len(M) == 1:
        return np.zeros((0, 1), dtype=bool)
    return M._wall_masks


def separating_walls(walls, a, b):
    """The walls with ``a`` and ``b`` on opposite sides."""
    return [W for W in walls if W.separates(a, b)]


def separation_matrix(masks):
    """``sep[w, a, b]`` for a ``(W, n)`` mask array (True iff wall w separates a and b)."""
    return masks[:, :, None] != masks[:, None, :]


def crossing(W, V):
    """True iff all four quarter-intersections of the two walls are non-empty."""
    if W == V:
        raise MedianAlgebraError("a wall is not compared with itself for crossing")
    return bool(W.half & V.half and W.half & V.cohalf and W.cohalf & V.half and W.cohalf & V.cohalf)


def crossing_matrix(masks):
    a = masks.astype(np.int64)
    b = 1 - a
    cross = (a @ a.T > 0) & (a @ b.T > 0) & (b @ a.T > 0) & (b @ b.T > 0)
    np.fill_diagonal(cross, False)
    return cross


def rank(M):
    """Largest pairwise-crossing wall family (top cube dimension)."""
    if len(M) == 1:
        return 0
    cross = crossing_matrix(cached_wall_masks(M))
    G = nx.Graph()
    G.add_nodes_from(range(len(cross)))
    G.add_edges_from(zip(*np.nonzero(np.triu(cross))))
    _, size = nx.max_weight_clique(G, weight=None)
    return int(size)

