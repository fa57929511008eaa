"""1-skeleta of the cube complexes of finite median algebras, and standard models."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .median_core import (
    InternalConsistencyError,
    MajorityAlgebra,
    MedianAlgebraError,
    ProductMedianAlgebra,
    TreeMedianAlgebra,
    cached_wall_masks,
    enumerate_walls,
)

__all__ = [
    "CubeComplexSkeleton",
    "one_skeleton",
    "parallel_classes",
    "standard_models",
    "product",
    "skeleton_to_json",
]


@dataclass(frozen=True)
class CubeComplexSkeleton:
    """Vertices are algebra indices; ``edges[e] = (i, j)`` with ``i < j``, sorted.

    ``edge_wall[e]`` indexes ``walls`` (the canonical wall list of the algebra).
    """

    algebra: object
    edges: tuple
    edge_wall: tuple
    walls: tuple

    @property
    def vertices(self):
        return self.algebra.elements

    def adjacency(self):
        n = len(self.algebra)
        if not self.edges:
            return csr_matrix((n, n))
        a, b = np.array(self.edges).T
        return csr_matrix((np.ones(2 * len(a)), (np.r_[a, b], np.r_[b, a])), shape=(n, n))

    def hop_distances(self):
        return shortest_path(self.adjacency(), method="D", unweighted=True)


def one_skeleton(M, check=True):
    """Edges join pairs separated by exactly one wall.

    With ``check`` the graph distance is compared with the wall-count
    distance for all pairs (this also certifies connectivity).
    """
    walls = enumerate_walls(M)
    n = len(M)
    if n == 1:
        return CubeComplexSkeleton(M, (), (), ())
    masks = cached_wall_masks(M)
    codes = masks.T.astype(np.int64)  # (n, W)
    edges, edge_wall = [], []
    for a in range(n):
        diff = codes[a + 1 :] != codes[a]
        counts = diff.sum(axis=1)
        for off in np.nonzero(counts == 1)[0]:
            b = a + 1 + int(off)
            edges.append((a, b))
            edge_wall.append(int(np.argmax(diff[off])))
    skel = CubeComplexSkeleton(M, tuple(edges), tuple(edge_wall), tuple(walls))
    if check:
        hops = skel.hop_distances()
        if not np.all(np.isfinite(hops)):
            raise InternalConsistencyError("1-skeleton is disconnected")
        wallcount = (codes[:, None, :] != codes[None, :, :]).sum(axis=2)
        if not np.array_equal(hops.astype(np.int64), wallcount):
            bad = np.argwhere(hops != wallcount)[0]
            raise InternalConsistencyError(
                f"graph distance differs from wall count at {tuple(M.elements[i] for i in bad)}"
            )
    return skel


def parallel_classes(skel):
    """Map each wall to the list of edges it crosses (``(i, j)`` index pairs)."""
    classes = {W: [] for W in skel.walls}
    for e, w in zip(skel.edges, skel.edge_wall):
        classes[skel.walls[w]].append(e)
    return classes


def _path(n):
    return TreeMedianAlgebra(range(n), [(i, i + 1) for i in range(n - 1)])


def standard_models(kind, size):
    """Vertex median algebras of standard complexes.

    ``kind`` is ``"hypercube"`` (size = n), ``"path"`` (size = number of
    vertices), ``"tree"`` (size = edge list over hashable labels) or
    ``"grid"`` (size = ``(n, m)``, product of paths).
    """
    if kind == "hypercube":
        return MajorityAlgebra(int(size))
    if kind == "path":
        if int(size) < 1:
            raise MedianAlgebraError("a path needs at least one vertex")
        return _path(int(size))
    if kind == "tree":
        edges = [tuple(e) for e in size]
        if any(len(e) != 2 for e in edges):
            raise MedianAlgebraError("malformed tree edge list")
        verts = sorted({v for e in edges for v in e}, key=repr)
        if not verts:
            raise MedianAlgebraError("malformed tree edge list: no edges")
        return TreeMedianAlgebra(verts, edges)
    if kind == "grid":
        n, m = size
        return product(_path(int(n)), _path(int(m)))
    raise MedianAlgebraError(f"unknown model kind {kind!r}")


def product(M1, M2):
    """Componentwise-median product; elements are pairs ``(a, b)``."""
    return ProductMedianAlgebra(M1, M2)


def skeleton_to_json(skel):
    walls = [{"half": sorted(skel.algebra.index[e] for e in W.half)} for W in skel.walls]
    return {
        "vertices": [_label(v) for v in skel.vertices],
        "edges": [list(e) for e in skel.edges],
        "edge_wall": list(skel.edge_wall),
        "walls": walls,
    }


def _label(v):
    if isinstance(v, str):
        return v
    return str(v)
