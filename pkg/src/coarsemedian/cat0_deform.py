"""The CAT(0)-type deformation sigma_d of a finite median metric space.

The maximal cube with diagonal {x, y} is built from the walls separating x
and y: two such walls end up in the same cube direction exactly when they
are linked by a chain of non-crossing pairs.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from .median_core import (
    InternalConsistencyError,
    MedianAlgebraError,
    cached_wall_masks,
    crossing_matrix,
    enumerate_walls,
    interval_indices,
    rank,
)
from .median_metrics import REL_TOL, FiniteMetric, _thickness_arrays

__all__ = [
    "DiagonalCube",
    "interval_blocks",
    "maximal_diagonal_cube",
    "cube_weight",
    "cat0_metric",
    "sandwich_rows",
]


@dataclass(frozen=True)
class DiagonalCube:
    endpoints: tuple
    blocks: tuple  # tuple of tuples of Wall
    vertices: tuple  # corner for choice mask c at position c (block 0 = lowest bit)
    block_lengths: tuple

    @property
    def dim(self):
        return len(self.blocks)


def _block_indices(M, i, j):
    masks = cached_wall_masks(M)
    sep = np.nonzero(masks[:, i] != masks[:, j])[0]
    if len(sep) == 0:
        raise MedianAlgebraError("a diagonal needs two distinct endpoints")
    cross = crossing_matrix(masks[sep])
    noncross = ~cross
    np.fill_diagonal(noncross, False)
    ncomp, labels = connected_components(noncross, directed=False)
    blocks = [sep[labels == c] for c in range(ncomp)]
    blocks.sort(key=lambda b: int(b[0]))
    return blocks


def interval_blocks(M, x, y):
    """Partition of the walls separating x and y into cube directions."""
    walls = enumerate_walls(M)
    blocks = _block_indices(M, M.index[x], M.index[y])
    return tuple(tuple(walls[w] for w in b) for b in blocks)


def _wall_lengths(inst):
    _, lo, hi = _thickness_arrays(inst)
    return hi


def maximal_diagonal_cube(inst, x, y, lengths=None):
    """The unique maximal cube Q(x, y) of a median metric instance.

    ``lengths`` overrides the per-wall lengths (defaults to edge
    thickness, which is constant on parallel classes of a median metric).
    """
    M = inst.algebra
    walls = enumerate_walls(M)
    i, j = M.index[x], M.index[y]
    blocks = _block_indices(M, i, j)
    lengths = _wall_lengths(inst) if lengths is None else np.asarray(lengths, dtype=np.float64)
    masks = cached_wall_masks(M)
    sep = np.concatenate(blocks)
    span = interval_indices(M, i, j)
    flipped = masks[np.ix_(sep, span)] != masks[sep, i][:, None]
    lookup = {col.tobytes(): int(z) for col, z in zip(flipped.T, span)}
    position = {int(w): p for p, w in enumerate(sep)}
    vertices = []
    for choice in range(2 ** len(blocks)):
        target = np.zeros(len(sep), dtype=bool)
        for b, block in enumerate(blocks):
            if choice >> b & 1:
                target[[position[int(w)] for w in block]] = True
        z = lookup.get(target.tobytes())
        if z is None:
            raise InternalConsistencyError(
                f"no corner of Q({x!r}, {y!r}) for block choice {choice}; input is not median"
            )
        vertices.append(M.elements[z])
    block_lengths = tuple(float(sum((float(lengths[w]) for w in b), 0.0)) for b in blocks)
    return DiagonalCube(
        (x, y),
        tuple(tuple(walls[w] for w in b) for b in blocks),
        tuple(vertices),
        block_lengths,
    )


def cube_weight(Q):
    """omega(Q) = sqrt of the sum of squared block lengths."""
    return float(np.sqrt(sum(b * b for b in Q.block_lengths)))


def _omega_matrix(inst, lengths):
    M = inst.algebra
    n = len(M)
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            blocks = _block_indices(M, i, j)
            bl = [sum((float(lengths[w]) for w in b), 0.0) for b in blocks]
            W[i, j] = W[j, i] = np.sqrt(sum(v * v for v in bl))
    return W


def cat0_metric(inst, check=True):
    """sigma_d: shortest paths on the complete graph weighted by omega(Q(x, y)).

    With ``check`` the metric axioms and d / sqrt(rank) <= sigma <= d are
    asserted (relative tolerance 1e-9); rounding residue inside that
    tolerance is clamped onto the bounds.
    """
    M = inst.algebra
    n = len(M)
    if n == 1:
        return FiniteMetric(M.elements, np.zeros((1, 1)), check=False)
    lengths = _wall_lengths(inst)
    W = _omega_matrix(inst, lengths)
    S = dijkstra(W, directed=False)
    S = np.minimum(S, S.T)
    np.fill_diagonal(S, 0.0)
    if check:
        d = inst.D
        r = rank(M)
        lower = d / np.sqrt(r)
        tol = REL_TOL * np.maximum(1.0, d)
        if np.any(S > d + tol) or np.any(S < lower - tol):
            bad = np.argwhere((S > d + tol) | (S < lower - tol))[0]
            raise InternalConsistencyError(
                f"sandwich bound violated at {(M.elements[bad[0]], M.elements[bad[1]])}"
            )
        S = np.clip(S, lower, d)
        np.fill_diagonal(S, 0.0)
        scale = REL_TOL * max(1.0, float(S.max()))
        for k in range(n):
            if np.any(S > S[:, k][:, None] + S[k][None, :] + scale):
                raise InternalConsistencyError("sigma violates the triangle inequality")
    return FiniteMetric(M.elements, S, check=False)


def sandwich_rows(inst, sigma):
    """Rows ``(x, y, d, sigma, d / sqrt(rank), d)`` for x before y."""
    M = inst.algebra
    r = max(1, rank(M))
    d = inst.D
    rows = []
    for i in range(len(M)):
        for j in range(i + 1, len(M)):
            rows.append((M.elements[i], M.elements[j], d[i, j], sigma.matrix[i, j], d[i, j] / np.sqrt(r), d[i, j]))
    return rows
