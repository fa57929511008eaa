"""numpy implementations of the hot loops.

Same signatures and result ordering as the compiled ``_ckernels`` module;
selected when the extension is missing or ``COARSEMEDIAN_PURE=1``.
"""

import numpy as np


def distributivity_violations(table, max_witnesses):
    """Scan mu(mu(x,y,z),u,v) == mu(x, mu(y,u,v), mu(z,u,v)) over all 5-tuples.

    Returns ``(count, witnesses)`` where witnesses is an ``(m, 5)`` int64
    array of ``(x, y, z, u, v)`` in scan order (u, v outer; x, y, z inner),
    truncated to ``max_witnesses`` rows.
    """
    table = np.ascontiguousarray(table)
    n = table.shape[0]
    ar = np.arange(n)
    count = 0
    found = []
    kept = 0
    for u in range(n):
        for v in range(n):
            col = table[:, u, v]
            lhs = col[table]
            rhs = table[ar[:, None, None], col[None, :, None], col[None, None, :]]
            bad = lhs != rhs
            nbad = int(bad.sum())
            if not nbad:
                continue
            count += nbad
            if kept < max_witnesses:
                xs, ys, zs = np.nonzero(bad)
                take = min(max_witnesses - kept, len(xs))
                block = np.empty((take, 5), dtype=np.int64)
                block[:, 0] = xs[:take]
                block[:, 1] = ys[:take]
                block[:, 2] = zs[:take]
                block[:, 3] = u
                block[:, 4] = v
                found.append(block)
                kept += take
    if found:
        witnesses = np.concatenate(found)
    else:
        witnesses = np.empty((0, 5), dtype=np.int64)
    return count, witnesses


def _words(n):
    return max(1, (n + 63) // 64)


def interval_bitsets(dist, exact, rel_tol):
    """Bit ``z`` of ``bits[x, y]`` is set iff z lies in the metric interval I(x, y)."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    nbytes = _words(n) * 8
    out = np.zeros((n, n, nbytes), dtype=np.uint8)
    for x in range(n):
        # s[y, z] = d(x, z) + d(z, y)
        s = dist[x][None, :] + dist
        target = dist[x][:, None]
        if exact:
            mask = s == target
        else:
            mask = np.abs(s - target) <= rel_tol * np.maximum(1.0, target)
        packed = np.packbits(mask, axis=1, bitorder="little")
        out[x, :, : packed.shape[1]] = packed
    return out.view(np.uint64).reshape(n, n, nbytes // 8)


def median_scan(bits, x):
    """Intrinsic medians of (x, y, z) for all y, z.

    Entry ``[y, z]`` is the unique point of I(x,y) & I(y,z) & I(x,z), or -1
    if that intersection is empty and -2 if it has several points.
    """
    n = bits.shape[0]
    row = bits[x]
    out = np.empty((n, n), dtype=np.int32)
    for y in range(n):
        inter = row[y][None, :] & bits[y] & row
        counts = np.bitwise_count(inter).sum(axis=1)
        res = np.where(counts == 0, -1, -2).astype(np.int32)
        one = np.nonzero(counts == 1)[0]
        if len(one):
            sub = inter[one]
            w = np.argmax(sub != 0, axis=1)
            val = sub[np.arange(len(one)), w]
            res[one] = (w * 64 + np.log2(val.astype(np.float64)).astype(np.int64)).astype(np.int32)
        out[y] = res
    return out


def four_point_delta(dist):
    """Gromov four-point constant: max over quadruples of (largest - middle) / 2."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    best = 0.0
    for x in range(n):
        dx = dist[x]
        for y in range(x, n):
            dy = dist[y]
            s1 = dist[x, y] + dist
            s2 = dx[:, None] + dy[None, :]
            s3 = dx[None, :] + dy[:, None]
            hi = np.maximum(np.maximum(s1, s2), s3)
            lo = np.minimum(np.minimum(s1, s2), s3)
            mid = s1 + s2 + s3 - hi - lo
            cand = float((hi - mid).max()) / 2.0
            if cand > best:
                best = cand
    return best


def minmax_centers(side_dist):
    """Centers minimizing the max distance to the three sides of each triangle.

    ``side_dist[u, v, w]`` is the distance from w to the chosen side joining
    u and v. Returns ``(centers, quality)``; ties go to the smallest w.
    """
    side_dist = np.ascontiguousarray(side_dist, dtype=np.float64)
    n = side_dist.shape[0]
    centers = np.empty((n, n, n), dtype=np.int32)
    quality = np.empty((n, n, n), dtype=np.float64)
    for x in range(n):
        sx = side_dist[x]
        m = np.maximum(np.maximum(sx[:, None, :], sx[None, :, :]), side_dist)
        c = np.argmin(m, axis=2)
        centers[x] = c
        quality[x] = np.take_along_axis(m, c[:, :, None], axis=2)[:, :, 0]
    return centers, quality
