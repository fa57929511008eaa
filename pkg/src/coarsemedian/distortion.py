"""Fitting quasi-isometric embedding constants to paired distance samples."""

import numpy as np

REL_TOL = 1e-9


def _feasible(alpha, src, dst, tol=0.0):
    return bool(np.all(dst <= alpha * src * (1 + tol)) and np.all(src <= alpha * dst * (1 + tol)))


def fit_distortion(src, dst, tol=REL_TOL):
    """Tightest (alpha, eps) with src / alpha - eps <= dst <= alpha * src + eps.

    ``alpha >= 1`` is minimized first: it is the smallest factor for which the
    purely multiplicative bounds hold on every pair where both distances are
    positive (found by bisection; values within ``tol`` of zero count as
    collapsed). ``eps`` is then the exact additive slack
    needed at that alpha over all pairs, which absorbs collapsed pairs.
    Values within ``tol`` of 1 (resp. 0) are snapped.
    """
    src = np.asarray(src, dtype=np.float64).ravel()
    dst = np.asarray(dst, dtype=np.float64).ravel()
    if src.shape != dst.shape:
        raise ValueError("distance samples must be paired")
    if src.size == 0:
        return 1.0, 0.0
    scale = float(max(1.0, src.max(), dst.max()))
    pos = (src > tol * scale) & (dst > tol * scale)
    ps, pd = src[pos], dst[pos]
    if _feasible(1.0, ps, pd, tol):
        alpha = 1.0
    else:
        lo, hi = 1.0, 2.0
        while not _feasible(hi, ps, pd):
            lo, hi = hi, hi * 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _feasible(mid, ps, pd):
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * hi:
                break
        alpha = hi
    eps = float(max(0.0, np.max(dst - alpha * src), np.max(src / alpha - dst)))
    if eps <= tol * scale:
        eps = 0.0
    return float(alpha), eps


def fit_one_sided(pairs_a, pairs_b, tol=REL_TOL):
    """Tightest (beta, gamma) with b <= beta * a + gamma over ordered pairs.

    Same order of minimization as ``fit_distortion``: beta >= 1 from pairs
    with both values positive, then gamma exactly.
    """
    a = np.asarray(pairs_a, dtype=np.float64).ravel()
    b = np.asarray(pairs_b, dtype=np.float64).ravel()
    if a.size == 0:
        return 1.0, 0.0
    scale = float(max(1.0, a.max(), b.max()))
    pos = (a > tol * scale) & (b > tol * scale)
    if np.any(pos):
        beta = float(max(1.0, np.max(b[pos] / a[pos])))
    else:
        beta = 1.0
    if beta <= 1.0 + tol:
        beta = 1.0
    gamma = float(max(0.0, np.max(b - beta * a)))
    if gamma <= tol * scale:
        gamma = 0.0
    return beta, gamma
