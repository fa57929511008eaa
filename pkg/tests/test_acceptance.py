"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict in ``RESULTS``; the
conftest hook prints them at the end of the run. Running this file as a
script prints the same lines.
"""

import itertools
import json
import math
import os
import subprocess
import sys
import time

import networkx as nx
import numpy as np
import pytest

from coarsemedian.approx_engine import approximate, geodesic_bound_check, lattice_resolver, tree_resolver
from coarsemedian.cat0_deform import cat0_metric, maximal_diagonal_cube
from coarsemedian.coarse_models import (
    closeness_distance,
    disk_points,
    euclidean_model,
    euclidean_rotation_gap,
    graph_model,
    l1_lattice_model,
    l1_median,
    rotation,
)
from coarsemedian.cube_complex import one_skeleton, product, standard_models
from coarsemedian.median_core import (
    MajorityAlgebra,
    SubAlgebra,
    TreeMedianAlgebra,
    closure_indices,
    enumerate_walls,
    rank,
    verify_median_axioms,
)
from coarsemedian.median_metrics import (
    FiniteMetric,
    MetricMedianAlgebraInstance,
    check_monotonicity,
    rectified_metric,
    verify_median_metric,
    wall_metric,
)
from tests.conftest import random_tree, random_unicyclic
from tests.oracles import convex_bipartitions, diagonal_cubes, is_med_closed, naive_closure, naive_interval

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def tree_algebra(n, seed):
    G = random_tree(n, seed)
    return TreeMedianAlgebra(list(G.nodes), list(G.edges))


def test_criterion_01_median_kernel():
    algebras = [MajorityAlgebra(n) for n in range(1, 5)]
    algebras += [standard_models("path", n) for n in range(1, 17)]
    algebras += [tree_algebra(n, 100 + n) for n in range(2, 33)]
    algebras += [
        product(MajorityAlgebra(2), standard_models("path", 16)),
        product(MajorityAlgebra(3), standard_models("path", 8)),
        product(tree_algebra(8, 1), tree_algebra(8, 2)),
        product(tree_algebra(16, 3), MajorityAlgebra(2)),
        product(standard_models("path", 4), tree_algebra(16, 4)),
        product(MajorityAlgebra(1), tree_algebra(32, 5)),
    ]
    t0 = time.perf_counter()
    bad = [M for M in algebras if not verify_median_axioms(M, mode="exhaustive").ok]
    elapsed = time.perf_counter() - t0
    record(1, not bad and elapsed < 60, f"{len(algebras)} algebras (|M| <= 64), {len(bad)} failing, {elapsed:.1f}s exhaustive")


def test_criterion_02_closure_bound():
    M = MajorityAlgebra(4)
    rng = np.random.default_rng(2)
    violations = 0
    for _ in range(200):
        k = int(rng.integers(1, 5))
        A = [M.elements[i] for i in rng.choice(16, size=k, replace=False)]
        C = {M.elements[i] for i in closure_indices(M, M.indices_of(A))}
        if not (is_med_closed(M, C) and C == naive_closure(M, A) and len(C) <= 2 ** (2 ** len(A))):
            violations += 1
    record(2, violations == 0, f"200 seeded sets in majority-{{0,1}}^4, {violations} violations")


def _oracle_corpus():
    corpus = [MajorityAlgebra(n) for n in range(1, 4)]
    corpus += [standard_models("path", n) for n in range(1, 13)]
    for n in range(1, 11):
        for T in nx.nonisomorphic_trees(n) if n > 1 else [nx.empty_graph(1)]:
            corpus.append(TreeMedianAlgebra(list(T.nodes), list(T.edges)))
    corpus += [tree_algebra(n, s) for n in (11, 12) for s in range(10)]
    corpus += [standard_models("grid", (a, b)) for a in range(2, 5) for b in range(a, 7) if a * b <= 12]
    corpus += [product(tree_algebra(4, s), standard_models("path", 3)) for s in range(3)]
    corpus.append(product(MajorityAlgebra(2), standard_models("path", 3)))
    M4 = MajorityAlgebra(4)
    rng = np.random.default_rng(3)
    seen = set()
    for _ in range(150):
        idx = tuple(closure_indices(M4, rng.choice(16, size=int(rng.integers(2, 6)), replace=False)))
        if len(idx) <= 12 and idx not in seen:
            seen.add(idx)
            corpus.append(SubAlgebra(M4, idx))
    return corpus


def test_criterion_03_wall_reconstruction():
    corpus = _oracle_corpus()
    mismatches = sum(
        {(W.half, W.cohalf) for W in enumerate_walls(M)} != convex_bipartitions(M) for M in corpus
    )
    cube_ok = True
    for n in range(1, 5):
        M = MajorityAlgebra(n)
        skel = one_skeleton(M)
        G = nx.Graph(list(skel.edges))
        cube_ok &= len(enumerate_walls(M)) == n and rank(M) == n and nx.is_isomorphic(G, nx.hypercube_graph(n))
    record(
        3,
        mismatches == 0 and cube_ok,
        f"{len(corpus)} algebras with |M| <= 12, {mismatches} oracle mismatches; hypercubes n<=4 ok={cube_ok}",
    )


def _weighting_pool():
    return [
        MajorityAlgebra(3),
        MajorityAlgebra(4),
        MajorityAlgebra(6),
        standard_models("grid", (4, 4)),
        standard_models("grid", (8, 8)),
        product(MajorityAlgebra(2), tree_algebra(16, 7)),
        product(standard_models("path", 3), MajorityAlgebra(3)),
        tree_algebra(64, 8),
        tree_algebra(40, 9),
        SubAlgebra(MajorityAlgebra(5), closure_indices(MajorityAlgebra(5), [0, 7, 25, 30, 12])),
    ]


def test_criterion_04_wall_metrics_are_median():
    pool = _weighting_pool()
    rng = np.random.default_rng(4)
    failures = 0
    for t in range(100):
        M = pool[t % len(pool)]
        W = len(enumerate_walls(M))
        lengths = rng.integers(1, 10, W).astype(float) if t % 2 else rng.uniform(0.1, 10.0, W)
        rep = verify_median_metric(wall_metric(M, lengths), algebra=M)
        failures += not (rep.ok and rep.matches_algebra is True)
    record(4, failures == 0, f"100 seeded weightings on {len(pool)} algebras (|M| <= 64), {failures} failures")


def test_criterion_05_rectification():
    sq = MajorityAlgebra(2)
    X = np.array(sq.elements, float)
    L2 = np.sqrt(((X[:, None] - X[None]) ** 2).sum(axis=2))
    inst = MetricMedianAlgebraInstance(sq, FiniteMetric(sq.elements, L2))
    diag = rectified_metric(inst).d((0, 0), (1, 1))
    M = MajorityAlgebra(4)
    rng = np.random.default_rng(5)
    violations, checked = 0, 0
    for _ in range(100):
        scales = rng.uniform(0.5, 2.0, 4)
        p = rng.uniform(1.0, 3.0)
        Y = np.array(M.elements, float) * scales
        D = (np.abs(Y[:, None] - Y[None]) ** p).sum(axis=2) ** (1 / p)
        amb = MetricMedianAlgebraInstance(M, FiniteMetric(M.elements, D))
        N = closure_indices(M, rng.choice(16, size=int(rng.integers(2, 6)), replace=False))
        sub = closure_indices(M, rng.choice(N, size=int(rng.integers(1, min(4, len(N)) + 1)), replace=False))
        rep = check_monotonicity(amb, [([M.elements[i] for i in sub], [M.elements[i] for i in N])])
        violations += len(rep.violations)
        checked += rep.checked
    record(
        5,
        diag == 2.0 and violations == 0,
        f"l2 square rectified diagonal = {diag!r}; 100 nested pairs ({checked} point pairs), {violations} violations",
    )


def _sigma_instances():
    rng = np.random.default_rng(6)
    out = []
    for M in [
        MajorityAlgebra(2),
        MajorityAlgebra(3),
        MajorityAlgebra(4),
        standard_models("grid", (4, 4)),
        standard_models("grid", (8, 8)),
        product(MajorityAlgebra(2), tree_algebra(16, 7)),
        product(standard_models("path", 3), MajorityAlgebra(3)),
        product(MajorityAlgebra(2), standard_models("grid", (4, 4))),
        SubAlgebra(MajorityAlgebra(4), closure_indices(MajorityAlgebra(4), [0, 7, 11, 12])),
        SubAlgebra(MajorityAlgebra(5), closure_indices(MajorityAlgebra(5), [0, 7, 25, 30, 12])),
    ]:
        W = len(enumerate_walls(M))
        for lengths in (np.ones(W), rng.uniform(0.2, 5.0, W)):
            out.append(MetricMedianAlgebraInstance(M, wall_metric(M, lengths)))
    return out


def test_criterion_06_sigma_sandwich():
    worst = 0.0
    count = 0
    for inst in _sigma_instances():
        assert len(inst.algebra) <= 64 and rank(inst.algebra) <= 4
        S = cat0_metric(inst).matrix
        D = inst.D
        lo = D / math.sqrt(rank(inst.algebra))
        worst = max(worst, float(np.max(S - D)), float(np.max(lo - S)))
        count += 1
    trees_exact = all(
        np.array_equal(cat0_metric(inst).matrix, inst.D)
        for inst in (
            MetricMedianAlgebraInstance(T, wall_metric(T, np.arange(1, len(enumerate_walls(T)) + 1, dtype=float)))
            for T in (tree_algebra(n, n) for n in (2, 5, 17, 32))
        )
    )
    cube_err = max(
        abs(cat0_metric(MetricMedianAlgebraInstance(MajorityAlgebra(n), wall_metric(MajorityAlgebra(n), np.ones(n)))).d((0,) * n, (1,) * n) - math.sqrt(n))
        for n in range(1, 5)
    )
    q_checked, q_fail = 0, 0
    for inst in _sigma_instances()[:6] + _sigma_instances()[16:18]:
        M = inst.algebra
        for x, y in itertools.combinations(M.elements, 2):
            if len(naive_interval(M, x, y)) > 16:
                continue
            cubes = diagonal_cubes(M, x, y)
            top = max(k for k, _ in cubes)
            tops = [S for k, S in cubes if k == top]
            Q = maximal_diagonal_cube(inst, x, y)
            q_checked += 1
            q_fail += not (len(tops) == 1 and tops[0] == set(Q.vertices) and top == Q.dim)
    ok = worst <= 1e-9 and trees_exact and cube_err <= 1e-9 and q_fail == 0
    record(
        6,
        ok,
        f"{count} instances, max sandwich excess {worst:.1e}; trees exact={trees_exact}; "
        f"cube diagonal error {cube_err:.1e}; Q oracle {q_checked - q_fail}/{q_checked}",
    )


def test_criterion_07_rotation_gap():
    gaps = [euclidean_rotation_gap(k, math.pi / 4) for k in range(1, 101)]
    err = max(abs(g - k / math.sqrt(2)) for k, g in zip(range(1, 101), gaps))
    monotone = all(b > a for a, b in zip(gaps, gaps[1:]))
    A, Ai = rotation(math.pi / 4), rotation(-math.pi / 4)

    def conj(x, y, z):
        return Ai(l1_median(A(x), A(y), A(z)))

    sups = []
    for r in (10, 25, 50, 100):
        pts = disk_points(r)
        sups.append(closeness_distance(conj, l1_median, pts, euclidean_model(pts).dist, "sampled", 10_000, 0).sup_observed)
    grows = all(b > a for a, b in zip(sups, sups[1:])) and sups[-1] >= 70
    record(
        7,
        err <= 1e-9 and monotone and grows,
        f"max |gap - k/sqrt2| = {err:.1e} for k=1..100, strictly increasing={monotone}; "
        f"disk closeness {', '.join(f'{s:.1f}' for s in sups)} at r=10,25,50,100",
    )


def test_criterion_08_approximation_pipeline():
    rng = np.random.default_rng(8)
    lattice = l1_lattice_model(3, 8)
    lat_bad = 0
    for _ in range(100):
        A = [tuple(int(v) for v in rng.integers(0, 8, 3)) for _ in range(int(rng.integers(1, 6)))]
        rep = approximate(A, lattice, lattice_resolver)
        lat_bad += not ((rep.alpha, rep.epsilon) == (1.0, 0.0) and rep.covered and set(A) <= set(rep.f))
    tree_bad = 0
    for s in range(50):
        n = int(rng.integers(2, 65))
        model = graph_model(random_tree(n, 800 + s))
        A = [int(v) for v in rng.choice(n, size=int(rng.integers(1, min(n, 6) + 1)), replace=False)]
        rep = approximate(A, model, tree_resolver)
        tree_bad += not ((rep.alpha, rep.epsilon) == (1.0, 0.0) and rep.covered)
    uni_bad, apriori_bad, worst_alpha, runs = 0, 0, 1.0, 0
    for s in range(40):
        n = int(rng.integers(3, 41))
        model = graph_model(random_unicyclic(n, 900 + s))
        A = [int(v) for v in rng.choice(n, size=int(rng.integers(1, min(n, 6) + 1)), replace=False)]
        rep = approximate(A, model, tree_resolver, exactify_output=True)  # raises on an a-priori violation
        geo = geodesic_bound_check(rep, samples=100, seed=s)
        finite = all(math.isfinite(v) for v in (rep.alpha, rep.epsilon, rep.beta, rep.gamma))
        uni_bad += not (finite and rep.covered and all(rep.f[rep.pi[a]] == a for a in A))
        apriori_bad += geo["apriori"]
        worst_alpha = max(worst_alpha, rep.alpha)
        runs += 1
    record(
        8,
        lat_bad == 0 and tree_bad == 0 and uni_bad == 0 and apriori_bad == 0,
        f"lattice 100 runs ({lat_bad} off (1,0)), trees 50 runs ({tree_bad} off (1,0)), "
        f"unicyclic {runs} runs ({uni_bad} not finite/covered, {apriori_bad} a-priori violations, max alpha {worst_alpha:.3g})",
    )


def test_criterion_09_hyperbolic_medians():
    mismatch, tie_gap = 0, 0.0
    for s in range(31):
        n = 2 + s
        G = random_tree(n, 300 + s)
        g = graph_model(G)
        T = TreeMedianAlgebra(list(g.vertices), list(G.edges))
        ref = T.table()  # same vertex order
        mismatch += int(np.count_nonzero(g.centers != ref)) + (g.K != 0.0)
        r = graph_model(G, tie="revlex")
        tie_gap = max(tie_gap, closeness_distance(g.med, r.med, g.points, g.dist).sup_observed)
    kprime = []
    for s in range(20):
        G = random_unicyclic(int(6 + s), 400 + s)
        a, b = graph_model(G), graph_model(G, tie="revlex")
        kprime.append(closeness_distance(a.med, b.med, a.points, a.dist).sup_observed)
    ok = mismatch == 0 and tie_gap == 0.0 and all(math.isfinite(k) for k in kprime)
    record(
        9,
        ok,
        f"31 trees (2..32 vertices): {mismatch} median mismatches, tie closeness {tie_gap}; "
        f"unicyclic K' max {max(kprime)} over 20 graphs",
    )


CLI_DOCS = {
    "cube.json": {"kind": "majority", "dim": 3},
    "square.json": {"algebra": {"kind": "majority", "dim": 2}},
    "weighted.json": {"algebra": {"kind": "grid", "size": [2, 3]}, "lengths": [1.5, 2, 0.5]},
    "closure.json": {"algebra": {"kind": "majority", "dim": 3}, "subset": [[0, 0, 0], [1, 1, 0], [0, 1, 1]]},
    "graph.json": {"vertices": list(range(7)), "edges": [[i, (i + 1) % 7] for i in range(7)] + [[0, 3]]},
    "qi.json": {
        "X": {"kind": "graph", "vertices": list(range(8)), "edges": [[i, i + 1] for i in range(7)]},
        "Y": {"kind": "graph", "vertices": list(range(4)), "edges": [[i, i + 1] for i in range(3)]},
        "forward": [[i, i // 2] for i in range(8)],
        "backward": [[j, 2 * j] for j in range(4)],
    },
    "lattice.json": {"model": {"kind": "l1_lattice", "dim": 3, "box": 8}, "A": [[0, 0, 0], [7, 2, 5], [3, 6, 1], [1, 1, 7]]},
    "uni.json": {
        "model": {"kind": "graph", "vertices": list(range(9)), "edges": [[0, 1], [1, 2], [2, 3], [3, 0], [3, 4], [4, 5], [5, 6], [2, 7], [7, 8]]},
        "A": [0, 5, 8, 6],
        "resolver": "tree",
        "exactify": True,
    },
}

CLI_RUNS = [
    ["validate", "cube.json"],
    ["validate", "square.json", "--mode", "sampled", "--samples", "500"],
    ["closure", "closure.json"],
    ["walls", "cube.json"],
    ["cubify", "cube.json"],
    ["metric", "weighted.json"],
    ["rectify", "weighted.json", "--format", "csv"],
    ["cat0", "weighted.json"],
    ["hypmedian", "graph.json", "--mode", "sampled", "--samples", "300"],
    ["hypmedian", "graph.json", "--format", "csv"],
    ["gap", None, "--angle", "pi/4", "--k", "1:20"],
    ["push", "qi.json", "--mode", "sampled", "--samples", "400"],
    ["pull", "qi.json"],
    ["approx", "lattice.json"],
    ["approx", "uni.json", "--samples", "200"],
]


def _cli(tmp, argv, hashseed, pure):
    cmd, doc, *rest = argv
    args = [sys.executable, "-m", "coarsemedian.cli", cmd, "--seed", "17"] + rest
    if doc:
        args += ["--input", str(tmp / doc)]
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed), COARSEMEDIAN_PURE="1" if pure else "0")
    res = subprocess.run(args, capture_output=True, env=env)
    return res.returncode, res.stdout


def test_criterion_10_determinism(tmp_path):
    for name, doc in CLI_DOCS.items():
        (tmp_path / name).write_text(json.dumps(doc))
    differing, failed = [], []
    for argv in CLI_RUNS:
        outs = [_cli(tmp_path, argv, h, pure) for h, pure in ((1, False), (2, False), (3, True))]
        if any(code != 0 for code, _ in outs):
            failed.append(argv[0])
        if len({o for _, o in outs}) != 1:
            differing.append(argv[0])
    record(
        10,
        not differing and not failed,
        f"{len(CLI_RUNS)} CLI runs x 3 (two hash seeds, both kernel backends): "
        f"{len(differing)} differing, {len(failed)} failing",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
