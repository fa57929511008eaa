import sys

import networkx as nx
import numpy as np
import pytest


def random_tree(n, seed):
    if n == 1:
        G = nx.Graph()
        G.add_node(0)
        return G
    return nx.random_labeled_tree(n, seed=seed)


def random_unicyclic(n, seed):
    """Random tree on n >= 3 vertices plus one extra edge."""
    rng = np.random.default_rng(seed)
    G = random_tree(n, seed)
    missing = [(u, v) for u in range(n) for v in range(u + 1, n) if not G.has_edge(u, v)]
    G.add_edge(*missing[int(rng.integers(len(missing)))])
    return G


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[n])
