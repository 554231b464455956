import random
from itertools import combinations
from pathlib import Path

import pytest

from reconf.graph import Graph
from reconf.network import FIXTURES, load_network

DATA = Path(__file__).parent / "data"
ALL_FIXTURES = FIXTURES + ("treefix.json",)


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def triangle():
    return Graph(3, ((0, 1), (1, 2), (0, 2)))


def k4():
    return Graph(4, tuple(combinations(range(4), 2)))


def theta_graph():
    # vertices 0 and 1 joined by three internally disjoint paths
    return Graph(5, ((0, 1), (0, 2), (2, 1), (0, 3), (3, 4), (4, 1)))


def two_triangles_with_bridge():
    return Graph(6, ((0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)))


def random_connected_graph(rng: random.Random, n: int, extra: int) -> Graph:
    """Random spanning tree plus up to ``extra`` further edges, randomly relabelled."""
    perm = list(range(n))
    rng.shuffle(perm)
    edges = set()
    for i in range(1, n):
        u, v = perm[i], perm[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    candidates = [e for e in combinations(range(n), 2) if e not in edges]
    rng.shuffle(candidates)
    edges.update(candidates[:extra])
    edges = sorted(edges)
    rng.shuffle(edges)
    return Graph(n, tuple(edges))


def random_graphs(seed, count, max_n, max_extra):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(2, max_n)
        out.append(random_connected_graph(rng, n, rng.randint(0, max_extra)))
    return out


@pytest.fixture(params=ALL_FIXTURES)
def fixture_network(request):
    return load_network(request.param)


@pytest.fixture
def ring6():
    return load_network("ring6.json")


@pytest.fixture
def tri3():
    return load_network("tri3.json")


@pytest.fixture
def twocycle8():
    return load_network("twocycle8.json")


@pytest.fixture
def twobus():
    return load_network(DATA / "twobus.json")
