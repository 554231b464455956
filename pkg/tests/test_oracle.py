from functools import reduce
from itertools import combinations

import pytest

from conftest import k4, path_graph, triangle
from reconf.errors import TooLarge
from reconf.graph import Graph, fundamental_cycle_basis, is_cycle
from reconf.network import Topology, load_network
from reconf.oracle import brute_force_cycles, exhaustive_optimum, spanning_tree_subsets


def test_triangle_one_cycle():
    assert len(brute_force_cycles(triangle())) == 1


def test_tree_no_cycles():
    assert brute_force_cycles(path_graph(6)) == []


def test_k4_seven_cycles():
    g = k4()
    cycles = brute_force_cycles(g)
    assert len(cycles) == 7
    # cross-check with the cycle-space combinations of a basis
    basis = fundamental_cycle_basis(g)
    combos = {reduce(lambda a, b: a ^ b, (c.edges for c in s))
              for r in range(1, 4) for s in combinations(basis.cycles, r)}
    assert {c.edges for c in cycles} == {s for s in combos if is_cycle(g, s)}


def test_too_large():
    g = Graph(10, tuple(combinations(range(10), 2))[:25])
    with pytest.raises(TooLarge):
        brute_force_cycles(g)


def test_tree_network_single_topology():
    n = load_network("treefix.json")
    res = exhaustive_optimum(n)
    assert res.tree_count == 1 and res.optimum_topology == Topology()


def test_tri3_three_trees(tri3):
    res = exhaustive_optimum(tri3)
    assert res.tree_count == 3 == res.subset_count
    assert res.cycle_count == 1
    assert len(res.optimum_topology.closed) == 2


def test_subsets_exceed_trees_with_bridge(twocycle8):
    res = exhaustive_optimum(twocycle8)
    assert res.tree_count == 16
    assert res.subset_count - res.tree_count > 0


def test_k4_subset_filter():
    trees, subsets = spanning_tree_subsets(k4())
    assert len(trees) == 16 and subsets == 20
