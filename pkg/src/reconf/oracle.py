"""Brute-force reference computations used to check the fast paths.

Nothing here reuses the cycle-space or search code: cycles come from raw edge
subsets and spanning trees from raw ``|V|-1``-edge subsets with a private
union-find.  Only the power flow itself is shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

from .errors import AllInfeasible, PowerFlowError, TooLarge, TooManyTrees
from .graph import Cycle, Graph
from .network import Network, Topology
from .powerflow import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_power_flow

MAX_CYCLE_EDGES = 24
MAX_TREES = 10**6
TIE_TOL = 1e-10


@dataclass(frozen=True)
class OracleResult:
    optimum_f: float
    optimum_topology: Topology
    tree_count: int
    subset_count: int
    cycle_count: Optional[int]


def brute_force_cycles(g: Graph) -> list:
    """Every edge subset that is connected with all degrees exactly 2."""
    m = len(g.edges)
    if m > MAX_CYCLE_EDGES:
        raise TooLarge(f"{m} edges exceed the brute-force cap of {MAX_CYCLE_EDGES}")
    inc = [0] * g.vertex_count
    for e, (u, v) in enumerate(g.edges):
        inc[u] |= 1 << e
        inc[v] |= 1 << e
    out = []
    for mask in range(1, 1 << m):
        touched = []
        ok = True
        for v in range(g.vertex_count):
            d = (mask & inc[v]).bit_count()
            if d == 2:
                touched.append(v)
            elif d:
                ok = False
                break
        if not ok:
            continue
        # connectivity of the touched vertices along edges in ``mask``
        seen = {touched[0]}
        stack = [touched[0]]
        while stack:
            x = stack.pop()
            rest = mask & inc[x]
            while rest:
                low = rest & -rest
                rest ^= low
                a, b = g.edges[low.bit_length() - 1]
                y = b if a == x else a
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) == len(touched):
            out.append(Cycle(frozenset(e for e in range(m) if mask >> e & 1)))
    out.sort(key=lambda c: (len(c.edges), tuple(sorted(c.edges))))
    return out


def _spans(n_vertices: int, edges) -> bool:
    parent = list(range(n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged = 0
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
        merged += 1
    return merged == n_vertices - 1


def spanning_tree_subsets(g: Graph, max_trees: int = MAX_TREES) -> tuple:
    """All spanning trees by filtering ``|V|-1``-edge subsets.

    Returns ``(trees, subset_count)``.
    """
    k = g.vertex_count - 1
    m = len(g.edges)
    subset_count = comb(m, k)
    if subset_count > 50 * max_trees:
        raise TooManyTrees(f"{subset_count} candidate subsets are too many to filter")
    trees = []
    for subset in combinations(range(m), k):
        if _spans(g.vertex_count, (g.edges[e] for e in subset)):
            trees.append(frozenset(subset))
            if len(trees) > max_trees:
                raise TooManyTrees(f"more than {max_trees} spanning trees")
    return trees, subset_count


def exhaustive_optimum(n: Network, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER) -> OracleResult:
    """Minimum-injection spanning tree by evaluating every tree's power flow.

    Trees that would open a non-switchable line are skipped.  Ties within
    ``TIE_TOL`` go to the lexicographically smallest sorted closed-line tuple.
    """
    g = n.graph()
    fixed = frozenset(l.id for l in n.lines if not l.switchable)
    switchable = frozenset(l.id for l in n.lines if l.switchable)
    trees, subset_count = spanning_tree_subsets(g)
    evaluated = []
    for tree in trees:
        if not fixed <= tree:
            continue
        topo = Topology(tree & switchable)
        try:
            sol = solve_power_flow(n, topo, tol=tol, max_iter=max_iter)
        except PowerFlowError:
            continue
        evaluated.append((sol.f_obj, tuple(sorted(topo.closed)), topo))
    if not evaluated:
        raise AllInfeasible("no spanning tree has a converged power flow")
    f_min = min(f for f, _, _ in evaluated)
    f_best, _, topo_best = min((e for e in evaluated if e[0] <= f_min + TIE_TOL),
                               key=lambda e: e[1])
    cycle_count = len(brute_force_cycles(g)) if len(g.edges) <= 20 else None
    return OracleResult(
        optimum_f=f_best,
        optimum_topology=topo_best,
        tree_count=len(trees),
        subset_count=subset_count,
        cycle_count=cycle_count,
    )
