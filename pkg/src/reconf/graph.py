"""Undirected graph machinery: connectivity, trees, cycle bases and cycles.

Edges carry dense integer identifiers ``0..m-1`` and edge sets are plain
``frozenset`` objects of those identifiers, so symmetric difference (``^``),
union (``|``) and cardinality (``len``) come for free.  Internally the
cycle-space routines work on ``int`` bitmasks for speed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .errors import CycleSpaceTooLarge, GraphError, NotConnected, TooManyTrees

EdgeSet = frozenset

DEFAULT_MAX_BETA = 20
DEFAULT_MAX_TREES = 10**6


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over vertices ``0..vertex_count-1``.

    ``edges[i]`` holds the endpoint pair of the edge with identifier ``i``.
    Self-loops and parallel edges are rejected.
    """

    vertex_count: int
    edges: tuple

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.vertex_count < 0:
            raise GraphError("negative vertex count")
        seen = set()
        for eid, (u, v) in enumerate(edges):
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"edge {eid} references unknown vertex")
            if u == v:
                raise GraphError(f"edge {eid} is a self-loop")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"edge {eid} is parallel to an earlier edge")
            seen.add(key)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def all_edges(self) -> frozenset:
        return frozenset(range(len(self.edges)))

    @cached_property
    def incidence(self) -> tuple:
        """Per-vertex tuple of ``(edge_id, neighbour)`` sorted by edge id."""
        inc = [[] for _ in range(self.vertex_count)]
        for eid, (u, v) in enumerate(self.edges):
            inc[u].append((eid, v))
            inc[v].append((eid, u))
        return tuple(tuple(x) for x in inc)

    def cyclomatic_number(self) -> int:
        """``|E| - |V| + c``; equals ``|E| - |V| + 1`` for connected graphs."""
        return len(self.edges) - self.vertex_count + _component_count(self, self.all_edges)

    def without(self, removed: Iterable[int]) -> frozenset:
        return self.all_edges - frozenset(removed)


@dataclass(frozen=True)
class Cycle:
    edges: frozenset

    def __len__(self):
        return len(self.edges)

    def sorted_edges(self) -> tuple:
        return tuple(sorted(self.edges))


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycle basis; ``chord_of[k]`` is the chord defining ``cycles[k]``."""

    cycles: tuple
    chord_of: tuple = field(default=())

    def __len__(self):
        return len(self.cycles)


def _check_subset(g: Graph, active) -> frozenset:
    active = g.all_edges if active is None else frozenset(active)
    bad = [e for e in active if not (0 <= e < len(g.edges))]
    if bad:
        raise GraphError(f"unknown edge ids {sorted(bad)}")
    return active


def _component_count(g: Graph, active: frozenset) -> int:
    parent = list(range(g.vertex_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = g.vertex_count
    for e in active:
        u, v = g.edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def is_connected(g: Graph, active=None) -> bool:
    """True iff the spanning subgraph ``(V, active)`` has a single component."""
    active = _check_subset(g, active)
    if g.vertex_count <= 1:
        return True
    seen = [False] * g.vertex_count
    seen[0] = True
    queue = deque([0])
    reached = 1
    while queue:
        u = queue.popleft()
        for eid, w in g.incidence[u]:
            if eid in active and not seen[w]:
                seen[w] = True
                reached += 1
                queue.append(w)
    return reached == g.vertex_count


def is_acyclic(g: Graph, active=None) -> bool:
    """True iff ``(V, active)`` is a forest (union-find cycle detection)."""
    active = _check_subset(g, active)
    parent = list(range(g.vertex_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in sorted(active):
        u, v = g.edges[e]
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def is_tree(g: Graph, active=None) -> bool:
    """Spanning-tree test via connectivity and edge count."""
    active = _check_subset(g, active)
    return len(active) == g.vertex_count - 1 and is_connected(g, active)


def is_tree_by_acyclicity(g: Graph, active=None) -> bool:
    """Spanning-tree test via acyclicity and edge count.

    Must agree with :func:`is_tree` on every input; both characterizations
    are kept so the equivalence can be checked.
    """
    active = _check_subset(g, active)
    return len(active) == g.vertex_count - 1 and is_acyclic(g, active)


def _bfs_tree(g: Graph):
    """BFS from vertex 0. Returns (tree edge set, parent edge per vertex, depth)."""
    n = g.vertex_count
    parent_edge = [-1] * n
    depth = [-1] * n
    tree = set()
    if n == 0:
        return frozenset(), parent_edge, depth
    depth[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for eid, w in g.incidence[u]:
            if depth[w] < 0:
                depth[w] = depth[u] + 1
                parent_edge[w] = eid
                tree.add(eid)
                queue.append(w)
    if any(d < 0 for d in depth):
        raise NotConnected("graph is not connected")
    return frozenset(tree), parent_edge, depth


def spanning_tree(g: Graph):
    """Breadth-first spanning tree rooted at vertex 0.

    Returns
    -------
    tree, chords : frozenset
        Tree edges and the remaining (chord) edges.

    Raises
    ------
    NotConnected
        If ``g`` is disconnected.
    """
    tree, _, _ = _bfs_tree(g)
    return tree, g.all_edges - tree


def fundamental_cycle_basis(g: Graph) -> CycleBasis:
    """Fundamental cycles of the BFS spanning tree, one per chord.

    Each cycle is the chord plus the tree path between its endpoints.  The
    basis depends on the vertex numbering, but the union of its edges does
    not.
    """
    tree, parent_edge, depth = _bfs_tree(g)
    cycles = []
    chords = []
    for c in sorted(g.all_edges - tree):
        u, v = g.edges[c]
        path = {c}
        while u != v:
            # climb from the deeper endpoint towards the common ancestor
            if depth[u] < depth[v]:
                u, v = v, u
            e = parent_edge[u]
            path.add(e)
            a, b = g.edges[e]
            u = b if a == u else a
        cycles.append(Cycle(frozenset(path)))
        chords.append(c)
    return CycleBasis(tuple(cycles), tuple(chords))


def cycle_edges(basis: CycleBasis) -> frozenset:
    """Union of the basis cycles' edges, i.e. every edge lying on some cycle."""
    out = frozenset()
    for c in basis.cycles:
        out |= c.edges
    return out


def bridges(g: Graph) -> frozenset:
    return g.all_edges - cycle_edges(fundamental_cycle_basis(g))


def _to_mask(edges: Iterable[int]) -> int:
    m = 0
    for e in edges:
        m |= 1 << e
    return m


def _from_mask(mask: int) -> frozenset:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def _even_mask_is_cycle(g: Graph, mask: int) -> bool:
    # Only valid for even-degree edge sets (cycle-space elements): such a set is
    # a simple cycle iff it is connected and touches as many vertices as edges.
    ends = g.edges
    adj = {}
    m = mask
    n_edges = 0
    while m:
        low = m & -m
        e = low.bit_length() - 1
        m ^= low
        n_edges += 1
        u, v = ends[e]
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if len(adj) != n_edges:
        return False
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n_edges


def is_cycle(g: Graph, edges) -> bool:
    """True iff ``edges`` induce a connected subgraph with every degree equal to 2."""
    edges = _check_subset(g, edges)
    if not edges:
        return False
    deg = {}
    for e in edges:
        for x in g.edges[e]:
            deg[x] = deg.get(x, 0) + 1
    if any(d != 2 for d in deg.values()):
        return False
    return _even_mask_is_cycle(g, _to_mask(edges))


def _cycle_sort_key(c: Cycle):
    return (len(c.edges), c.sorted_edges())


def enumerate_all_cycles(g: Graph, max_beta: int = DEFAULT_MAX_BETA) -> list:
    """All simple cycles of a connected graph, each reported once.

    Walks the ``2**beta - 1`` nonzero elements of the cycle space generated by
    the fundamental basis in Gray-code order (one XOR per step) and keeps those
    that are simple cycles.  Output is sorted by length, then by edge ids.

    Raises
    ------
    CycleSpaceTooLarge
        If the cyclomatic number exceeds ``max_beta``.
    NotConnected
        If ``g`` is disconnected.
    """
    basis = fundamental_cycle_basis(g)
    beta = len(basis)
    if beta > max_beta:
        raise CycleSpaceTooLarge(f"cyclomatic number {beta} exceeds cap {max_beta}")
    masks = [_to_mask(c.edges) for c in basis.cycles]
    found = []
    current = 0
    for k in range(1, 1 << beta):
        # Gray code: step k flips the basis element at the lowest set bit of k
        current ^= masks[(k & -k).bit_length() - 1]
        if _even_mask_is_cycle(g, current):
            found.append(Cycle(_from_mask(current)))
    found.sort(key=_cycle_sort_key)
    return found


def count_spanning_trees(g: Graph) -> int:
    """Kirchhoff's matrix-tree count (rounded determinant of a reduced Laplacian)."""
    n = g.vertex_count
    if n <= 1:
        return 1
    lap = np.zeros((n, n))
    for u, v in g.edges:
        lap[u, u] += 1
        lap[v, v] += 1
        lap[u, v] -= 1
        lap[v, u] -= 1
    sign, logdet = np.linalg.slogdet(lap[1:, 1:])
    if sign <= 0:
        return 0
    return int(round(np.exp(logdet)))


def enumerate_spanning_trees(g: Graph, max_trees: int = DEFAULT_MAX_TREES) -> list:
    """Every spanning tree exactly once, as edge sets.

    Candidates are the complements of ``beta``-edge subsets, filtered through
    :func:`is_tree`.
    """
    if not is_connected(g):
        raise NotConnected("graph is not connected")
    count = count_spanning_trees(g)
    if count > max_trees:
        raise TooManyTrees(f"{count} spanning trees exceed cap {max_trees}")
    beta = len(g.edges) - g.vertex_count + 1
    everything = g.all_edges
    trees = []
    for removed in combinations(range(len(g.edges)), beta):
        keep = everything.difference(removed)
        if is_tree(g, keep):
            trees.append(keep)
    return trees


def to_dot(g: Graph, highlight=None, name: str = "N", labels: Optional[dict] = None,
           dashed=None) -> str:
    """Graphviz DOT text for ``g``.

    Edges in ``highlight`` are drawn bold gray, edges in ``dashed`` dashed
    (e.g. open switches).  ``labels`` maps vertex index to a display label.
    """
    highlight = frozenset(highlight or ())
    dashed = frozenset(dashed or ())
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in range(g.vertex_count):
        label = labels.get(v, str(v)) if labels else str(v)
        lines.append(f'  {v} [label="{label}"];')
    for eid, (u, v) in enumerate(g.edges):
        attrs = [f'label="{eid}"']
        if eid in highlight:
            attrs.append('color="gray"')
            attrs.append("penwidth=3")
        if eid in dashed:
            attrs.append("style=dashed")
        lines.append(f"  {u} -- {v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
