"""Loss-minimal radial reconfiguration by exact branch-and-bound.

Two radiality formulations are supported:

``CDSR``
    one acyclicity constraint per cycle of the network graph (at least one
    edge of every cycle open) plus the edge-count constraint.  Every full
    assignment that survives propagation is a spanning tree.
``RRDSR``
    the edge-count constraint only.  Leaves may be disconnected and are then
    rejected by a connectivity check before any power flow is attempted.

With a single slack bus a fixed topology yields a square power-flow system
with a unique solution, so the search runs over switch states only and each
leaf is evaluated exactly by Newton's method.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import AllInfeasible, PowerFlowError
from .graph import (
    DEFAULT_MAX_BETA,
    Graph,
    cycle_edges,
    enumerate_all_cycles,
    fundamental_cycle_basis,
    is_connected,
    is_tree,
)
from .network import Network, Topology, baseline_topology, to_graph
from .powerflow import DEFAULT_MAX_ITER, DEFAULT_TOL, PfSolution, solve_power_flow

log = logging.getLogger(__name__)

OPEN = 0
CLOSED = 1
FREE = None

# objective values closer than this are treated as ties
TIE_TOL = 1e-10
DEFAULT_TIME_LIMIT = 900.0


class ModelKind(enum.Enum):
    CDSR = "cdsr"
    RRDSR = "rrdsr"

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        try:
            return cls(text.strip().lower().replace("-", ""))
        except ValueError:
            raise ValueError(f"unknown model '{text}' (expected cdsr or rrdsr)") from None

    @property
    def label(self) -> str:
        return {"cdsr": "C-DSR", "rrdsr": "RR-DSR"}[self.value]


@dataclass(frozen=True)
class ProblemInstance:
    network: Network
    kind: ModelKind
    graph: Graph
    switchable: tuple  # sorted line ids the search may open
    all_cycles: tuple  # frozensets of line ids; empty for RRDSR
    fixed_closed: frozenset  # lines that are always energized
    required_closed_count: int  # closed lines demanded among ``switchable``

    @property
    def cycle_edge_set(self) -> frozenset:
        return frozenset(self.switchable)


def build_instance(n: Network, kind: ModelKind, max_beta: int = DEFAULT_MAX_BETA) -> ProblemInstance:
    """Reduce the switchable set to cycle-edges and assemble the constraints.

    Only cycle-edges can ever open in a spanning tree, so bridges are fixed
    closed.  The cycle-edge set comes from a fundamental basis; the full cycle
    list is enumerated only for ``CDSR``.  Lines the data marks as
    non-switchable stay closed as well.
    """
    g = n.graph()
    basis = fundamental_cycle_basis(g)
    ces = cycle_edges(basis)
    switchable = tuple(sorted(ces & n.switchable))
    fixed = g.all_edges - frozenset(switchable)
    cycles = ()
    if kind is ModelKind.CDSR:
        cycles = tuple(c.edges for c in enumerate_all_cycles(g, max_beta=max_beta))
    # |E| - |E_S| + sum(z) = |V| - 1
    required = g.vertex_count - 1 - (len(g.edges) - len(switchable))
    return ProblemInstance(
        network=n,
        kind=kind,
        graph=g,
        switchable=switchable,
        all_cycles=cycles,
        fixed_closed=fixed,
        required_closed_count=required,
    )


class _Constraints:
    """Index-based view of an instance for fast propagation."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.ids = inst.switchable
        self.pos = {e: i for i, e in enumerate(self.ids)}
        self.target = inst.required_closed_count
        self.cycles = []
        for c in inst.all_cycles:
            members = tuple(sorted(self.pos[e] for e in c if e in self.pos))
            fixed = sum(1 for e in c if e not in self.pos)
            self.cycles.append((members, len(c) - 1 - fixed))

    def propagate(self, vals: list) -> bool:
        """Tighten ``vals`` in place to a fixpoint. Returns False on conflict."""
        changed = True
        while changed:
            changed = False
            for members, cap in self.cycles:
                closed = 0
                free = []
                for i in members:
                    v = vals[i]
                    if v == CLOSED:
                        closed += 1
                    elif v is FREE:
                        free.append(i)
                if closed > cap:
                    return False
                if closed == cap and free:
                    for i in free:
                        vals[i] = OPEN
                    changed = True
            closed = sum(1 for v in vals if v == CLOSED)
            free = [i for i, v in enumerate(vals) if v is FREE]
            if closed > self.target or closed + len(free) < self.target:
                return False
            if free and closed == self.target:
                for i in free:
                    vals[i] = OPEN
                changed = True
            elif free and closed + len(free) == self.target:
                for i in free:
                    vals[i] = CLOSED
                changed = True
        return True

    def branch_index(self, vals: list) -> int:
        best = None
        for members, _ in self.cycles:
            free = [i for i in members if vals[i] is FREE]
            if free and (best is None or len(free) < best[0]):
                best = (len(free), free[0])
        if best is not None:
            return best[1]
        return next(i for i, v in enumerate(vals) if v is FREE)


def propagate(inst: ProblemInstance, partial: dict) -> Optional[dict]:
    """Unit propagation of the acyclicity and count constraints.

    Parameters
    ----------
    partial : dict
        Maps switchable line ids to ``OPEN`` or ``CLOSED``; missing ids are free.

    Returns
    -------
    dict or None
        Fixpoint assignment over every switchable line (``FREE`` where still
        undecided), or ``None`` when some constraint cannot be satisfied.
    """
    cons = _Constraints(inst)
    vals = [FREE] * len(cons.ids)
    for e, v in partial.items():
        if e not in cons.pos:
            raise KeyError(f"line {e} is not switchable in this instance")
        if v not in (OPEN, CLOSED):
            raise ValueError(f"bad switch state {v!r} for line {e}")
        vals[cons.pos[e]] = int(v)
    if not cons.propagate(vals):
        return None
    return {e: vals[i] for i, e in enumerate(cons.ids)}


@dataclass
class SearchStats:
    nodes_explored: int = 0
    leaves_evaluated: int = 0
    pf_solves: int = 0
    pruned_by_bound: int = 0
    pruned_by_propagation: int = 0
    disconnected_leaves: int = 0
    infeasible_leaves: int = 0
    wall_time: float = 0.0
    incumbent_history: list = field(default_factory=list)


@dataclass
class SolveResult:
    kind: ModelKind
    best: Topology
    solution: PfSolution
    f_obj: float
    p_loss: float
    delta_loss_pct: float
    gamma_v_max: float
    gamma_s_max: float
    stats: SearchStats
    proven_optimal: bool
    baseline_loss: Optional[float] = None
    base_mva: float = 1.0

    def to_dict(self) -> dict:
        return {
            "model": self.kind.value,
            "closed": sorted(self.best.closed),
            "f_obj": self.f_obj,
            "p_loss": self.p_loss,
            "delta_loss_pct": self.delta_loss_pct,
            "gamma_v_max": self.gamma_v_max,
            "gamma_s_max": self.gamma_s_max,
            "proven_optimal": self.proven_optimal,
            "baseline_loss": self.baseline_loss,
            "stats": {
                "nodes_explored": self.stats.nodes_explored,
                "leaves_evaluated": self.stats.leaves_evaluated,
                "pf_solves": self.stats.pf_solves,
                "pruned_by_bound": self.stats.pruned_by_bound,
                "pruned_by_propagation": self.stats.pruned_by_propagation,
                "disconnected_leaves": self.stats.disconnected_leaves,
                "infeasible_leaves": self.stats.infeasible_leaves,
                "wall_time": self.stats.wall_time,
                "incumbent_history": [list(h) for h in self.stats.incumbent_history],
            },
            "solution": self.solution.to_dict(),
        }


def loss_reduction_pct(baseline_loss: Optional[float], loss: float) -> float:
    """Relative loss reduction in percent; 0 without positive baseline losses."""
    if baseline_loss is None or baseline_loss <= 0:
        return 0.0
    return 100.0 * (baseline_loss - loss) / baseline_loss


def _is_better(f, key, best_f, best_key) -> bool:
    if best_f is None or f < best_f - TIE_TOL:
        return True
    return abs(f - best_f) <= TIE_TOL and key < best_key


class _Search:
    def __init__(self, inst, time_limit, tol, max_iter):
        self.inst = inst
        self.cons = _Constraints(inst)
        self.net = inst.network
        # switchable-by-data lines that the instance keeps energized
        self.always_closed = inst.fixed_closed & self.net.switchable
        self.lower_bound = self.net.total_load()[0]
        self.time_limit = time_limit
        self.tol = tol
        self.max_iter = max_iter
        self.stats = SearchStats()
        self.best = None  # (f, key, topology, solution)
        self.cache = {}
        self.timed_out = False
        self.t0 = 0.0

    def topology(self, vals) -> Topology:
        closed = {e for e, v in zip(self.cons.ids, vals) if v == CLOSED}
        return Topology(frozenset(closed) | self.always_closed)

    def evaluate(self, topo: Topology):
        key = topo.key()
        if key in self.cache:
            return self.cache[key]
        self.stats.pf_solves += 1
        try:
            sol = solve_power_flow(self.net, topo, tol=self.tol, max_iter=self.max_iter)
        except PowerFlowError as exc:
            log.debug("power flow failed for %s: %s", key, exc)
            sol = None
        self.cache[key] = sol
        return sol

    def offer(self, topo: Topology, sol: PfSolution):
        key = topo.key()
        if self.best is None or _is_better(sol.f_obj, key, self.best[0], self.best[1]):
            self.best = (sol.f_obj, key, topo, sol)
            self.stats.incumbent_history.append((time.perf_counter() - self.t0, sol.f_obj))

    def can_prune(self, vals) -> bool:
        if self.best is None:
            return False
        best_f, best_key = self.best[0], self.best[1]
        if self.lower_bound > best_f + TIE_TOL:
            return True
        if self.lower_bound < best_f - TIE_TOL:
            return False
        # Only ties are still possible: prune unless some completion could win
        # the tie-break, i.e. have a lexicographically smaller closed set.
        closed = [e for e, v in zip(self.cons.ids, vals) if v == CLOSED]
        free = [e for e, v in zip(self.cons.ids, vals) if v is FREE]
        need = self.cons.target - len(closed)
        smallest = tuple(sorted(set(closed) | set(free[:need]) | self.always_closed))
        return smallest >= best_key

    def leaf(self, vals):
        self.stats.leaves_evaluated += 1
        topo = self.topology(vals)
        g, active = to_graph(self.net, topo)
        if self.inst.kind is ModelKind.RRDSR and not is_connected(g, active):
            self.stats.disconnected_leaves += 1
            return
        sol = self.evaluate(topo)
        if sol is None:
            self.stats.infeasible_leaves += 1
            return
        self.offer(topo, sol)

    def dfs(self, vals):
        if self.timed_out:
            return
        if time.perf_counter() - self.t0 > self.time_limit:
            self.timed_out = True
            return
        self.stats.nodes_explored += 1
        if not self.cons.propagate(vals):
            self.stats.pruned_by_propagation += 1
            return
        if self.can_prune(vals):
            self.stats.pruned_by_bound += 1
            return
        if all(v is not FREE for v in vals):
            self.leaf(vals)
            return
        i = self.cons.branch_index(vals)
        for choice in (CLOSED, OPEN):
            child = list(vals)
            child[i] = choice
            self.dfs(child)


def solve(inst: ProblemInstance, mip_start: Optional[Topology] = None,
          time_limit: float = DEFAULT_TIME_LIMIT, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Depth-first branch-and-bound over the switchable lines.

    ``mip_start`` (default: the baseline topology) seeds the incumbent when it
    is radial and its power flow converges.  Reaching ``time_limit`` is not an
    error; the result then has ``proven_optimal=False``.

    Raises
    ------
    AllInfeasible
        No topology with a converged power flow was found.
    """
    net = inst.network
    if mip_start is None:
        mip_start = baseline_topology(net)
    search = _Search(inst, time_limit, tol, max_iter)
    search.t0 = time.perf_counter()

    baseline_loss = None
    g, active = to_graph(net, mip_start)
    start_sol = search.evaluate(mip_start) if is_connected(g, active) else None
    if start_sol is not None:
        baseline_loss = start_sol.p_loss
    start_ok = is_tree(g, active) and inst.fixed_closed <= active
    if start_ok and start_sol is not None:
        search.offer(mip_start, start_sol)
    else:
        log.warning("MIP start is not a feasible radial topology; search starts without incumbent")

    search.dfs([FREE] * len(inst.switchable))
    search.stats.wall_time = time.perf_counter() - search.t0

    if search.best is None:
        raise AllInfeasible("no feasible radial topology found")
    f, _, topo, sol = search.best
    return SolveResult(
        kind=inst.kind,
        best=topo,
        solution=sol,
        f_obj=f,
        p_loss=sol.p_loss,
        delta_loss_pct=loss_reduction_pct(baseline_loss, sol.p_loss),
        gamma_v_max=float(sol.gamma_v.max(initial=0.0)),
        gamma_s_max=float(sol.gamma_s.max(initial=0.0)),
        stats=search.stats,
        proven_optimal=not search.timed_out,
        baseline_loss=baseline_loss,
        base_mva=net.base_mva,
    )


REPORT_COLUMNS = ("case", "model", "f", "p_loss", "delta_loss_pct", "gamma_v", "gamma_s",
                  "ct", "nodes", "leaves", "proven_optimal")


@dataclass(frozen=True)
class ReportRow:
    """One results-table row. ``f`` and ``p_loss`` in MW, ``gamma_s`` in MVA^2."""

    case: str
    model: str
    f: float
    p_loss: float
    delta_loss_pct: float
    gamma_v: float
    gamma_s: float
    ct: float
    nodes: int
    leaves: int
    proven_optimal: bool

    def values(self) -> list:
        return [getattr(self, c) for c in REPORT_COLUMNS]


def report(result: SolveResult, baseline: PfSolution, case: str = "",
           include_timing: bool = True) -> ReportRow:
    """Results-table row for ``result``, with loss reduction against ``baseline``.

    ``include_timing=False`` writes ``ct`` as 0 so repeated runs produce
    identical rows.
    """
    s_base = result.base_mva
    return ReportRow(
        case=case,
        model=result.kind.label,
        f=result.f_obj * s_base,
        p_loss=result.p_loss * s_base,
        delta_loss_pct=loss_reduction_pct(baseline.p_loss, result.p_loss),
        gamma_v=result.gamma_v_max,
        gamma_s=result.gamma_s_max * s_base**2,
        ct=result.stats.wall_time if include_timing else 0.0,
        nodes=result.stats.nodes_explored,
        leaves=result.stats.leaves_evaluated,
        proven_optimal=result.proven_optimal,
    )


def write_report(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.values()])


def report_csv(rows) -> str:
    buf = io.StringIO()
    write_report(rows, buf)
    return buf.getvalue()
