"""Loss-minimal radial reconfiguration of distribution networks."""

from .errors import ReconfError
from .graph import Graph, enumerate_all_cycles, fundamental_cycle_basis, cycle_edges, is_tree
from .network import Network, Topology, baseline_topology, load_network, to_graph
from .powerflow import PfSolution, solve_power_flow
from .reconfiguration import ModelKind, SolveResult, build_instance, report, solve

__all__ = [
    "Graph", "ModelKind", "Network", "PfSolution", "ReconfError", "SolveResult",
    "Topology", "baseline_topology", "build_instance", "cycle_edges",
    "enumerate_all_cycles", "fundamental_cycle_basis", "is_tree", "load_network",
    "report", "solve", "solve_power_flow", "to_graph",
]
