"""Acceptance gate: one test per exit criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` (or execute this file directly)
to see the summary lines.
"""

import random
import subprocess
import sys
import time
from itertools import combinations

import numpy as np
import pytest

from conftest import ALL_FIXTURES, k4, random_connected_graph, theta_graph
from reconf.graph import (
    cycle_edges,
    enumerate_all_cycles,
    fundamental_cycle_basis,
    is_connected,
    is_tree,
    is_tree_by_acyclicity,
)
from reconf.network import Topology, baseline_topology, load_network
from reconf.oracle import brute_force_cycles, exhaustive_optimum
from reconf.powerflow import (
    jacobian,
    mismatch,
    rating_violation,
    solve_power_flow,
    voltage_violation,
)
from reconf.reconfiguration import ModelKind, build_instance, loss_reduction_pct, solve

PF_TOL = 1e-8
JAC_REL_TOL = 1e-6
JAC_STATES = 50
FD_STEP = 1e-6
OBJ_TOL = 1e-8
SOLVE_LIMIT = 60.0
DELTA_TOL = 1e-9


def verdict(number, ok, detail):
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_1_cycle_enumeration_exactness():
    rng = random.Random(1)
    graphs = [k4(), theta_graph()]
    while len(graphs) < 40:
        n = rng.randint(3, 8)
        graphs.append(random_connected_graph(rng, n, rng.randint(0, 7)))
    graphs += [load_network(f).graph() for f in ALL_FIXTURES if load_network(f).n_bus <= 8]
    t0 = time.perf_counter()
    mismatches = sum(enumerate_all_cycles(g) != brute_force_cycles(g) for g in graphs)
    elapsed = time.perf_counter() - t0
    ok = (mismatches == 0 and len(enumerate_all_cycles(k4())) == 7
          and len(enumerate_all_cycles(theta_graph())) == 3 and elapsed < 5.0)
    assert verdict(1, ok, f"{len(graphs)} graphs, {mismatches} mismatches, {elapsed:.2f}s")


def test_criterion_2_cycle_edge_union():
    rng = random.Random(2)
    mismatches = 0
    for _ in range(100):
        g = random_connected_graph(rng, rng.randint(2, 10), rng.randint(0, 8))
        union = frozenset().union(*(c.edges for c in enumerate_all_cycles(g)))
        mismatches += cycle_edges(fundamental_cycle_basis(g)) != union
    assert verdict(2, mismatches == 0, f"100 graphs, {mismatches} mismatches")


def test_criterion_3_tree_and_bridge_properties():
    rng = random.Random(3)
    bad_tree = bad_bridge = 0
    for _ in range(200):
        g = random_connected_graph(rng, rng.randint(2, 10), rng.randint(0, 8))
        subset = frozenset(rng.sample(range(len(g.edges)), g.vertex_count - 1))
        bad_tree += is_tree(g, subset) != is_tree_by_acyclicity(g, subset)
        ces = cycle_edges(fundamental_cycle_basis(g))
        bad_bridge += sum(is_connected(g, g.without([e])) != (e in ces) for e in g.all_edges)
    ok = bad_tree == 0 and bad_bridge == 0
    assert verdict(3, ok, f"200 graphs, {bad_tree} tree / {bad_bridge} bridge counterexamples")


def _fd_jacobian(n, t, x):
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = FD_STEP
        cols.append((mismatch(n, t, x + e) - mismatch(n, t, x - e)) / (2 * FD_STEP))
    return np.column_stack(cols)


def test_criterion_4_power_flow_fidelity():
    worst_res = worst_jac = worst_energy = 0.0
    rng = np.random.default_rng(4)
    for name in ALL_FIXTURES:
        n = load_network(name)
        topos = [baseline_topology(n), solve(build_instance(n, ModelKind.CDSR)).best]
        for t in topos:
            sol = solve_power_flow(n, t)
            x = np.concatenate([np.delete(sol.theta, n.ref_bus), np.delete(sol.v_m, n.ref_bus)])
            worst_res = max(worst_res, float(np.max(np.abs(mismatch(n, t, x)), initial=0.0)))
            worst_energy = max(worst_energy, abs(sol.f_obj - n.total_load()[0] - sol.p_loss))
        t = Topology(n.switchable)
        k = n.n_bus - 1
        for _ in range(JAC_STATES):
            x = np.concatenate([rng.uniform(-0.2, 0.2, k), rng.uniform(0.9, 1.1, k)])
            jac = jacobian(n, t, x)
            rel = np.max(np.abs(jac - _fd_jacobian(n, t, x))) / max(np.max(np.abs(jac)), 1e-300)
            worst_jac = max(worst_jac, float(rel))
    ok = worst_res < PF_TOL and worst_jac <= JAC_REL_TOL and worst_energy < PF_TOL
    assert verdict(4, ok, f"residual {worst_res:.2e}, jacobian rel {worst_jac:.2e}, "
                          f"energy {worst_energy:.2e}")


def test_criterion_5_solver_exactness():
    details = []
    ok = True
    for name in ALL_FIXTURES:
        n = load_network(name)
        oracle = exhaustive_optimum(n)
        res = solve(build_instance(n, ModelKind.CDSR), baseline_topology(n), time_limit=SOLVE_LIMIT)
        gap = abs(res.f_obj - oracle.optimum_f)
        ok &= gap < OBJ_TOL and res.proven_optimal
        details.append(f"{name} gap {gap:.1e}")
    assert verdict(5, ok, ", ".join(details))


def test_criterion_6_formulation_equivalence_and_dominance():
    ok = True
    details = []
    for name in ALL_FIXTURES:
        n = load_network(name)
        c = solve(build_instance(n, ModelKind.CDSR), time_limit=SOLVE_LIMIT)
        r = solve(build_instance(n, ModelKind.RRDSR), time_limit=SOLVE_LIMIT)
        lc, lr = c.stats.leaves_evaluated, r.stats.leaves_evaluated
        ok &= abs(c.f_obj - r.f_obj) < OBJ_TOL and lc <= lr
        if name == "twocycle8.json":
            ok &= lc < lr
        details.append(f"{name} {lc}/{lr}")
    assert verdict(6, ok, "leaves C-DSR/RR-DSR: " + ", ".join(details))


def test_criterion_7_metrics_contract():
    checks = [
        voltage_violation(1.05, 0.95, 1.05) == 0.0,
        voltage_violation(0.95, 0.95, 1.05) == 0.0,
        voltage_violation(1.0625, 0.9375, 1.0) == 0.0625,
        voltage_violation(0.875, 0.9375, 1.0) == 0.0625,
        rating_violation(0.375, 0.5, 0.625) == 0.0,
        rating_violation(0.5, 0.5, 0.625) == 0.5 - 0.390625,
        abs(rating_violation(0.4, 0.3, 0.45) - 0.0475) < 1e-15,
        abs(loss_reduction_pct(0.2, 0.1) - 50.0) <= DELTA_TOL,
        abs(loss_reduction_pct(0.3, 0.15) - 50.0) <= DELTA_TOL,
        loss_reduction_pct(0.3, 0.3) == 0.0,
    ]
    assert verdict(7, all(checks), f"{sum(checks)}/{len(checks)} boundary checks")


def _cli_report(tmp_path, tag, *extra):
    out = tmp_path / f"{tag}.csv"
    cmd = [sys.executable, "-m", "reconf", "solve", "ring6.json", "--model", "cdsr,rrdsr",
           "--report", str(out), *extra]
    subprocess.run(cmd, check=True, capture_output=True)
    return out.read_bytes()


def test_criterion_8_end_to_end_determinism(tmp_path):
    a = _cli_report(tmp_path, "a", "--no-timing")
    b = _cli_report(tmp_path, "b", "--no-timing")
    # with timing on, everything except the wall-clock column must still match
    c = _cli_report(tmp_path, "c").decode().splitlines()
    d = _cli_report(tmp_path, "d").decode().splitlines()
    strip = lambda rows: [r.split(",")[:7] + r.split(",")[8:] for r in rows]
    ok = a == b and strip(c) == strip(d)
    assert verdict(8, ok, f"{len(a)} bytes, byte-identical: {a == b}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
