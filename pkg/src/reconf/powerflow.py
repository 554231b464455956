"""Per-topology AC power flow (Newton-Raphson, polar coordinates) and metrics.

The reference bus holds ``v_ref`` at angle 0; every other bus is a PQ bus.
Unknowns are ordered ``[theta of non-reference buses, v_m of non-reference
buses]`` with buses in ascending index order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NonConverged, Singular
from .graph import is_connected
from .network import Line, Network, Topology, to_graph

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50


def branch_flow(v_f, v_t, theta_f, theta_t, line: Line):
    """Real and reactive power entering ``line`` at the bus with state ``(v_f, theta_f)``.

    Works for either direction: pass the far end as ``(v_t, theta_t)``.
    """
    d = theta_f - theta_t
    c, s = math.cos(d), math.sin(d)
    vv = v_f * v_t
    p = v_f * v_f * (line.g + line.g_sh) - vv * (line.g * c + line.b * s)
    q = -v_f * v_f * (line.b + line.b_sh) + vv * (line.b * c - line.g * s)
    return p, q


def voltage_violation(v, v_min, v_max):
    """Zero inside ``[v_min, v_max]``, otherwise the distance to the violated bound."""
    if v_min <= v <= v_max:
        return 0.0
    return max(v_min - v, v - v_max)


def rating_violation(p, q, s_max):
    """Zero when ``p**2 + q**2 <= s_max**2``, otherwise the excess in squared units."""
    s2 = p * p + q * q
    if math.isinf(s_max) or s2 <= s_max * s_max:
        return 0.0
    return s2 - s_max * s_max


@dataclass
class PfSolution:
    v_m: np.ndarray
    theta: np.ndarray
    p_flow: np.ndarray  # (n_lines, 2): [from-end, to-end] injections into the line
    q_flow: np.ndarray
    p_g: float
    q_g: float
    f_obj: float
    p_loss: float
    gamma_v: np.ndarray
    gamma_s: np.ndarray
    iterations: int
    converged: bool
    residual: float

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, np.ndarray):
                d[k] = v.tolist()
        d["converged"] = bool(self.converged)
        return d


class _Model:
    """Compiled admittance data for one (network, topology) pair."""

    def __init__(self, n: Network, t: Topology):
        g, active = to_graph(n, t)
        self.network = n
        self.graph = g
        self.active = active
        nb = n.n_bus
        ybus = np.zeros((nb, nb), dtype=complex)
        for lid in sorted(active):
            l = n.lines[lid]
            y = complex(l.g, l.b)
            ysh = complex(l.g_sh, l.b_sh)
            f, to = l.from_bus, l.to_bus
            ybus[f, f] += y + ysh
            ybus[to, to] += y + ysh
            ybus[f, to] -= y
            ybus[to, f] -= y
        self.ybus = ybus
        s_load = np.zeros(nb, dtype=complex)
        for ld in n.loads:
            s_load[ld.bus] += complex(ld.p, ld.q)
        self.s_load = s_load
        self.ref = n.ref_bus
        self.v_ref = n.buses[self.ref].v_ref
        self.pq = np.array([i for i in range(nb) if i != self.ref], dtype=int)

    def voltages(self, x):
        nb = self.network.n_bus
        k = len(self.pq)
        theta = np.zeros(nb)
        vm = np.full(nb, self.v_ref, dtype=float)
        theta[self.pq] = x[:k]
        vm[self.pq] = x[k:]
        return vm, theta

    def flat_state(self):
        k = len(self.pq)
        return np.concatenate([np.zeros(k), np.full(k, self.v_ref)])

    def injections(self, vm, theta):
        v = vm * np.exp(1j * theta)
        return v * np.conj(self.ybus @ v)

    def mismatch(self, x):
        vm, theta = self.voltages(x)
        s = self.injections(vm, theta) + self.s_load
        return np.concatenate([s.real[self.pq], s.imag[self.pq]])

    def jacobian(self, x):
        vm, theta = self.voltages(x)
        v = vm * np.exp(1j * theta)
        i_bus = self.ybus @ v
        dv = np.diag(v)
        vnorm = np.diag(np.exp(1j * theta))
        ds_dth = 1j * dv @ np.conj(np.diag(i_bus) - self.ybus @ dv)
        ds_dvm = dv @ np.conj(self.ybus @ vnorm) + np.conj(np.diag(i_bus)) @ vnorm
        pq = self.pq
        a = ds_dth[np.ix_(pq, pq)]
        b = ds_dvm[np.ix_(pq, pq)]
        return np.block([[a.real, b.real], [a.imag, b.imag]])


def mismatch(n: Network, t: Topology, state) -> np.ndarray:
    """Bus power mismatches ``[dP, dQ]`` at the non-reference buses."""
    return _Model(n, t).mismatch(np.asarray(state, dtype=float))


def jacobian(n: Network, t: Topology, state) -> np.ndarray:
    """Analytic Jacobian of :func:`mismatch` w.r.t. ``[theta, v_m]`` of non-reference buses."""
    model = _Model(n, t)
    state = np.asarray(state, dtype=float)
    if state.shape != (2 * len(model.pq),):
        raise ValueError(f"state must have length {2 * len(model.pq)}")
    return model.jacobian(state)


def line_flows(n: Network, t: Topology, v_m, theta):
    """Per-line ``(p_flow, q_flow)`` arrays of shape ``(n_lines, 2)``; open lines carry 0."""
    _, active = to_graph(n, t)
    p = np.zeros((len(n.lines), 2))
    q = np.zeros((len(n.lines), 2))
    for lid in sorted(active):
        l = n.lines[lid]
        f, to = l.from_bus, l.to_bus
        p[lid, 0], q[lid, 0] = branch_flow(v_m[f], v_m[to], theta[f], theta[to], l)
        p[lid, 1], q[lid, 1] = branch_flow(v_m[to], v_m[f], theta[to], theta[f], l)
    return p, q


def violations(n: Network, sol: PfSolution):
    """Per-bus voltage violations and per-line rating violations (worse end)."""
    gv = np.array([voltage_violation(sol.v_m[b.id], b.v_min, b.v_max) for b in n.buses])
    gs = np.array([
        max(rating_violation(sol.p_flow[l.id, 0], sol.q_flow[l.id, 0], l.s_max),
            rating_violation(sol.p_flow[l.id, 1], sol.q_flow[l.id, 1], l.s_max))
        for l in n.lines
    ])
    return gv, gs


def objective_and_losses(n: Network, sol: PfSolution):
    """``(f_obj, p_loss)``: total source injection and total real line losses."""
    return float(sol.p_g), float(sol.p_flow.sum())


def solve_power_flow(n: Network, t: Topology, tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER) -> PfSolution:
    """Newton-Raphson from a flat start.

    Raises
    ------
    Singular
        The energized lines do not connect every bus, or the Jacobian cannot be
        factorized.
    NonConverged
        ``max_iter`` iterations without reaching ``tol`` in max-norm.
    """
    model = _Model(n, t)
    if not is_connected(model.graph, model.active):
        raise Singular("energized lines do not connect all buses")

    x = model.flat_state()
    it = 0
    while True:
        f = model.mismatch(x)
        res = float(np.max(np.abs(f))) if f.size else 0.0
        if not math.isfinite(res):
            raise NonConverged(it, res)
        if res < tol:
            break
        if it >= max_iter:
            raise NonConverged(max_iter, res)
        try:
            dx = np.linalg.solve(model.jacobian(x), -f)
        except np.linalg.LinAlgError as exc:
            raise Singular(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            raise Singular("non-finite Newton step")
        x = x + dx
        it += 1

    vm, theta = model.voltages(x)
    p_flow, q_flow = line_flows(n, t, vm, theta)
    ref = model.ref
    s_ref = complex(model.s_load[ref])
    for lid in sorted(model.active):
        l = n.lines[lid]
        if l.from_bus == ref:
            s_ref += complex(p_flow[lid, 0], q_flow[lid, 0])
        elif l.to_bus == ref:
            s_ref += complex(p_flow[lid, 1], q_flow[lid, 1])
    sol = PfSolution(
        v_m=vm, theta=theta, p_flow=p_flow, q_flow=q_flow,
        p_g=float(s_ref.real), q_g=float(s_ref.imag),
        f_obj=0.0, p_loss=0.0,
        gamma_v=np.zeros(n.n_bus), gamma_s=np.zeros(len(n.lines)),
        iterations=it, converged=True, residual=res,
    )
    sol.f_obj, sol.p_loss = objective_and_losses(n, sol)
    sol.gamma_v, sol.gamma_s = violations(n, sol)
    return sol
