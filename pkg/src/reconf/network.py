"""Electrical network data model, JSON ingestion and topology handling."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import ParseError, ValidationError
from .graph import Graph, is_connected, is_tree


@dataclass(frozen=True)
class Bus:
    id: int
    v_min: float
    v_max: float
    is_ref: bool = False
    v_ref: Optional[float] = None


@dataclass(frozen=True)
class Line:
    id: int
    from_bus: int
    to_bus: int
    g: float
    b: float
    g_sh: float = 0.0
    b_sh: float = 0.0
    s_max: float = math.inf
    switchable: bool = False
    baseline_closed: bool = True


@dataclass(frozen=True)
class Load:
    bus: int
    p: float
    q: float


@dataclass(frozen=True)
class Source:
    bus: int


@dataclass(frozen=True)
class Topology:
    """Closed switchable lines; non-switchable lines are implicitly closed."""

    closed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "closed", frozenset(int(e) for e in self.closed))

    def key(self) -> tuple:
        return tuple(sorted(self.closed))


@dataclass(frozen=True)
class Network:
    buses: tuple
    lines: tuple
    loads: tuple = ()
    sources: tuple = ()
    base_mva: float = 1.0
    name: str = ""

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def ref_bus(self) -> int:
        return next(b.id for b in self.buses if b.is_ref)

    @property
    def switchable(self) -> frozenset:
        return frozenset(l.id for l in self.lines if l.switchable)

    @property
    def fixed_lines(self) -> frozenset:
        return frozenset(l.id for l in self.lines if not l.switchable)

    def graph(self) -> Graph:
        return Graph(len(self.buses), tuple((l.from_bus, l.to_bus) for l in self.lines))

    def total_load(self) -> tuple:
        return (sum(l.p for l in self.loads), sum(l.q for l in self.loads))

    def validate(self) -> "Network":
        _validate(self)
        return self


def _finite(*xs) -> bool:
    return all(isinstance(x, (int, float)) and math.isfinite(x) for x in xs)


def _validate(n: Network) -> None:
    ids = [b.id for b in n.buses]
    if ids != list(range(len(ids))):
        raise ValidationError("bad bus ids", "bus ids must be 0..n-1 without gaps")
    if not n.buses:
        raise ValidationError("no buses")
    for b in n.buses:
        if not (_finite(b.v_min, b.v_max) and 0 < b.v_min <= b.v_max):
            raise ValidationError("bad bounds", f"bus {b.id}")
        if b.is_ref:
            if b.v_ref is None or not _finite(b.v_ref):
                raise ValidationError("bad bounds", f"reference bus {b.id} lacks v_ref")
            if not (b.v_min <= b.v_ref <= b.v_max):
                raise ValidationError("bad bounds", f"v_ref of bus {b.id} outside its bounds")
    refs = [b.id for b in n.buses if b.is_ref]
    if not refs:
        raise ValidationError("no reference bus")
    if len(refs) > 1:
        raise ValidationError("multiple reference buses", str(refs))

    seen_ids = set()
    pairs = {}
    for l in n.lines:
        if l.id in seen_ids:
            raise ValidationError("duplicate edge", f"line id {l.id}")
        seen_ids.add(l.id)
    if sorted(seen_ids) != list(range(len(n.lines))):
        raise ValidationError("bad line ids", "line ids must be 0..m-1 without gaps")
    if [l.id for l in n.lines] != list(range(len(n.lines))):
        raise ValidationError("bad line ids", "lines must be listed in id order")
    for l in n.lines:
        for bus in (l.from_bus, l.to_bus):
            if not 0 <= bus < len(n.buses):
                raise ValidationError("unknown bus", f"line {l.id} references bus {bus}")
        if l.from_bus == l.to_bus:
            raise ValidationError("self loop", f"line {l.id}")
        key = (min(l.from_bus, l.to_bus), max(l.from_bus, l.to_bus))
        if key in pairs:
            raise ValidationError("parallel edge", f"lines {pairs[key]} and {l.id}")
        pairs[key] = l.id
        if not _finite(l.g, l.b, l.g_sh, l.b_sh):
            raise ValidationError("bad line parameters", f"line {l.id} admittance not finite")
        if l.g < 0:
            raise ValidationError("bad line parameters", f"line {l.id} has g < 0")
        if not (l.s_max > 0):
            raise ValidationError("bad line parameters", f"line {l.id} needs s_max > 0")

    for ld in n.loads:
        if not 0 <= ld.bus < len(n.buses):
            raise ValidationError("unknown bus", f"load at bus {ld.bus}")
        if not _finite(ld.p, ld.q):
            raise ValidationError("bad load", f"load at bus {ld.bus}")
    if len(n.sources) != 1:
        raise ValidationError("bad sources", "exactly one source is supported")
    if n.sources[0].bus != refs[0]:
        raise ValidationError("bad sources", "the source must sit at the reference bus")
    if not (_finite(n.base_mva) and n.base_mva > 0):
        raise ValidationError("bad base", "base_mva must be positive")
    if not is_connected(n.graph()):
        raise ValidationError("disconnected", "the graph of all lines is not connected")


def _get(d: dict, key: str, where: str):
    try:
        return d[key]
    except KeyError:
        raise ParseError(f"{where}: missing field '{key}'") from None
    except TypeError:
        raise ParseError(f"{where}: expected an object") from None


def network_from_dict(data: dict) -> Network:
    """Build and validate a :class:`Network` from the JSON schema.

    With ``"units": "physical"`` the admittances are read in siemens, ratings in
    MVA and loads in MW/Mvar, and converted to p.u. using ``base_mva`` and
    ``base_kv``.  The default ``"pu"`` takes values as given.
    """
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    base_mva = float(data.get("base_mva", 1.0))
    units = data.get("units", "pu")
    if units == "pu":
        y_scale = s_scale = 1.0
    elif units == "physical":
        base_kv = data.get("base_kv")
        if not isinstance(base_kv, (int, float)) or base_kv <= 0:
            raise ValidationError("bad base", "physical units need a positive base_kv")
        y_scale = base_kv**2 / base_mva  # siemens -> p.u.
        s_scale = 1.0 / base_mva
    else:
        raise ParseError(f"unknown units mode '{units}'")

    try:
        buses = []
        for i, b in enumerate(_get(data, "buses", "network")):
            where = f"buses[{i}]"
            is_ref = bool(b.get("is_ref", False))
            v_ref = b.get("v_ref")
            buses.append(Bus(
                id=int(_get(b, "id", where)),
                v_min=float(_get(b, "v_min", where)),
                v_max=float(_get(b, "v_max", where)),
                is_ref=is_ref,
                v_ref=None if v_ref is None else float(v_ref),
            ))
        buses.sort(key=lambda b: b.id)
        lines = []
        for i, l in enumerate(_get(data, "lines", "network")):
            where = f"lines[{i}]"
            s_max = l.get("s_max")
            lines.append(Line(
                id=int(_get(l, "id", where)),
                from_bus=int(_get(l, "from", where)),
                to_bus=int(_get(l, "to", where)),
                g=float(_get(l, "g", where)) * y_scale,
                b=float(_get(l, "b", where)) * y_scale,
                g_sh=float(l.get("g_sh", 0.0)) * y_scale,
                b_sh=float(l.get("b_sh", 0.0)) * y_scale,
                s_max=math.inf if s_max is None else float(s_max) * s_scale,
                switchable=bool(l.get("switchable", False)),
                baseline_closed=bool(l.get("baseline_closed", True)),
            ))
        loads = [
            Load(bus=int(_get(ld, "bus", f"loads[{i}]")),
                 p=float(_get(ld, "p", f"loads[{i}]")) * s_scale,
                 q=float(_get(ld, "q", f"loads[{i}]")) * s_scale)
            for i, ld in enumerate(data.get("loads", []))
        ]
        sources = [Source(bus=int(_get(s, "bus", f"sources[{i}]")))
                   for i, s in enumerate(data.get("sources", []))]
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(str(exc)) from exc

    net = Network(
        buses=tuple(buses),
        lines=tuple(lines),
        loads=tuple(loads),
        sources=tuple(sources),
        base_mva=base_mva,
        name=str(data.get("name", "")),
    )
    return net.validate()


def network_to_dict(n: Network) -> dict:
    """Serialize to the JSON schema in p.u. (inverse of :func:`network_from_dict`)."""
    return {
        "name": n.name,
        "base_mva": n.base_mva,
        "buses": [
            {"id": b.id, "v_min": b.v_min, "v_max": b.v_max, "is_ref": b.is_ref, "v_ref": b.v_ref}
            for b in n.buses
        ],
        "lines": [
            {"id": l.id, "from": l.from_bus, "to": l.to_bus, "g": l.g, "b": l.b,
             "g_sh": l.g_sh, "b_sh": l.b_sh,
             "s_max": None if math.isinf(l.s_max) else l.s_max,
             "switchable": l.switchable, "baseline_closed": l.baseline_closed}
            for l in n.lines
        ],
        "loads": [{"bus": ld.bus, "p": ld.p, "q": ld.q} for ld in n.loads],
        "sources": [{"bus": s.bus} for s in n.sources],
    }


FIXTURES = ("tri3.json", "ring6.json", "twocycle8.json", "mesh12.json")


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture such as ``"ring6.json"``."""
    path = Path(str(resources.files("reconf") / "fixtures" / name))
    if not path.is_file():
        raise FileNotFoundError(name)
    return path


def resolve_path(path) -> Path:
    """Return ``path`` if it exists, else the bundled fixture of that name."""
    p = Path(path)
    if p.exists():
        return p
    try:
        return fixture_path(p.name)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None


def load_network(path) -> Network:
    p = resolve_path(path)
    try:
        data = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{p}: {exc}") from exc
    return network_from_dict(data)


def check_topology(n: Network, t: Topology) -> None:
    extra = t.closed - n.switchable
    if extra:
        raise ValidationError("bad topology", f"lines {sorted(extra)} are not switchable")


def to_graph(n: Network, t: Topology):
    """Graph over all buses and lines plus the set of energized lines."""
    check_topology(n, t)
    return n.graph(), n.fixed_lines | t.closed


def baseline_topology(n: Network) -> Topology:
    return Topology(frozenset(l.id for l in n.lines if l.switchable and l.baseline_closed))


def topology_from_active(n: Network, active: Iterable[int]) -> Topology:
    """Topology whose energized line set is ``active`` (must contain every fixed line)."""
    active = frozenset(active)
    missing = n.fixed_lines - active
    if missing:
        raise ValidationError("bad topology", f"fixed lines {sorted(missing)} cannot open")
    return Topology(active & n.switchable)


def is_radial(n: Network, t: Topology) -> bool:
    g, active = to_graph(n, t)
    return is_tree(g, active)


def load_topology(path) -> Topology:
    """Read ``{"closed": [line ids]}``."""
    try:
        data = json.loads(Path(path).read_text())
        return Topology(frozenset(data["closed"]))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
