"""JSON network files.

Schema (vertex ids 1-based)::

    {"n": 5,
     "edges": [{"u": 1, "v": 2, "w": 1.0}, ...],
     "ports": [{"in": 5, "out": 4, "alpha": 1.0}, ...]}

``ports`` may be omitted. Unknown keys anywhere are an error; so are
booleans where numbers are expected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .graph import Edge, Graph, Port

TOP_KEYS = {"n", "edges", "ports"}
EDGE_KEYS = {"u", "v", "w"}
PORT_KEYS = {"in", "out", "alpha"}


class NetworkFileError(ValueError):
    """Malformed or schema-violating network file."""


@dataclass(frozen=True)
class Network:
    graph: Graph
    ports: tuple[Port, ...] = ()


def _int(val: Any, where: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise NetworkFileError(f"{where}: expected an integer, got {val!r}")
    return val


def _num(val: Any, where: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise NetworkFileError(f"{where}: expected a number, got {val!r}")
    if not math.isfinite(val):
        raise NetworkFileError(f"{where}: number must be finite")
    return float(val)


def _keys(obj: Any, allowed: set, required: set, where: str) -> dict:
    if not isinstance(obj, dict):
        raise NetworkFileError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise NetworkFileError(f"{where}: unknown key(s) {', '.join(map(repr, extra))}")
    missing = sorted(required - set(obj))
    if missing:
        raise NetworkFileError(f"{where}: missing key(s) {', '.join(map(repr, missing))}")
    return obj


def _vertex(val: Any, n: int, where: str) -> int:
    v = _int(val, where)
    if not 1 <= v <= n:
        raise NetworkFileError(f"{where}: vertex {v} outside 1..{n}")
    return v - 1


def parse_network(doc: Any) -> Network:
    """Validate a decoded JSON document and build the graph and ports."""
    doc = _keys(doc, TOP_KEYS, {"n", "edges"}, "network")
    n = _int(doc["n"], "n")
    if n < 1:
        raise NetworkFileError(f"n: must be at least 1, got {n}")
    if not isinstance(doc["edges"], list):
        raise NetworkFileError("edges: expected a list")
    edges = []
    for j, item in enumerate(doc["edges"], 1):
        where = f"edges[{j}]"
        item = _keys(item, EDGE_KEYS, {"u", "v", "w"}, where)
        u = _vertex(item["u"], n, where + ".u")
        v = _vertex(item["v"], n, where + ".v")
        if u == v:
            raise NetworkFileError(f"{where}: self-loop at vertex {u + 1}")
        edges.append(Edge(u, v, _num(item["w"], where + ".w")))
    ports = []
    raw_ports = doc.get("ports", [])
    if not isinstance(raw_ports, list):
        raise NetworkFileError("ports: expected a list")
    for j, item in enumerate(raw_ports, 1):
        where = f"ports[{j}]"
        item = _keys(item, PORT_KEYS, {"in", "out"}, where)
        a = _vertex(item["in"], n, where + ".in")
        b = _vertex(item["out"], n, where + ".out")
        if a == b:
            raise NetworkFileError(f"{where}: inflow and outflow are both vertex {a + 1}")
        alpha = _num(item.get("alpha", 1.0), where + ".alpha")
        if alpha <= 0:
            raise NetworkFileError(f"{where}.alpha: must be positive, got {alpha}")
        ports.append(Port(a, b, alpha))
    return Network(Graph(n, tuple(edges)), tuple(ports))


def loads(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFileError(f"invalid JSON: {exc}") from exc
    return parse_network(doc)


def load(path) -> Network:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise NetworkFileError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def to_document(net: Network) -> dict:
    return {
        "n": net.graph.n,
        "edges": [{"u": e.u + 1, "v": e.v + 1, "w": e.w} for e in net.graph.edges],
        "ports": [{"in": p.inflow + 1, "out": p.outflow + 1, "alpha": p.alpha} for p in net.ports],
    }


def dumps(net: Network) -> str:
    # repr-exact floats, so parsing the output gives back the same network
    return json.dumps(to_document(net), indent=2) + "\n"
