"""Typed directed multigraphs with canonical hashing.

A :class:`TypedGraph` is immutable once built. Every node carries a type
label and an optional name; names are identity anchors that matching must
preserve. Edges carry a type label and connect two nodes of the same graph.
Node and edge ids share one namespace and are plain strings.
"""
from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

NodeData = Tuple[str, Optional[str]]  # (type, name)
EdgeData = Tuple[str, str, str]  # (src, type, tgt)


class GraphError(ValueError):
    pass


class TypedGraph:
    """Immutable typed multigraph.

    Construct through :class:`GraphBuilder` or :meth:`from_elements`.
    """

    __slots__ = (
        "_nodes", "_edges", "next_id", "_out", "_in", "_by_type",
        "_by_name", "_by_key", "_cache",
    )

    def __init__(self, nodes: Dict[str, NodeData], edges: Dict[str, EdgeData],
                 next_id: int = 0):
        self._nodes = nodes
        self._edges = edges
        self.next_id = next_id
        out: Dict[str, Dict[str, List[str]]] = {n: {} for n in nodes}
        inc: Dict[str, Dict[str, List[str]]] = {n: {} for n in nodes}
        by_key: Dict[EdgeData, List[str]] = {}
        for eid, (s, t, d) in edges.items():
            if s not in nodes or d not in nodes:
                raise GraphError(f"edge {eid!r} is dangling")
            out[s].setdefault(t, []).append(eid)
            inc[d].setdefault(t, []).append(eid)
            by_key.setdefault((s, t, d), []).append(eid)
        by_type: Dict[str, List[str]] = {}
        by_name: Dict[str, str] = {}
        for nid, (typ, name) in nodes.items():
            by_type.setdefault(typ, []).append(nid)
            if name is not None:
                if name in by_name:
                    raise GraphError(f"duplicate node name {name!r}")
                by_name[name] = nid
        self._out = out
        self._in = inc
        self._by_type = by_type
        self._by_name = by_name
        self._by_key = by_key
        self._cache: dict = {}

    @classmethod
    def from_elements(cls, nodes: Iterable[tuple], edges: Iterable[tuple] = ()) -> "TypedGraph":
        """Build from ``(id, type[, name])`` node tuples and
        ``(src, type, tgt[, id])`` edge tuples."""
        b = GraphBuilder()
        for n in nodes:
            b.add_node(*n)
        for e in edges:
            if len(e) == 4:
                b.add_edge(e[0], e[1], e[2], eid=e[3])
            else:
                b.add_edge(*e)
        return b.build()

    # -- element access ------------------------------------------------
    @property
    def nodes(self) -> Dict[str, NodeData]:
        return self._nodes

    @property
    def edges(self) -> Dict[str, EdgeData]:
        return self._edges

    def node_type(self, n: str) -> str:
        return self._nodes[n][0]

    def node_name(self, n: str) -> Optional[str]:
        return self._nodes[n][1]

    def edge_type(self, e: str) -> str:
        return self._edges[e][1]

    def src(self, e: str) -> str:
        return self._edges[e][0]

    def tgt(self, e: str) -> str:
        return self._edges[e][2]

    def has_element(self, x: str) -> bool:
        return x in self._nodes or x in self._edges

    def elements(self) -> Iterator[str]:
        yield from self._nodes
        yield from self._edges

    def nodes_of_type(self, typ: str) -> List[str]:
        return self._by_type.get(typ, [])

    def node_by_name(self, name: str) -> Optional[str]:
        return self._by_name.get(name)

    def out_edges(self, n: str, typ: Optional[str] = None) -> List[str]:
        if typ is None:
            return [e for es in self._out[n].values() for e in es]
        return self._out[n].get(typ, [])

    def in_edges(self, n: str, typ: Optional[str] = None) -> List[str]:
        if typ is None:
            return [e for es in self._in[n].values() for e in es]
        return self._in[n].get(typ, [])

    def incident_edges(self, n: str) -> List[str]:
        seen = dict.fromkeys(self.out_edges(n))
        seen.update(dict.fromkeys(self.in_edges(n)))
        return list(seen)

    def edges_between(self, s: str, typ: str, d: str) -> List[str]:
        return self._by_key.get((s, typ, d), [])

    def type_counts(self) -> Counter:
        return Counter({t: len(ns) for t, ns in self._by_type.items()})

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        # structural identity (same ids), not isomorphism
        if not isinstance(other, TypedGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self) -> str:
        return f"TypedGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def to_builder(self) -> "GraphBuilder":
        b = GraphBuilder()
        b.nodes = dict(self._nodes)
        b.edges = dict(self._edges)
        b.next_id = self.next_id
        return b

    def canonical_key(self) -> "CanonicalKey":
        key = self._cache.get("key")
        if key is None:
            key = self._cache["key"] = canonical_key(self)
        return key

    def is_subgraph_of(self, other: "TypedGraph") -> bool:
        """True if every element of ``self`` is present in ``other`` with the same data."""
        return (all(other._nodes.get(n) == d for n, d in self._nodes.items())
                and all(other._edges.get(e) == d for e, d in self._edges.items()))


class GraphBuilder:
    """Mutable staging area for a :class:`TypedGraph`. Not thread-safe."""

    def __init__(self):
        self.nodes: Dict[str, NodeData] = {}
        self.edges: Dict[str, EdgeData] = {}
        self.next_id = 0

    def fresh_id(self) -> str:
        while True:
            self.next_id += 1
            fid = f"_{self.next_id}"
            if fid not in self.nodes and fid not in self.edges:
                return fid

    def add_node(self, nid: Optional[str], typ: str, name: Optional[str] = None) -> str:
        if nid is None:
            nid = self.fresh_id()
        if nid in self.nodes or nid in self.edges:
            raise GraphError(f"duplicate element id {nid!r}")
        self.nodes[nid] = (typ, name)
        return nid

    def add_edge(self, src: str, typ: str, tgt: str, eid: Optional[str] = None) -> str:
        if src not in self.nodes or tgt not in self.nodes:
            raise GraphError(f"edge {src!r} -{typ}-> {tgt!r} refers to a missing node")
        if eid is None:
            eid = self.fresh_id()
        if eid in self.nodes or eid in self.edges:
            raise GraphError(f"duplicate element id {eid!r}")
        self.edges[eid] = (src, typ, tgt)
        return eid

    def remove_edge(self, eid: str) -> None:
        del self.edges[eid]

    def remove_node(self, nid: str) -> List[str]:
        """Remove a node and every incident edge; returns the removed edge ids."""
        gone = [e for e, (s, _, d) in self.edges.items() if s == nid or d == nid]
        for e in gone:
            del self.edges[e]
        del self.nodes[nid]
        return gone

    def build(self) -> TypedGraph:
        return TypedGraph(dict(self.nodes), dict(self.edges), self.next_id)


# -- canonical form ----------------------------------------------------

@dataclass(frozen=True)
class CanonicalKey:
    digest: str

    def __str__(self) -> str:
        return self.digest[:16]


def _relabel(sigs: Dict[str, tuple]) -> Dict[str, int]:
    order = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
    return {n: order[s] for n, s in sigs.items()}


def _refine(g: TypedGraph, colors: Dict[str, int]) -> Dict[str, int]:
    ncls = len(set(colors.values()))
    while True:
        sigs = {}
        for n in g._nodes:
            outs = sorted((g._edges[e][1], colors[g._edges[e][2]]) for e in g.out_edges(n))
            ins = sorted((g._edges[e][1], colors[g._edges[e][0]]) for e in g.in_edges(n))
            sigs[n] = (colors[n], tuple(outs), tuple(ins))
        new = _relabel(sigs)
        k = len(set(new.values()))
        if k == ncls:
            return new
        colors, ncls = new, k


def _leaf_encoding(g: TypedGraph, colors: Dict[str, int]) -> tuple:
    order = sorted(g._nodes, key=colors.__getitem__)
    nodes = tuple((t, name or "", name is not None) for t, name in (g._nodes[n] for n in order))
    edges = tuple(sorted((colors[s], t, colors[d]) for s, t, d in g._edges.values()))
    return nodes, edges


def canonical_form(g: TypedGraph) -> tuple:
    """Isomorphism-invariant encoding of ``g``.

    Color refinement, then individualization of the first non-singleton
    cell with the lexicographically least leaf kept.
    """
    init = _relabel({n: (t, name is not None, name or "") for n, (t, name) in g._nodes.items()})
    best: list = [None]

    def search(colors: Dict[str, int]) -> None:
        colors = _refine(g, colors)
        cells: Dict[int, List[str]] = defaultdict(list)
        for n, c in colors.items():
            cells[c].append(n)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            enc = _leaf_encoding(g, colors)
            if best[0] is None or enc < best[0]:
                best[0] = enc
            return
        for v in cells[target]:
            split = _relabel({n: (c, n != v) for n, c in colors.items()})
            search(split)

    search(init)
    if best[0] is None:  # empty graph
        best[0] = ((), ())
    return best[0]


def canonical_key(g: TypedGraph) -> CanonicalKey:
    enc = repr(canonical_form(g)).encode()
    return CanonicalKey(hashlib.blake2b(enc, digest_size=20).hexdigest())


def is_isomorphic(g1: TypedGraph, g2: TypedGraph) -> bool:
    """Exact check: a type-, name- and structure-preserving bijection exists."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    if sorted(map(repr, g1.nodes.values())) != sorted(map(repr, g2.nodes.values())):
        return False
    from .matcher import find_match  # local: matcher depends on this module

    return find_match(g1, g2) is not None
