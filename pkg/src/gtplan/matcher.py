"""Injective, type-preserving pattern matching and NAC evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .graph import TypedGraph


@dataclass(frozen=True, eq=True)
class Morphism:
    node_map: Mapping[str, str]
    edge_map: Mapping[str, str] = field(default_factory=dict)

    def __call__(self, x: str) -> str:
        return self.node_map[x] if x in self.node_map else self.edge_map[x]

    def image(self) -> frozenset:
        return frozenset(self.node_map.values()) | frozenset(self.edge_map.values())

    def encode(self, pattern: TypedGraph) -> Tuple[str, ...]:
        """Ordered image of the pattern's elements (nodes, then edges)."""
        return tuple(self.node_map[n] for n in pattern.nodes) + \
            tuple(self.edge_map[e] for e in pattern.edges)

    def __hash__(self):
        return hash((tuple(sorted(self.node_map.items())), tuple(sorted(self.edge_map.items()))))


def decode_match(pattern: TypedGraph, image: Sequence[str]) -> Morphism:
    nodes = list(pattern.nodes)
    edges = list(pattern.edges)
    if len(image) != len(nodes) + len(edges):
        raise ValueError(f"expected {len(nodes) + len(edges)} image ids, got {len(image)}")
    return Morphism(dict(zip(nodes, image[:len(nodes)])), dict(zip(edges, image[len(nodes):])))


@dataclass(frozen=True)
class Nac:
    """Forbidden extension ``n_graph`` of a pattern, with ``embedding`` from the pattern into it."""

    n_graph: TypedGraph
    embedding: Morphism

    @classmethod
    def extending(cls, lhs: TypedGraph, n_graph: TypedGraph) -> "Nac":
        """NAC whose graph reuses the LHS element ids (identity embedding)."""
        emb = Morphism({n: n for n in lhs.nodes}, {e: e for e in lhs.edges})
        if not is_morphism(lhs, n_graph, emb):
            raise ValueError("NAC graph does not extend the LHS")
        return cls(n_graph, emb)

    def extension_elements(self) -> frozenset:
        return frozenset(self.n_graph.elements()) - self.embedding.image()

    def edge_demand(self) -> Optional[Tuple[frozenset, Dict[tuple, int]]]:
        """For NACs that add only edges: the LHS nodes they touch and, per
        (src, type, tgt) key in LHS terms, how many host edges a violation
        needs. None if the NAC adds nodes."""
        emb = self.embedding
        inv = {v: k for k, v in emb.node_map.items()}
        if len(inv) != len(self.n_graph.nodes):
            return None
        ext = set(self.n_graph.edges) - set(emb.edge_map.values())
        demand: Dict[tuple, int] = {}
        for e in ext:
            s, t, d = self.n_graph.edges[e]
            k = (inv[s], t, inv[d])
            demand[k] = demand.get(k, 0) + 1
        for k in demand:  # LHS edges with the same key compete for host edges
            demand[k] += sum(1 for e in emb.edge_map if self.n_graph.edges[emb.edge_map[e]] ==
                             (emb.node_map[k[0]], k[1], emb.node_map[k[2]]))
        touched = frozenset(x for k in demand for x in (k[0], k[2]))
        return touched, demand


@dataclass(frozen=True)
class Pattern:
    lhs: TypedGraph
    nacs: Tuple[Nac, ...] = ()


def is_morphism(pattern: TypedGraph, host: TypedGraph, m: Morphism) -> bool:
    """Total, injective, type/name/structure preserving."""
    nm, em = m.node_map, m.edge_map
    if set(nm) != set(pattern.nodes) or set(em) != set(pattern.edges):
        return False
    if len(set(nm.values())) != len(nm) or len(set(em.values())) != len(em):
        return False
    for n, (t, name) in pattern.nodes.items():
        h = host.nodes.get(nm[n])
        if h is None or h[0] != t or (name is not None and h[1] != name):
            return False
    for e, (s, t, d) in pattern.edges.items():
        h = host.edges.get(em[e])
        if h is None or h != (nm[s], t, nm[d]):
            return False
    return True


class _Plan:
    """Node visiting order for one pattern, given which nodes are pre-mapped."""

    def __init__(self, pattern: TypedGraph, fixed: frozenset):
        order: List[str] = []
        placed = set(fixed)
        remaining = [n for n in pattern.nodes if n not in fixed]
        deg = {n: len(pattern.incident_edges(n)) for n in pattern.nodes}

        def links(n):
            return sum(1 for e in pattern.incident_edges(n)
                       if (pattern.src(e) in placed or pattern.tgt(e) in placed))

        while remaining:
            best = max(remaining, key=lambda n: (pattern.node_name(n) is not None,
                                                 links(n), deg[n]))
            remaining.remove(best)
            order.append(best)
            placed.add(best)
        self.order = order
        # for each node: an anchoring edge towards an earlier node, and all edges
        # whose other endpoint is earlier (or itself) for consistency checks
        self.anchor: Dict[str, Optional[Tuple[str, str, bool]]] = {}
        self.checks: Dict[str, List[Tuple[str, str, str]]] = {}
        earlier = set(fixed)
        for n in order:
            anchor = None
            checks = []
            for e in pattern.incident_edges(n):
                s, t, d = pattern.edges[e]
                other = d if s == n else s
                if other in earlier or other == n:
                    checks.append((s, t, d))
                    if anchor is None and other != n:
                        anchor = (other, t, s == n)
            self.anchor[n] = anchor
            self.checks[n] = checks
            earlier.add(n)


def _plan_for(pattern: TypedGraph, fixed: frozenset) -> _Plan:
    plans = pattern._cache.setdefault("plans", {})
    p = plans.get(fixed)
    if p is None:
        p = plans[fixed] = _Plan(pattern, fixed)
    return p


def _extend(pattern: TypedGraph, host: TypedGraph, node_map: Dict[str, str],
            edge_map: Dict[str, str], prune: Optional[Callable[[Dict[str, str]], bool]] = None,
            cand_key: Optional[Callable[[str], object]] = None) -> Iterator[Morphism]:
    """Extend a partial injective map to full matches.

    ``prune(node_map)`` may cut a branch after each node assignment;
    ``cand_key`` orders the candidate host nodes.
    """
    plan = _plan_for(pattern, frozenset(node_map))
    order = plan.order
    used = set(node_map.values())
    nm = dict(node_map)
    pnodes = pattern.nodes
    hnodes = host.nodes

    def candidates(n: str):
        typ, name = pnodes[n]
        if name is not None:
            h = host.node_by_name(name)
            return [h] if h is not None and hnodes[h][0] == typ else []
        anchor = plan.anchor[n]
        if anchor is None:
            return host.nodes_of_type(typ)
        other, t, outgoing = anchor
        ho = nm[other]
        if outgoing:  # n -t-> other
            cands = [host.src(e) for e in host.in_edges(ho, t)]
        else:
            cands = [host.tgt(e) for e in host.out_edges(ho, t)]
        return [c for c in dict.fromkeys(cands) if hnodes[c][0] == typ]

    def consistent(n: str) -> bool:
        need: Dict[tuple, int] = {}
        for s, t, d in plan.checks[n]:
            k = (nm[s], t, nm[d])
            need[k] = need.get(k, 0) + 1
        return all(len(host.edges_between(*k)) >= c for k, c in need.items())

    def edge_maps() -> Iterator[Dict[str, str]]:
        groups: Dict[tuple, List[str]] = {}
        for e, (s, t, d) in pattern.edges.items():
            if e in edge_map:
                continue
            groups.setdefault((nm[s], t, nm[d]), []).append(e)
        taken = set(edge_map.values())
        options = []
        for key, pes in groups.items():
            avail = [h for h in host.edges_between(*key) if h not in taken]
            if len(avail) < len(pes):
                return
            options.append([dict(zip(pes, perm)) for perm in permutations(avail, len(pes))])
        for combo in product(*options):
            em = dict(edge_map)
            for part in combo:
                em.update(part)
            yield em

    def rec(i: int) -> Iterator[Morphism]:
        if i == len(order):
            for em in edge_maps():
                yield Morphism(dict(nm), em)
            return
        n = order[i]
        cands = candidates(n)
        if cand_key is not None:
            cands = sorted(cands, key=cand_key)
        for h in cands:
            if h in used:
                continue
            nm[n] = h
            if consistent(n) and not (prune is not None and prune(nm)):
                used.add(h)
                yield from rec(i + 1)
                used.discard(h)
            del nm[n]

    yield from rec(0)


def iter_matches(pattern: TypedGraph, host: TypedGraph, prune=None, cand_key=None) -> Iterator[Morphism]:
    """Unordered stream of all matches (cheaper than :func:`enumerate_matches`)."""
    for t, c in pattern.type_counts().items():
        if len(host.nodes_of_type(t)) < c:
            return iter(())
    return _extend(pattern, host, {}, {}, prune, cand_key)


def enumerate_matches(pattern: TypedGraph, host: TypedGraph) -> List[Morphism]:
    """All injective type/name/structure preserving morphisms, ordered by image encoding."""
    ms = list(iter_matches(pattern, host))
    ms.sort(key=lambda m: m.encode(pattern))
    return ms


def find_match(pattern: TypedGraph, host: TypedGraph) -> Optional[Morphism]:
    return next(iter_matches(pattern, host), None)


def nac_extensions(m: Morphism, nac: Nac, host: TypedGraph) -> Iterator[Morphism]:
    """All injective q: N -> host with q . n = m."""
    emb = nac.embedding
    nm = {emb.node_map[x]: h for x, h in m.node_map.items()}
    em = {emb.edge_map[x]: h for x, h in m.edge_map.items()}
    # the NAC-only part must avoid everything already used by m
    for q in _extend(nac.n_graph, host, nm, em):
        yield q


def edge_nac_violated(demand: Dict[tuple, int], node_map: Mapping[str, str], host: TypedGraph) -> bool:
    """Exact violation test for an edge-only NAC once its touched nodes are mapped."""
    return all(len(host.edges_between(node_map[s], t, node_map[d])) >= c
               for (s, t, d), c in demand.items())


def nac_satisfied(m: Morphism, nac: Nac, host: TypedGraph) -> bool:
    return next(nac_extensions(m, nac, host), None) is None


def match_pattern(p: Pattern, host: TypedGraph) -> List[Morphism]:
    return [m for m in enumerate_matches(p.lhs, host)
            if all(nac_satisfied(m, nac, host) for nac in p.nacs)]


def has_match(p: Pattern, host: TypedGraph) -> bool:
    return any(all(nac_satisfied(m, nac, host) for nac in p.nacs)
               for m in iter_matches(p.lhs, host))
