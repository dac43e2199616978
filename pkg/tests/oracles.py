"""Brute-force reference implementations used to cross-check the library.

Deliberately naive: no indexes, no pruning beyond type filters.
"""
from __future__ import annotations

import random
from collections import Counter, deque
from itertools import permutations, product
from typing import Dict, FrozenSet, List, Optional, Tuple

from gtplan.graph import TypedGraph
from gtplan.gts import PlanningProblem, Rule, apply_rule
from gtplan.matcher import Morphism, Nac, Pattern

MatchKey = Tuple[FrozenSet[Tuple[str, str]], FrozenSet[Tuple[str, str]]]


def match_key(m: Morphism) -> MatchKey:
    return frozenset(m.node_map.items()), frozenset(m.edge_map.items())


def _edge_maps(pattern: TypedGraph, host: TypedGraph, nm: Dict[str, str]):
    pedges = list(pattern.edges)
    options = []
    for e in pedges:
        s, t, d = pattern.edges[e]
        options.append([h for h, data in host.edges.items() if data == (nm[s], t, nm[d])])

    def rec(i, chosen):
        if i == len(pedges):
            yield dict(zip(pedges, chosen))
            return
        for h in options[i]:
            if h not in chosen:
                chosen.append(h)
                yield from rec(i + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


def brute_matches(pattern: TypedGraph, host: TypedGraph) -> List[Morphism]:
    """Every injective type/name/structure preserving map, by trying all node injections."""
    pnodes = list(pattern.nodes)
    out = []
    for combo in permutations(host.nodes, len(pnodes)):
        nm = dict(zip(pnodes, combo))
        ok = True
        for p, h in nm.items():
            pt, pname = pattern.nodes[p]
            ht, hname = host.nodes[h]
            if pt != ht or (pname is not None and pname != hname):
                ok = False
                break
        if ok:
            out.extend(Morphism(nm, em) for em in _edge_maps(pattern, host, nm))
    return out


def brute_match_set(pattern: TypedGraph, host: TypedGraph) -> set:
    return {match_key(m) for m in brute_matches(pattern, host)}


def brute_nac_satisfied(m: Morphism, nac: Nac, host: TypedGraph) -> bool:
    """No injective q: N -> host with q(emb(x)) == m(x) for every LHS element x.

    The embedded part of q is forced by m; every injection of the remaining
    NAC nodes and edges is tried.
    """
    emb = nac.embedding
    n_graph = nac.n_graph
    fixed_nodes = {emb.node_map[x]: h for x, h in m.node_map.items()}
    fixed_edges = {emb.edge_map[x]: h for x, h in m.edge_map.items()}
    free = [n for n in n_graph.nodes if n not in fixed_nodes]
    spare = [h for h in host.nodes if h not in fixed_nodes.values()]
    for combo in permutations(spare, len(free)):
        nm = dict(fixed_nodes)
        nm.update(zip(free, combo))
        if any(n_graph.nodes[n][0] != host.nodes[h][0] or
               (n_graph.nodes[n][1] is not None and n_graph.nodes[n][1] != host.nodes[h][1])
               for n, h in nm.items()):
            continue
        for em in _edge_maps(n_graph, host, nm):
            if all(em[e] == h for e, h in fixed_edges.items()):
                return False
    return True


def brute_pattern_matches(p: Pattern, host: TypedGraph) -> set:
    return {match_key(m) for m in brute_matches(p.lhs, host)
            if all(brute_nac_satisfied(m, nac, host) for nac in p.nacs)}


def brute_isomorphic(g1: TypedGraph, g2: TypedGraph) -> bool:
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    if Counter(g1.nodes.values()) != Counter(g2.nodes.values()):
        return False
    want = Counter(g2.edges.values())
    # bijections that respect (type, name) classes
    classes: Dict[tuple, List[str]] = {}
    for n, data in g1.nodes.items():
        classes.setdefault(data, []).append(n)
    keys = list(classes)
    targets = {k: [n for n, d in g2.nodes.items() if d == k] for k in keys}
    for parts in product(*(permutations(targets[k]) for k in keys)):
        f = {}
        for k, perm in zip(keys, parts):
            f.update(zip(classes[k], perm))
        if Counter((f[s], t, f[d]) for s, t, d in g1.edges.values()) == want:
            return True
    return False


def brute_applicable(rules, host: TypedGraph) -> List[Tuple[Rule, Morphism]]:
    out = []
    for r in rules:
        for m in brute_matches(r.lhs, host):
            if all(brute_nac_satisfied(m, nac, host) for nac in r.nacs):
                out.append((r, m))
    return out


def _invariant(g: TypedGraph) -> tuple:
    return (tuple(sorted(Counter(g.nodes.values()).items(), key=repr)),
            tuple(sorted(Counter((g.nodes[s], t, g.nodes[d]) for s, t, d in g.edges.values()).items(),
                         key=repr)))


class IsoSet:
    """Set of graphs up to isomorphism, bucketed by a cheap invariant."""

    def __init__(self):
        self.buckets: Dict[tuple, List[Tuple[TypedGraph, int]]] = {}
        self.items: List[TypedGraph] = []

    def find(self, g: TypedGraph) -> Optional[int]:
        for other, idx in self.buckets.get(_invariant(g), []):
            if brute_isomorphic(g, other):
                return idx
        return None

    def add(self, g: TypedGraph) -> Tuple[int, bool]:
        idx = self.find(g)
        if idx is not None:
            return idx, False
        idx = len(self.items)
        self.items.append(g)
        self.buckets.setdefault(_invariant(g), []).append((g, idx))
        return idx, True


class StateSpace:
    """Exhaustive BFS of a planning problem with isomorphism-based deduplication."""

    def __init__(self, problem: PlanningProblem, max_states: int = 5000):
        self.problem = problem
        self.states = IsoSet()
        self.succ: Dict[int, List[int]] = {}
        root, _ = self.states.add(problem.initial)
        queue = deque([root])
        while queue:
            i = queue.popleft()
            g = self.states.items[i]
            self.succ[i] = []
            for r, m in brute_applicable(problem.rules, g):
                j, new = self.states.add(apply_rule(r, m, g))
                self.succ[i].append(j)
                if new:
                    if len(self.states.items) > max_states:
                        raise RuntimeError("state space larger than max_states")
                    queue.append(j)
        self.goals = {i for i, g in enumerate(self.states.items) if self._is_goal(g)}

    def _is_goal(self, g: TypedGraph) -> bool:
        return bool(brute_pattern_matches(self.problem.target, g))

    def __len__(self) -> int:
        return len(self.states.items)

    def distance_from_initial(self) -> Dict[int, int]:
        dist = {0: 0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in self.succ[i]:
                if j not in dist:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        return dist

    def optimal_length(self) -> Optional[int]:
        dist = self.distance_from_initial()
        found = [dist[g] for g in self.goals if g in dist]
        return min(found) if found else None

    def goal_distance(self) -> Dict[int, int]:
        """Shortest distance to a goal for every state that can reach one."""
        pred: Dict[int, List[int]] = {i: [] for i in self.succ}
        for i, js in self.succ.items():
            for j in js:
                pred[j].append(i)
        dist = {g: 0 for g in self.goals}
        queue = deque(self.goals)
        while queue:
            j = queue.popleft()
            for i in pred[j]:
                if i not in dist:
                    dist[i] = dist[j] + 1
                    queue.append(i)
        return dist


def type_multiset_oracle(g: TypedGraph) -> Counter:
    c: Counter = Counter()
    for t, _ in g.nodes.values():
        c[t] += 1
    for s, t, d in g.edges.values():
        c[(g.nodes[s][0], t, g.nodes[d][0])] += 1
    return c


# -- random graphs -------------------------------------------------------------

def random_graph(rng: random.Random, n_nodes: int, n_edges: int, node_types=("A", "B"),
                 edge_types=("e", "f"), names: int = 0, prefix: str = "v",
                 multi: bool = True) -> TypedGraph:
    nodes = []
    for k in range(n_nodes):
        name = f"N{k}" if k < names else None
        nodes.append((f"{prefix}{k}", rng.choice(node_types), name))
    ids = [n[0] for n in nodes]
    edges = []
    seen = set()
    for k in range(n_edges if ids else 0):
        s, d = rng.choice(ids), rng.choice(ids)
        t = rng.choice(edge_types)
        if not multi and (s, t, d) in seen:
            continue
        seen.add((s, t, d))
        edges.append((s, t, d, f"{prefix}e{k}"))
    return TypedGraph.from_elements(nodes, edges)


def relabeled(g: TypedGraph, rng: random.Random, prefix: str = "w") -> TypedGraph:
    """Isomorphic copy with shuffled fresh ids and shuffled insertion order."""
    nodes = list(g.nodes)
    perm = nodes[:]
    rng.shuffle(perm)
    f = {n: f"{prefix}{i}" for i, n in enumerate(perm)}
    new_nodes = [(f[n], *g.nodes[n]) for n in perm]
    edges = list(g.edges.items())
    rng.shuffle(edges)
    new_edges = [(f[s], t, f[d], f"{prefix}e{i}") for i, (_, (s, t, d)) in enumerate(edges)]
    return TypedGraph.from_elements(new_nodes, new_edges)


def random_subpattern(host: TypedGraph, rng: random.Random, k: int, keep_edge: float = 0.7,
                      keep_name: float = 0.5, prefix: str = "p") -> TypedGraph:
    """A pattern guaranteed to have at least one match: a random induced piece of ``host``."""
    chosen = rng.sample(list(host.nodes), min(k, len(host.nodes)))
    f = {n: f"{prefix}{i}" for i, n in enumerate(chosen)}
    nodes = []
    for n in chosen:
        t, name = host.nodes[n]
        nodes.append((f[n], t, name if rng.random() < keep_name else None))
    edges = []
    for e, (s, t, d) in host.edges.items():
        if s in f and d in f and rng.random() < keep_edge:
            edges.append((f[s], t, f[d], f"{prefix}e{len(edges)}"))
    return TypedGraph.from_elements(nodes, edges)


def bfs_plan_length(problem: PlanningProblem, max_states: int = 20000, brute: bool = True) -> Optional[int]:
    """Length of a shortest plan, stopping at the first goal layer; None if unsolvable.

    With ``brute=False`` the library matcher and canonical keys do the work,
    which is much faster and still exhaustive.
    """
    from gtplan.gts import applicable_transformations

    if brute:
        seen = IsoSet()
        is_goal = lambda g: bool(brute_pattern_matches(problem.target, g))  # noqa: E731
        successors = brute_applicable
        add = lambda g: seen.add(g)[1]  # noqa: E731
    else:
        seen_keys = set()
        is_goal = problem.is_goal
        successors = applicable_transformations

        def add(g):
            k = g.canonical_key()
            if k in seen_keys:
                return False
            seen_keys.add(k)
            return True
    add(problem.initial)
    layer = [problem.initial]
    depth = 0
    count = 1
    while layer:
        for g in layer:
            if is_goal(g):
                return depth
        nxt = []
        for g in layer:
            for r, m in successors(problem.rules, g):
                h = apply_rule(r, m, g)
                if add(h):
                    nxt.append(h)
        count += len(nxt)
        if count > max_states:
            raise RuntimeError("state space larger than max_states")
        layer = nxt
        depth += 1
    return None


def random_rule(rng: random.Random, host: TypedGraph, mode: str = "mixed", name: str = "r"):
    """A rule whose LHS is a random piece of ``host`` (so it has a match).

    ``mode``: "identity" (rhs = lhs), "pure" (only creations) or "mixed".
    """
    from gtplan.gts import Rule

    lhs = random_subpattern(host, rng, rng.randint(1, 3), keep_name=0.3)
    if mode == "identity":
        keep_n, keep_e = set(lhs.nodes), set(lhs.edges)
    elif mode == "pure":
        keep_n, keep_e = set(lhs.nodes), set(lhs.edges)
    else:
        keep_n = {n for n in lhs.nodes if rng.random() < 0.7}
        keep_e = {e for e, (s, _, d) in lhs.edges.items() if s in keep_n and d in keep_n and rng.random() < 0.7}
    nodes = [(n, *lhs.nodes[n]) for n in lhs.nodes if n in keep_n]
    edges = [(*lhs.edges[e], e) for e in lhs.edges if e in keep_e]
    if mode != "identity":
        for i in range(rng.randint(0, 2)):
            nodes.append((f"new{i}", rng.choice("AB"), None))
        ids = [n[0] for n in nodes]
        if ids:
            for i in range(rng.randint(0 if mode == "mixed" else 1, 3)):
                edges.append((rng.choice(ids), rng.choice("ef"), rng.choice(ids), f"newe{i}"))
    rhs = TypedGraph.from_elements(nodes, edges)
    return Rule(name, lhs, rhs, Morphism({n: n for n in keep_n}, {e: e for e in keep_e}))
