"""Heuristics: type-multiset similarity (``sim``) and abstraction-based (``abs``).

The abstraction heuristic builds a linear sequence of monotone abstract
states. Each step fires every relaxed-applicable (rule, match) pair in
parallel: deleted elements stay in the graph with a deleted mark, created
elements are added with a created mark. A NAC only blocks an application if
one of its matches lies entirely on unmarked elements.

Every application gets a label ``(iteration, rule, match index)``. Two label
sets are tracked per element:

* ``labels``: applications that made the element available. A created
  element holds its own label plus the ``labels`` of everything in the LHS
  match and the deletion labels found in the NAC matches that licensed it.
* ``del_labels``: applications that deleted the element, with the same
  inherited support. These travel only through NAC matches.

The estimate is the smallest number of distinct ``labels`` over goal matches
in the first abstract state where the target matches. Goal matching treats
deleted elements as present; target NACs are checked strictly against the
abstract graph.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Set, Tuple

from .graph import GraphBuilder, TypedGraph
from .gts import PlanningProblem, Rule
from .matcher import (Morphism, Nac, Pattern, edge_nac_violated, iter_matches, nac_extensions,
                      nac_satisfied)

INF = math.inf

Label = Tuple[int, str, int]  # (iteration, rule name, match index)
EMPTY: FrozenSet[Label] = frozenset()


@dataclass(frozen=True)
class HeuristicConfig:
    max_abstract_depth: int = 1000
    per_state_cap_factor: float = 2.0
    # also carry deletion labels of LHS elements into created elements
    lhs_all_labels: bool = False

    def __post_init__(self):
        if self.max_abstract_depth <= 0 or self.per_state_cap_factor <= 0:
            raise ValueError("heuristic limits must be positive")


# -- similarity heuristic --------------------------------------------------

def type_multiset(g: TypedGraph) -> Counter:
    """Node types plus (source type, edge type, target type) keys."""
    ms = Counter(t for t, _ in g.nodes.values())
    for s, t, d in g.edges.values():
        ms[(g.node_type(s), t, g.node_type(d))] += 1
    return ms


def h_sim(state: TypedGraph, target: Pattern) -> int:
    want = target.lhs._cache.get("type_multiset")
    if want is None:
        want = target.lhs._cache["type_multiset"] = type_multiset(target.lhs)
    return -sum((type_multiset(state) & want).values())


# -- abstract states ---------------------------------------------------------

@dataclass
class AbstractState:
    graph: TypedGraph
    created: Set[str] = field(default_factory=set)
    deleted: Set[str] = field(default_factory=set)
    labels: Dict[str, FrozenSet[Label]] = field(default_factory=dict)
    del_labels: Dict[str, FrozenSet[Label]] = field(default_factory=dict)
    applied: Set[Tuple[str, FrozenSet[str]]] = field(default_factory=set)
    iteration: int = 0

    @classmethod
    def initial(cls, g: TypedGraph) -> "AbstractState":
        return cls(g)

    def status(self, x: str) -> str:
        if x in self.deleted:
            return "deleted"
        if x in self.created:
            return "created"
        return "normal"

    def is_normal(self, x: str) -> bool:
        return x not in self.deleted and x not in self.created

    def all_labels(self, x: str) -> FrozenSet[Label]:
        return self.labels.get(x, EMPTY) | self.del_labels.get(x, EMPTY)


@dataclass
class Application:
    rule: Rule
    match: Morphism
    nac_support: FrozenSet[Label]


def _relaxed_license(a: AbstractState, m: Morphism, nacs: Tuple[Nac, ...]) -> Optional[FrozenSet[Label]]:
    """None if some NAC match lies entirely on unmarked elements; otherwise
    the deletion labels found in all NAC matches."""
    support: Set[Label] = set()
    for nac in nacs:
        ext = nac.extension_elements()
        for q in nac_extensions(m, nac, a.graph):
            imgs = [q(x) for x in ext]
            if all(a.is_normal(h) for h in imgs):
                return None
            for h in imgs:
                if h in a.deleted:
                    support |= a.del_labels.get(h, EMPTY)
    return frozenset(support)


def _relaxed_apps(a: AbstractState, rules) -> List[Application]:
    out = []
    for r in rules:
        found = []
        for m in iter_matches(r.lhs, a.graph):
            key = (r.name, m.image())
            if key in a.applied:
                continue
            sup = _relaxed_license(a, m, r.nacs)
            if sup is not None:
                found.append(Application(r, m, sup))
        found.sort(key=lambda app: app.match.encode(r.lhs))
        out.extend(found)
    return out


def relaxed_applicable(a: AbstractState, rules) -> List[Tuple[Rule, Morphism]]:
    return [(app.rule, app.match) for app in _relaxed_apps(a, rules)]


def abstract_step(a: AbstractState, rules, iteration: int,
                  cfg: HeuristicConfig = HeuristicConfig(),
                  apps: Optional[List[Application]] = None) -> AbstractState:
    if iteration < 1:
        raise ValueError("iteration must be >= 1")
    if apps is None:
        apps = _relaxed_apps(a, rules)
    g = a.graph
    b = GraphBuilder()
    b.nodes = dict(g.nodes)
    b.edges = dict(g.edges)
    b.next_id = g.next_id
    created = set(a.created)
    deleted = set(a.deleted)
    labels = dict(a.labels)
    del_labels = dict(a.del_labels)
    applied = set(a.applied)
    old_keys = {v for v in g.edges.values()}
    counter: Dict[str, int] = {}

    for app in apps:
        r, m = app.rule, app.match
        idx = counter[r.name] = counter.get(r.name, 0) + 1
        own: Label = (iteration, r.name, idx)
        img = m.image()
        inherited = set(app.nac_support)
        for x in img:
            inherited |= a.labels.get(x, EMPTY)
            if cfg.lhs_all_labels:
                inherited |= a.del_labels.get(x, EMPTY)
        inherited.add(own)
        tag = frozenset(inherited)

        doomed = [m.edge_map[e] for e in r.deleted_edges]
        for n in r.deleted_nodes:
            h = m.node_map[n]
            doomed.append(h)
            doomed += g.incident_edges(h)
        for x in doomed:
            deleted.add(x)
            del_labels[x] = del_labels.get(x, EMPTY) | tag

        rhs_img = {r.morphism.node_map[n]: m.node_map[n] for n in r.morphism.node_map}
        for n in r.created_nodes:
            t, name = r.rhs.nodes[n]
            nid = b.fresh_id()
            b.nodes[nid] = (t, None)
            rhs_img[n] = nid
            created.add(nid)
            labels[nid] = tag
        for e in r.created_edges:
            s, t, d = r.rhs.edges[e]
            key = (rhs_img[s], t, rhs_img[d])
            if key in old_keys:
                # already available before this step; keep its earlier support
                continue
            eid = b.fresh_id()
            b.edges[eid] = key
            created.add(eid)
            labels[eid] = tag
        applied.add((r.name, img))

    return AbstractState(b.build(), created, deleted, labels, del_labels, applied, iteration)


# -- abstraction heuristic -----------------------------------------------------

def _goal_value(a: AbstractState, target: Pattern) -> Optional[int]:
    """Least label count over goal matches (branch and bound on the node map)."""
    labels = a.labels
    best = [None]
    early = [d for d in (nac.edge_demand() for nac in target.nacs) if d is not None]

    def prune(nm: Dict[str, str]) -> bool:
        for touched, demand in early:
            if touched.issubset(nm) and edge_nac_violated(demand, nm, a.graph):
                return True
        if best[0] is None:
            return False
        support: Set[Label] = set()
        for h in nm.values():
            support |= labels.get(h, EMPTY)
        return len(support) >= best[0]

    def cheap_first(h: str):
        return len(labels.get(h, EMPTY)), h

    for m in iter_matches(target.lhs, a.graph, prune, cheap_first):
        support: Set[Label] = set()
        for x in m.image():
            support |= labels.get(x, EMPTY)
        if best[0] is not None and len(support) >= best[0]:
            continue
        if not all(nac_satisfied(m, nac, a.graph) for nac in target.nacs):
            continue
        best[0] = len(support)
        if best[0] == 0:
            break
    return best[0]


@dataclass
class AbstractResult:
    value: float
    depth: Optional[int]  # abstract steps until the goal matched
    reason: str  # "goal", "cap" or "fixpoint"
    states: Optional[List[AbstractState]] = None


def abstract_sequence(state: TypedGraph, problem: PlanningProblem,
                      cfg: HeuristicConfig = HeuristicConfig(),
                      cap: Optional[int] = None, keep_states: bool = False) -> AbstractResult:
    if cap is None:
        cap = cfg.max_abstract_depth
    a = AbstractState.initial(state)
    kept = [a] if keep_states else None
    depth = 0
    while True:
        v = _goal_value(a, problem.target)
        if v is not None:
            return AbstractResult(v, depth, "goal", kept)
        if depth >= cap:
            return AbstractResult(INF, None, "cap", kept)
        apps = _relaxed_apps(a, problem.rules)
        if not apps:
            return AbstractResult(INF, None, "fixpoint", kept)
        depth += 1
        a = abstract_step(a, problem.rules, depth, cfg, apps)
        if keep_states:
            kept.append(a)


def h_abs(state: TypedGraph, problem: PlanningProblem,
          cfg: HeuristicConfig = HeuristicConfig(), cap: Optional[int] = None) -> float:
    return abstract_sequence(state, problem, cfg, cap).value


def bootstrap_cap(problem: PlanningProblem, cfg: HeuristicConfig) -> Tuple[float, int]:
    """Heuristic value of the initial state and the step cap used for all other states."""
    h0 = h_abs(problem.initial, problem, cfg, cfg.max_abstract_depth)
    if h0 == INF:
        return h0, cfg.max_abstract_depth
    return h0, int(math.ceil(cfg.per_state_cap_factor * h0))


class AbstractionHeuristic:
    name = "abs"

    def __init__(self, problem: PlanningProblem, cfg: HeuristicConfig = HeuristicConfig()):
        self.problem = problem
        self.cfg = cfg
        self.h0: Optional[float] = None
        self.cap: Optional[int] = None

    def __call__(self, state: TypedGraph) -> float:
        if self.cap is None:
            self.h0, self.cap = bootstrap_cap(self.problem, self.cfg)
            if state is self.problem.initial:
                return self.h0
        return h_abs(state, self.problem, self.cfg, self.cap)


class SimilarityHeuristic:
    name = "sim"

    def __init__(self, problem: PlanningProblem, cfg: HeuristicConfig = HeuristicConfig()):
        self.target = problem.target

    def __call__(self, state: TypedGraph) -> float:
        return h_sim(state, self.target)


HEURISTICS: Dict[str, Callable] = {"abs": AbstractionHeuristic, "sim": SimilarityHeuristic}


def make_heuristic(name: str, problem: PlanningProblem, cfg: HeuristicConfig = HeuristicConfig()):
    try:
        return HEURISTICS[name](problem, cfg)
    except KeyError:
        raise ValueError(f"unknown heuristic {name!r}; choose from {sorted(HEURISTICS)}") from None
