"""Rules, single-pushout derivations, planning problems and plan replay."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .graph import TypedGraph
from .matcher import (Morphism, Nac, Pattern, decode_match, has_match, is_morphism,
                      iter_matches, nac_satisfied)


class InvalidMatch(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: TypedGraph
    rhs: TypedGraph
    morphism: Morphism  # partial, lhs -> rhs
    nacs: Tuple[Nac, ...] = ()

    def __post_init__(self):
        nm, em = self.morphism.node_map, self.morphism.edge_map
        if len(set(nm.values())) != len(nm) or len(set(em.values())) != len(em):
            raise ValueError(f"rule {self.name}: rule morphism is not injective")
        for n, r in nm.items():
            if self.lhs.node_type(n) != self.rhs.node_type(r):
                raise ValueError(f"rule {self.name}: node {n} changes type")
        for e, r in em.items():
            s, t, d = self.lhs.edges[e]
            if self.rhs.edges[r] != (nm.get(s), t, nm.get(d)):
                raise ValueError(f"rule {self.name}: preserved edge {e} is not structure-preserving")
        for nac in self.nacs:
            if set(nac.embedding.node_map) != set(self.lhs.nodes) or \
                    set(nac.embedding.edge_map) != set(self.lhs.edges):
                raise ValueError(f"rule {self.name}: NAC embedding is not total on the LHS")

    @property
    def deleted_nodes(self) -> List[str]:
        return [n for n in self.lhs.nodes if n not in self.morphism.node_map]

    @property
    def deleted_edges(self) -> List[str]:
        return [e for e in self.lhs.edges if e not in self.morphism.edge_map]

    @property
    def created_nodes(self) -> List[str]:
        kept = set(self.morphism.node_map.values())
        return [n for n in self.rhs.nodes if n not in kept]

    @property
    def created_edges(self) -> List[str]:
        kept = set(self.morphism.edge_map.values())
        return [e for e in self.rhs.edges if e not in kept]

    @property
    def pattern(self) -> Pattern:
        return Pattern(self.lhs, self.nacs)


@dataclass(frozen=True)
class PlanningProblem:
    rules: Tuple[Rule, ...]
    initial: TypedGraph
    target: Pattern
    name: str = "problem"
    node_types: FrozenSet[str] = frozenset()
    edge_types: FrozenSet[str] = frozenset()

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("rule names must be unique")
        if self.node_types or self.edge_types:
            graphs = [self.initial, self.target.lhs] + [n.n_graph for n in self.target.nacs]
            for r in self.rules:
                graphs += [r.lhs, r.rhs] + [n.n_graph for n in r.nacs]
            for g in graphs:
                bad = {t for t, _ in g.nodes.values()} - self.node_types
                bad |= {t for _, t, _ in g.edges.values()} - self.edge_types
                if bad:
                    raise ValueError(f"undeclared types: {', '.join(sorted(bad))}")

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def is_goal(self, state: TypedGraph) -> bool:
        return has_match(self.target, state)


@dataclass
class Plan:
    steps: List[Tuple[str, Tuple[str, ...]]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def apply_rule(rule: Rule, m: Morphism, host: TypedGraph, check: bool = True) -> TypedGraph:
    """SPO direct derivation of ``host`` with ``rule`` at ``m``.

    Deleting a node removes its incident edges too. A created edge that
    duplicates an existing edge (same type and endpoints) is not added.
    """
    if check:
        if not is_morphism(rule.lhs, host, m):
            raise InvalidMatch(f"{rule.name}: not a match of the LHS")
        for i, nac in enumerate(rule.nacs):
            if not nac_satisfied(m, nac, host):
                raise InvalidMatch(f"{rule.name}: NAC #{i + 1} is violated")
    b = host.to_builder()
    for e in rule.deleted_edges:
        b.edges.pop(m.edge_map[e], None)
    for n in rule.deleted_nodes:
        b.remove_node(m.node_map[n])
    rhs_img: Dict[str, str] = {rule.morphism.node_map[n]: m.node_map[n] for n in rule.morphism.node_map}
    for n in rule.created_nodes:
        t, name = rule.rhs.nodes[n]
        rhs_img[n] = b.add_node(None, t, name)
    existing = {v for v in b.edges.values()}
    for e in rule.created_edges:
        s, t, d = rule.rhs.edges[e]
        key = (rhs_img[s], t, rhs_img[d])
        if key in existing:
            continue
        b.add_edge(*key)
        existing.add(key)
    return b.build()


def applicable_transformations(rules: Iterable[Rule], host: TypedGraph) -> List[Tuple[Rule, Morphism]]:
    """(rule, match) pairs with every NAC satisfied; rules in given order, matches by image."""
    out = []
    for r in rules:
        ms = [m for m in iter_matches(r.lhs, host)
              if all(nac_satisfied(m, nac, host) for nac in r.nacs)]
        ms.sort(key=lambda m: m.encode(r.lhs))
        out.extend((r, m) for m in ms)
    return out


@dataclass
class ValidationResult:
    ok: bool
    failed_step: Optional[int] = None  # 0-based; len(plan) means the goal check failed
    reason: str = ""
    final_state: Optional[TypedGraph] = None

    def __bool__(self) -> bool:
        return self.ok


def replay(problem: PlanningProblem, plan: Plan) -> List[TypedGraph]:
    """States G0..Gk along the plan; raises InvalidMatch tagged with the step index."""
    states = [problem.initial]
    for i, (rname, image) in enumerate(plan.steps):
        try:
            rule = problem.rule(rname)
        except KeyError:
            raise InvalidMatch(f"step {i}: unknown rule {rname!r}") from None
        try:
            m = decode_match(rule.lhs, image)
            states.append(apply_rule(rule, m, states[-1]))
        except (InvalidMatch, ValueError) as exc:
            raise InvalidMatch(f"step {i}: {exc}") from None
    return states


def validate_plan(problem: PlanningProblem, plan: Plan) -> ValidationResult:
    state = problem.initial
    for i, (rname, image) in enumerate(plan.steps):
        try:
            rule = problem.rule(rname)
        except KeyError:
            return ValidationResult(False, i, f"unknown rule {rname!r}", state)
        try:
            m = decode_match(rule.lhs, image)
            state = apply_rule(rule, m, state)
        except (InvalidMatch, ValueError) as exc:
            return ValidationResult(False, i, str(exc), state)
    if not problem.is_goal(state):
        return ValidationResult(False, len(plan.steps), "target pattern has no match", state)
    return ValidationResult(True, None, "", state)


def plan_step(rule: Rule, m: Morphism) -> Tuple[str, Tuple[str, ...]]:
    return rule.name, m.encode(rule.lhs)


def plan_from_matches(pairs: Sequence[Tuple[Rule, Morphism]]) -> Plan:
    return Plan([plan_step(r, m) for r, m in pairs])
