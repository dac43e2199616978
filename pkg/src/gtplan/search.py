"""Forward state-space search: greedy best-first, enforced hill-climbing, A*."""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .graph import CanonicalKey, TypedGraph, is_isomorphic
from .gts import Plan, PlanningProblem, apply_rule, applicable_transformations, plan_step, validate_plan
from .heuristics import INF, HeuristicConfig, make_heuristic

log = logging.getLogger(__name__)


@dataclass
class SearchNode:
    state: TypedGraph
    key: CanonicalKey
    h: float = 0.0
    parent: Optional["SearchNode"] = None
    step: Optional[Tuple[str, Tuple[str, ...]]] = None
    depth: int = 0

    def plan(self) -> Plan:
        steps = []
        node = self
        while node.parent is not None:
            steps.append(node.step)
            node = node.parent
        return Plan(steps[::-1])


@dataclass
class SearchStats:
    generated_states: int = 0
    expanded_states: int = 0
    heuristic_calls: int = 0
    heuristic_time: float = 0.0
    total_time: float = 0.0
    plan_length: Optional[int] = None

    @property
    def heuristic_time_fraction(self) -> float:
        return self.heuristic_time / self.total_time if self.total_time > 0 else 0.0


@dataclass
class Limits:
    time: Optional[float] = None  # seconds
    max_states: Optional[int] = None


@dataclass
class SearchResult:
    plan: Optional[Plan]
    status: str  # "solved", "timeout", "state-limit", "exhausted", "dead end"
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def solved(self) -> bool:
        return self.plan is not None


class _Budget(Exception):
    def __init__(self, status):
        self.status = status


class _Context:
    """Shared bookkeeping: heuristic timing, limits, statistics."""

    def __init__(self, problem: PlanningProblem, heuristic: Callable, limits: Limits, audit: bool):
        self.problem = problem
        self.heuristic = heuristic
        self.limits = limits
        self.stats = SearchStats()
        self.start = time.perf_counter()
        self.audit = audit
        self.expanded_keys: Dict[CanonicalKey, TypedGraph] = {}
        self.h_cache: Dict[CanonicalKey, float] = {}

    def h(self, state: TypedGraph, key: Optional[CanonicalKey] = None) -> float:
        if key is not None and key in self.h_cache:
            return self.h_cache[key]
        t0 = time.perf_counter()
        v = self.heuristic(state)
        self.stats.heuristic_time += time.perf_counter() - t0
        self.stats.heuristic_calls += 1
        if key is not None:
            self.h_cache[key] = v
        return v

    def check(self) -> None:
        lim = self.limits
        if lim.time is not None and time.perf_counter() - self.start > lim.time:
            raise _Budget("timeout")
        if lim.max_states is not None and self.stats.generated_states >= lim.max_states:
            raise _Budget("state-limit")

    def note_expanded(self, node: SearchNode) -> None:
        self.stats.expanded_states += 1
        if self.audit:
            other = self.expanded_keys.get(node.key)
            assert other is None, "state expanded twice"
            for g in self.expanded_keys.values():
                assert not is_isomorphic(g, node.state), "isomorphic states expanded under different keys"
            self.expanded_keys[node.key] = node.state

    def finish(self, plan: Optional[Plan], status: str) -> SearchResult:
        self.stats.total_time = time.perf_counter() - self.start
        if plan is not None:
            self.stats.plan_length = len(plan)
            check = validate_plan(self.problem, plan)
            if not check:
                raise AssertionError(f"search produced an invalid plan: {check.reason}")
        return SearchResult(plan, status, self.stats)


def expand(node: SearchNode, problem: PlanningProblem, seen: set) -> List[SearchNode]:
    """Successors of ``node`` whose canonical key is not yet in ``seen``.

    New keys are added to ``seen``. Heuristic values are left at 0.
    """
    out = []
    for rule, m in applicable_transformations(problem.rules, node.state):
        succ = apply_rule(rule, m, node.state, check=False)
        key = succ.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        out.append(SearchNode(succ, key, 0.0, node, plan_step(rule, m), node.depth + 1))
    return out


def _root(problem: PlanningProblem) -> SearchNode:
    return SearchNode(problem.initial, problem.initial.canonical_key())


def _best_first(ctx: _Context, root: SearchNode, priority: Callable[[SearchNode], tuple],
                stop: Callable[[SearchNode], bool], seen: set) -> Optional[SearchNode]:
    """Generic best-first loop. Returns the first generated node with ``stop(node)``,
    or None when the open list runs dry."""
    counter = itertools.count()
    open_list = [(priority(root), next(counter), root)]
    while open_list:
        ctx.check()
        _, _, node = heapq.heappop(open_list)
        ctx.note_expanded(node)
        for child in expand(node, ctx.problem, seen):
            ctx.stats.generated_states += 1
            child.h = ctx.h(child.state)
            if stop(child):
                return child
            if child.h != INF:
                heapq.heappush(open_list, (priority(child), next(counter), child))
            ctx.check()
    return None


def _run(problem, heuristic, limits, audit, cfg, body) -> SearchResult:
    if isinstance(heuristic, str):
        heuristic = make_heuristic(heuristic, problem, cfg or HeuristicConfig())
    ctx = _Context(problem, heuristic, limits or Limits(), audit)
    try:
        plan, status = body(ctx)
    except _Budget as b:
        plan, status = None, b.status
    return ctx.finish(plan, status)


def greedy_best_first(problem: PlanningProblem, heuristic="abs", limits: Optional[Limits] = None,
                      cfg: Optional[HeuristicConfig] = None, audit: bool = False) -> SearchResult:
    """Expand the open node with least h; ties by depth, then insertion order."""

    def body(ctx):
        root = _root(problem)
        ctx.stats.generated_states = 1
        if problem.is_goal(root.state):
            return Plan(), "solved"
        root.h = ctx.h(root.state)
        if root.h == INF:
            return None, "exhausted"
        goal = _best_first(ctx, root, lambda n: (n.h, n.depth), lambda n: problem.is_goal(n.state),
                           {root.key})
        return (goal.plan(), "solved") if goal else (None, "exhausted")

    return _run(problem, heuristic, limits, audit, cfg, body)


def astar(problem: PlanningProblem, heuristic="abs", limits: Optional[Limits] = None,
          cfg: Optional[HeuristicConfig] = None, audit: bool = False) -> SearchResult:
    """Order by depth + h. With these inadmissible heuristics plans are not guaranteed optimal."""

    def body(ctx):
        root = _root(problem)
        ctx.stats.generated_states = 1
        if problem.is_goal(root.state):
            return Plan(), "solved"
        root.h = ctx.h(root.state)
        if root.h == INF:
            return None, "exhausted"
        goal = _best_first(ctx, root, lambda n: (n.depth + n.h, n.h), lambda n: problem.is_goal(n.state),
                           {root.key})
        return (goal.plan(), "solved") if goal else (None, "exhausted")

    return _run(problem, heuristic, limits, audit, cfg, body)


def enforced_hill_climbing(problem: PlanningProblem, heuristic="abs", limits: Optional[Limits] = None,
                           cfg: Optional[HeuristicConfig] = None, audit: bool = False) -> SearchResult:
    """Repeated greedy best-first episodes, each stopping at the first state with
    strictly smaller h (or a goal). No restarts: an episode that runs dry fails."""

    def body(ctx):
        root = _root(problem)
        ctx.stats.generated_states = 1
        if problem.is_goal(root.state):
            return Plan(), "solved"
        root.h = ctx.h(root.state)
        if root.h == INF:
            return None, "dead end"
        everything = {root.key}
        current = root
        while True:
            episode_seen = {current.key}

            def better(n, bar=current.h):
                return n.h < bar or problem.is_goal(n.state)

            found = _best_first_episode(ctx, current, better, episode_seen, everything)
            if found is None:
                return None, "dead end"
            if problem.is_goal(found.state):
                return found.plan(), "solved"
            # re-root so the next episode's depths start from zero
            current = found

    return _run(problem, heuristic, limits, audit, cfg, body)


def _best_first_episode(ctx, start, stop, seen, everything):
    # generated_states counts distinct states over the whole run
    counter = itertools.count()
    open_list = [((start.h, 0), next(counter), start)]
    while open_list:
        ctx.check()
        _, _, node = heapq.heappop(open_list)
        ctx.stats.expanded_states += 1
        for child in expand(node, ctx.problem, seen):
            if child.key not in everything:
                everything.add(child.key)
                ctx.stats.generated_states += 1
            child.h = ctx.h(child.state, child.key)
            if stop(child):
                return child
            if child.h != INF:
                heapq.heappush(open_list, ((child.h, child.depth - start.depth), next(counter), child))
            ctx.check()
    return None


ALGORITHMS = {"gbf": greedy_best_first, "ehc": enforced_hill_climbing, "astar": astar}


def solve(problem: PlanningProblem, heuristic: str = "abs", algorithm: str = "gbf",
          limits: Optional[Limits] = None, cfg: Optional[HeuristicConfig] = None,
          audit: bool = False) -> SearchResult:
    try:
        algo = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return algo(problem, heuristic, limits, cfg, audit)
