"""Benchmark problem generators: Blocks World and ECU reconfiguration.

Modelling choices for the ECU domain:

* ``shutdownNode`` also refuses an ECU that is already down, which keeps
  the state space finite.
* The target forbids, for every ECU that must go down, the instance of each
  component initially running there from running there in the goal
  ("no displaced component instance on its former ECU").
* With ``extra_instance`` an additional component with one instance is
  deployed and running on the first ECU.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .graph import TypedGraph
from .gts import PlanningProblem, Rule
from .matcher import Morphism, Nac, Pattern

Stacks = List[List[str]]  # bottom-to-top


def _graph(nodes: Iterable[tuple], edges: Iterable[tuple] = ()) -> TypedGraph:
    return TypedGraph.from_elements(nodes, [(s, t, d, f"{s}-{t}-{d}") for s, t, d in edges])


def _rule(name: str, lhs: TypedGraph, rhs: TypedGraph,
          nacs: Sequence[Tuple[Sequence[tuple], Sequence[tuple]]] = ()) -> Rule:
    nm = {n: n for n in lhs.nodes if n in rhs.nodes}
    em = {e: e for e in lhs.edges if e in rhs.edges}
    nac_objs = []
    for extra_nodes, extra_edges in nacs:
        b = lhs.to_builder()
        for n in extra_nodes:
            b.add_node(*n)
        for s, t, d in extra_edges:
            b.add_edge(s, t, d, eid=f"{s}-{t}-{d}")
        nac_objs.append(Nac.extending(lhs, b.build()))
    return Rule(name, lhs, rhs, Morphism(nm, em), tuple(nac_objs))


def _pattern(lhs: TypedGraph, nacs: Sequence[Tuple[Sequence[tuple], Sequence[tuple]]] = ()) -> Pattern:
    out = []
    for extra_nodes, extra_edges in nacs:
        b = lhs.to_builder()
        for n in extra_nodes:
            b.add_node(*n)
        for s, t, d in extra_edges:
            b.add_edge(s, t, d, eid=f"{s}-{t}-{d}")
        out.append(Nac.extending(lhs, b.build()))
    return Pattern(lhs, tuple(out))


# -- ECUs ------------------------------------------------------------------

ECU_NODE_TYPES = frozenset({"ECU", "Component", "Instance"})
ECU_EDGE_TYPES = frozenset({"runs", "instanceOf", "deployed", "down"})


def ecu_rules() -> Tuple[Rule, ...]:
    C, E, I = ("c", "Component"), ("e", "ECU"), ("i", "Instance")
    deploy = _rule(
        "deployComponent",
        _graph([C, E]),
        _graph([C, E], [("c", "deployed", "e")]),
        nacs=[([], [("c", "deployed", "e")]),
              ([], [("e", "down", "e")])])
    create = _rule(
        "createInstance",
        _graph([C, E], [("c", "deployed", "e")]),
        _graph([C, E, I], [("c", "deployed", "e"), ("i", "runs", "e"), ("i", "instanceOf", "c")]),
        nacs=[([], [("e", "down", "e")]),
              ([("j", "Instance")], [("j", "instanceOf", "c")])])
    destroy = _rule(
        "destroyInstance",
        _graph([I, E, C], [("i", "runs", "e"), ("i", "instanceOf", "c")]),
        _graph([E, C]))
    shutdown = _rule(
        "shutdownNode",
        _graph([E]),
        _graph([E], [("e", "down", "e")]),
        nacs=[([("j", "Instance")], [("j", "runs", "e")]),
              ([], [("e", "down", "e")])])
    return deploy, create, destroy, shutdown


@dataclass(frozen=True)
class EcusSpec:
    n_ecus: int
    extra_instance: bool = False
    seed: int = 0  # the generator is deterministic; kept for bench bookkeeping


def gen_ecus(spec: EcusSpec) -> PlanningProblem:
    n = spec.n_ecus
    if not isinstance(n, int) or n < 1:
        raise ValueError("n_ecus must be a positive integer")
    ecus = [f"n{k}" for k in range(1, n + 1)]
    comps = [f"c{k}" for k in range(1, n + 1)]
    hosts = list(ecus)  # hosts[k]: ECU running component k's instance
    if spec.extra_instance:
        comps.append(f"c{n + 1}")
        hosts.append(ecus[0])
    nodes = [(e, "ECU", e) for e in ecus] + [(c, "Component", c) for c in comps]
    nodes += [(f"i{k}", "Instance") for k in range(1, len(comps) + 1)]
    edges = []
    for k, (c, e) in enumerate(zip(comps, hosts), 1):
        edges += [(f"i{k}", "runs", e), (f"i{k}", "instanceOf", c), (c, "deployed", e)]
    initial = _graph(nodes, edges)

    down = ecus[0:2 * (n // 2):2]  # every second ECU, floor(n/2) of them
    t_nodes = [(e, "ECU", e) for e in down] + [(c, "Component", c) for c in comps]
    t_nodes += [(f"x{k}", "Instance") for k in range(1, len(comps) + 1)]
    t_edges = [(e, "down", e) for e in down]
    t_edges += [(f"x{k}", "instanceOf", c) for k, c in enumerate(comps, 1)]
    lhs = _graph(t_nodes, t_edges)
    nacs = [([], [(f"x{k}", "runs", e)])
            for k, e in enumerate(hosts, 1) if e in down]
    target = _pattern(lhs, nacs)
    suffix = "x" if spec.extra_instance else ""
    return PlanningProblem(ecu_rules(), initial, target, f"ecus-{n}{suffix}",
                           ECU_NODE_TYPES, ECU_EDGE_TYPES)


def ecus_instances(n: int) -> List[PlanningProblem]:
    """The four instances of one size: two plain, two with an extra instance.

    The generator has no randomness, so each pair is identical.
    """
    out = []
    for extra in (False, True):
        for seed in (0, 1):
            p = gen_ecus(EcusSpec(n, extra, seed))
            out.append(PlanningProblem(p.rules, p.initial, p.target, f"{p.name}-s{seed}",
                                       p.node_types, p.edge_types))
    return out


# -- Blocks World ------------------------------------------------------------

BW_NODE_TYPES = frozenset({"Block", "Table", "Arm"})
BW_EDGE_TYPES = frozenset({"on", "holds"})


def bw_rules() -> Tuple[Rule, ...]:
    A, B, C, T = ("a", "Arm"), ("b", "Block"), ("c", "Block"), ("t", "Table")
    clear_b = ([("x", "Block")], [("x", "on", "b")])
    arm_free = ([("y", "Block")], [("a", "holds", "y")])
    pick_table = _rule(
        "pickUpFromTable",
        _graph([A, B, T], [("b", "on", "t")]),
        _graph([A, B, T], [("a", "holds", "b")]),
        nacs=[clear_b, arm_free])
    pick_block = _rule(
        "pickUpFromBlock",
        _graph([A, B, C], [("b", "on", "c")]),
        _graph([A, B, C], [("a", "holds", "b")]),
        nacs=[clear_b, arm_free])
    put_table = _rule(
        "putDownOnTable",
        _graph([A, B, T], [("a", "holds", "b")]),
        _graph([A, B, T], [("b", "on", "t")]))
    put_block = _rule(
        "putDownOnBlock",
        _graph([A, B, C], [("a", "holds", "b")]),
        _graph([A, B, C], [("b", "on", "c")]),
        nacs=[([("x", "Block")], [("x", "on", "c")])])
    return pick_table, pick_block, put_table, put_block


def random_stacks(blocks: Sequence[str], rng: random.Random) -> Stacks:
    """Place blocks in random order, each on the table or on a random clear block."""
    order = list(blocks)
    rng.shuffle(order)
    stacks: Stacks = []
    for b in order:
        k = rng.randrange(len(stacks) + 1)
        if k == len(stacks):
            stacks.append([b])
        else:
            stacks[k].append(b)
    return stacks


def _stack_edges(stacks: Stacks) -> List[tuple]:
    edges = []
    for st in stacks:
        edges.append((st[0], "on", "table"))
        edges += [(up, "on", down) for down, up in zip(st, st[1:])]
    return edges


def check_stacks(stacks: Stacks, blocks: Sequence[str]) -> None:
    flat = [b for st in stacks for b in st]
    if sorted(flat) != sorted(blocks) or any(not st for st in stacks):
        raise ValueError("every block must appear in exactly one stack")


@dataclass(frozen=True)
class BlocksWorldSpec:
    n_blocks: int
    seed: int = 0
    initial: Optional[Tuple[Tuple[str, ...], ...]] = None
    target: Optional[Tuple[Tuple[str, ...], ...]] = None


def block_names(n: int) -> List[str]:
    return [f"b{k}" for k in range(1, n + 1)]


def gen_blocksworld(spec: BlocksWorldSpec) -> PlanningProblem:
    n = spec.n_blocks
    if not isinstance(n, int) or n < 1:
        raise ValueError("n_blocks must be a positive integer")
    blocks = block_names(n)
    rng = random.Random(spec.seed)
    init = [list(s) for s in spec.initial] if spec.initial else random_stacks(blocks, rng)
    goal = [list(s) for s in spec.target] if spec.target else random_stacks(blocks, rng)
    check_stacks(init, blocks)
    check_stacks(goal, blocks)
    nodes = [(b, "Block", b) for b in blocks] + [("table", "Table"), ("arm", "Arm")]
    initial = _graph(nodes, _stack_edges(init))
    lhs = _graph([(b, "Block", b) for b in blocks] + [("table", "Table")], _stack_edges(goal))
    return PlanningProblem(bw_rules(), initial, Pattern(lhs), f"bw-{n}-s{spec.seed}",
                           BW_NODE_TYPES, BW_EDGE_TYPES)


def blocksworld_instances(n: int, seed: int = 0) -> List[PlanningProblem]:
    """Cross product of two random initial and two random target configurations."""
    blocks = block_names(n)
    rng = random.Random(seed * 7919 + n)
    inits = [random_stacks(blocks, rng) for _ in range(2)]
    goals = [random_stacks(blocks, rng) for _ in range(2)]
    out = []
    for i, ini in enumerate(inits):
        for j, goal in enumerate(goals):
            p = gen_blocksworld(BlocksWorldSpec(n, seed, tuple(map(tuple, ini)), tuple(map(tuple, goal))))
            out.append(PlanningProblem(p.rules, p.initial, p.target, f"bw-{n}-s{seed}-{i}{j}",
                                       p.node_types, p.edge_types))
    return out


def stacks_of(state: TypedGraph) -> Tuple[Stacks, Optional[str]]:
    """Decode a Blocks World state into stacks and the held block.

    Raises ValueError if the state violates the domain's legality rules.
    """
    table = state.nodes_of_type("Table")
    arms = state.nodes_of_type("Arm")
    if len(table) != 1 or len(arms) != 1:
        raise ValueError("expected exactly one table and one arm")
    held = [state.tgt(e) for e in state.out_edges(arms[0], "holds")]
    if len(held) > 1:
        raise ValueError("arm holds more than one block")
    below = {}
    for b in state.nodes_of_type("Block"):
        ons = state.out_edges(b, "on")
        holders = state.in_edges(b, "holds")
        if len(ons) + len(holders) != 1:
            raise ValueError(f"block {b} must be on exactly one thing or held")
        if ons:
            below[b] = state.tgt(ons[0])
    above = {}
    for b, d in below.items():
        if d != table[0]:
            if d in above:
                raise ValueError(f"two blocks on {d}")
            above[d] = b
    name = state.node_name
    stacks = []
    for b, d in below.items():
        if d == table[0]:
            st = [b]
            while st[-1] in above:
                st.append(above[st[-1]])
                if len(st) > len(below):
                    raise ValueError("cycle in on relation")
            stacks.append([name(x) or x for x in st])
    if sum(map(len, stacks)) != len(below):
        raise ValueError("cycle in on relation")
    return sorted(stacks), (name(held[0]) or held[0]) if held else None
