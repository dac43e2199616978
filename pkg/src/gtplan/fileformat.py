"""Reading and writing problem files and plan files.

Problem files are line oriented. ``#`` starts a comment. Grammar::

    problem <name>
    node-types <Type> ...
    edge-types <type> ...

    initial
      node <id> <Type> [name=<name>]
      edge <src> <type> <tgt> [id=<id>]
    end

    rule <name>
      lhs
        <node/edge lines>
      rhs
        <node/edge lines>
      nac                      # repeatable
        <node/edge lines>
    end

    target
      lhs
        <node/edge lines>
      nac
        <node/edge lines>
    end

Element ids are local to a block. A node or edge id used in both ``lhs``
and ``rhs`` of a rule is preserved by the rule; lhs-only elements are
deleted and rhs-only elements are created. An edge without ``id=`` gets
the id ``<src>-<type>-<tgt>``. NAC sections extend the LHS: they may refer
to LHS nodes without redeclaring them and add NAC-only nodes and edges.
Ids must not start with ``_`` (reserved for generated elements).

Plan files hold one step per line: the rule name followed by the host ids
of the rule's LHS image, nodes first, in LHS declaration order.
"""
from __future__ import annotations

import shlex
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .graph import GraphBuilder, GraphError, TypedGraph
from .gts import Plan, PlanningProblem, Rule
from .matcher import Morphism, Nac, Pattern


class ProblemFormatError(ValueError):
    def __init__(self, line: Optional[int], msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


def _auto_edge_id(s: str, t: str, d: str) -> str:
    return f"{s}-{t}-{d}"


class _Section:
    """Element lines collected for one graph (lhs, rhs, nac, initial)."""

    def __init__(self, kind: str, line: int):
        self.kind = kind
        self.line = line
        self.nodes: List[Tuple[int, str, str, Optional[str]]] = []
        self.edges: List[Tuple[int, str, str, str, str]] = []


def _parse_element(toks: List[str], lineno: int, sec: _Section) -> None:
    opts = {}
    args = []
    for t in toks[1:]:
        if "=" in t:
            k, v = t.split("=", 1)
            opts[k] = v
        else:
            args.append(t)
    if toks[0] == "node":
        if len(args) != 2 or set(opts) - {"name"}:
            raise ProblemFormatError(lineno, "expected: node <id> <Type> [name=<name>]")
        nid, typ = args
        if nid.startswith("_"):
            raise ProblemFormatError(lineno, f"id {nid!r} may not start with '_'")
        sec.nodes.append((lineno, nid, typ, opts.get("name")))
    elif toks[0] == "edge":
        if len(args) != 3 or set(opts) - {"id"}:
            raise ProblemFormatError(lineno, "expected: edge <src> <type> <tgt> [id=<id>]")
        s, t, d = args
        eid = opts.get("id") or _auto_edge_id(s, t, d)
        if eid.startswith("_"):
            raise ProblemFormatError(lineno, f"id {eid!r} may not start with '_'")
        sec.edges.append((lineno, eid, s, t, d))
    else:
        raise ProblemFormatError(lineno, f"unexpected {toks[0]!r} (expected node or edge)")


def _build(sec: _Section, base: Optional[TypedGraph] = None) -> TypedGraph:
    b = GraphBuilder() if base is None else base.to_builder()
    for lineno, nid, typ, name in sec.nodes:
        if base is not None and nid in base.nodes:
            if base.nodes[nid] != (typ, name):
                raise ProblemFormatError(lineno, f"node {nid!r} redeclared with different type or name")
            continue
        try:
            b.add_node(nid, typ, name)
        except GraphError as exc:
            raise ProblemFormatError(lineno, str(exc)) from None
    for lineno, eid, s, t, d in sec.edges:
        if base is not None and eid in base.edges:
            if base.edges[eid] != (s, t, d):
                raise ProblemFormatError(lineno, f"edge {eid!r} redeclared differently")
            continue
        try:
            b.add_edge(s, t, d, eid=eid)
        except GraphError as exc:
            raise ProblemFormatError(lineno, str(exc)) from None
    try:
        g = b.build()
    except GraphError as exc:
        raise ProblemFormatError(sec.line, str(exc)) from None
    g.next_id = 0
    return g


def _pattern(sections: List[_Section], owner: str, line: int) -> Tuple[TypedGraph, List[TypedGraph]]:
    lhs_secs = [s for s in sections if s.kind == "lhs"]
    if len(lhs_secs) != 1:
        raise ProblemFormatError(line, f"{owner}: exactly one lhs section required")
    lhs = _build(lhs_secs[0])
    nacs = [_build(s, lhs) for s in sections if s.kind == "nac"]
    return lhs, nacs


def _make_rule(name: str, sections: List[_Section], line: int) -> Rule:
    lhs, nac_graphs = _pattern(sections, f"rule {name}", line)
    rhs_secs = [s for s in sections if s.kind == "rhs"]
    if len(rhs_secs) != 1:
        raise ProblemFormatError(line, f"rule {name}: exactly one rhs section required")
    rhs = _build(rhs_secs[0])
    nm = {n: n for n in lhs.nodes if n in rhs.nodes}
    em = {e: e for e in lhs.edges if e in rhs.edges}
    try:
        return Rule(name, lhs, rhs, Morphism(nm, em), tuple(Nac.extending(lhs, g) for g in nac_graphs))
    except ValueError as exc:
        raise ProblemFormatError(line, str(exc)) from None


def parse_problem(text: str) -> PlanningProblem:
    name = "problem"
    node_types: Optional[set] = None
    edge_types: Optional[set] = None
    initial: Optional[TypedGraph] = None
    target: Optional[Pattern] = None
    rules: List[Rule] = []

    block: Optional[Tuple[str, str, int]] = None  # (kind, name, line)
    sections: List[_Section] = []
    current: Optional[_Section] = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            toks = shlex.split(line)
        except ValueError as exc:
            raise ProblemFormatError(lineno, str(exc)) from None
        head = toks[0]
        if block is None:
            if head == "problem" and len(toks) == 2:
                name = toks[1]
            elif head == "node-types":
                node_types = set(toks[1:])
            elif head == "edge-types":
                edge_types = set(toks[1:])
            elif head == "initial" and len(toks) == 1:
                if initial is not None:
                    raise ProblemFormatError(lineno, "duplicate initial block")
                block = ("initial", "", lineno)
                current = _Section("initial", lineno)
                sections = [current]
            elif head == "rule" and len(toks) == 2:
                block = ("rule", toks[1], lineno)
                sections, current = [], None
            elif head == "target" and len(toks) == 1:
                if target is not None:
                    raise ProblemFormatError(lineno, "duplicate target block")
                block = ("target", "", lineno)
                sections, current = [], None
            else:
                raise ProblemFormatError(lineno, f"unexpected {line!r}")
            continue
        kind, bname, bline = block
        if head == "end" and len(toks) == 1:
            if kind == "initial":
                initial = _build(sections[0])
            elif kind == "rule":
                if any(r.name == bname for r in rules):
                    raise ProblemFormatError(bline, f"duplicate rule {bname!r}")
                rules.append(_make_rule(bname, sections, bline))
            else:
                lhs, nacs = _pattern(sections, "target", bline)
                target = Pattern(lhs, tuple(Nac.extending(lhs, g) for g in nacs))
            block = None
            continue
        if kind != "initial" and head in ("lhs", "rhs", "nac") and len(toks) == 1:
            if head == "rhs" and kind == "target":
                raise ProblemFormatError(lineno, "target has no rhs")
            current = _Section(head, lineno)
            sections.append(current)
            continue
        if current is None:
            raise ProblemFormatError(lineno, "element outside of an lhs/rhs/nac section")
        _parse_element(toks, lineno, current)

    if block is not None:
        raise ProblemFormatError(block[2], f"unterminated {block[0]} block")
    if initial is None:
        raise ProblemFormatError(None, "missing initial block")
    if target is None:
        raise ProblemFormatError(None, "missing target block")
    used_nt, used_et = _types_used(initial, target, rules)
    try:
        return PlanningProblem(tuple(rules), initial, target, name,
                               frozenset(node_types if node_types is not None else used_nt),
                               frozenset(edge_types if edge_types is not None else used_et))
    except ValueError as exc:
        raise ProblemFormatError(None, str(exc)) from None


def _types_used(initial, target, rules):
    graphs = [initial, target.lhs] + [n.n_graph for n in target.nacs]
    for r in rules:
        graphs += [r.lhs, r.rhs] + [n.n_graph for n in r.nacs]
    nt = {t for g in graphs for t, _ in g.nodes.values()}
    et = {t for g in graphs for _, t, _ in g.edges.values()}
    return nt, et


def load_problem(path: Union[str, Path]) -> PlanningProblem:
    return parse_problem(Path(path).read_text())


# -- writing -------------------------------------------------------------

def _q(s: str) -> str:
    return shlex.quote(s)


def _element_lines(g: TypedGraph, skip: frozenset = frozenset(), indent: str = "  ") -> List[str]:
    out = []
    for n, (t, name) in g.nodes.items():
        if n in skip:
            continue
        out.append(f"{indent}node {_q(n)} {_q(t)}" + (f" name={_q(name)}" if name is not None else ""))
    for e, (s, t, d) in g.edges.items():
        if e in skip:
            continue
        line = f"{indent}edge {_q(s)} {_q(t)} {_q(d)}"
        if e != _auto_edge_id(s, t, d):
            line += f" id={_q(e)}"
        out.append(line)
    return out


def _nac_lines(lhs: TypedGraph, nac: Nac, indent: str) -> List[str]:
    emb = nac.embedding
    if any(k != v for k, v in emb.node_map.items()) or any(k != v for k, v in emb.edge_map.items()):
        raise ValueError("only NACs that reuse the LHS ids can be written")
    return [f"{indent[:-2]}nac"] + _element_lines(nac.n_graph, frozenset(lhs.elements()), indent)


def format_problem(p: PlanningProblem) -> str:
    lines = [f"problem {_q(p.name)}",
             "node-types " + " ".join(sorted(p.node_types)),
             "edge-types " + " ".join(sorted(p.edge_types)),
             "", "initial"]
    lines += _element_lines(p.initial)
    lines += ["end", ""]
    for r in p.rules:
        nm, em = r.morphism.node_map, r.morphism.edge_map
        if any(k != v for k, v in nm.items()) or any(k != v for k, v in em.items()):
            raise ValueError(f"rule {r.name}: rule morphism must reuse LHS ids to be written")
        lines.append(f"rule {_q(r.name)}")
        lines.append("  lhs")
        lines += _element_lines(r.lhs, indent="    ")
        lines.append("  rhs")
        lines += _element_lines(r.rhs, indent="    ")
        for nac in r.nacs:
            lines += _nac_lines(r.lhs, nac, "    ")
        lines += ["end", ""]
    lines += ["target", "  lhs"]
    lines += _element_lines(p.target.lhs, indent="    ")
    for nac in p.target.nacs:
        lines += _nac_lines(p.target.lhs, nac, "    ")
    lines.append("end")
    return "\n".join(lines) + "\n"


def format_plan(plan: Plan) -> str:
    return "".join(" ".join([r, *map(_q, image)]) + "\n" for r, image in plan.steps)


def parse_plan(text: str) -> Plan:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            toks = shlex.split(line)
        except ValueError as exc:
            raise ProblemFormatError(lineno, str(exc)) from None
        steps.append((toks[0], tuple(toks[1:])))
    return Plan(steps)
