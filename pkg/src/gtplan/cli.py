"""Command line: ``gtplan {solve,validate,gen,bench}``.

Exit codes: 0 success, 1 usage or parse error, 2 no plan / invalid plan.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean
from typing import Dict, List, Optional, Sequence, Tuple

from .domains import (BlocksWorldSpec, EcusSpec, blocksworld_instances, ecus_instances, gen_blocksworld,
                      gen_ecus)
from .fileformat import ProblemFormatError, format_plan, format_problem, load_problem, parse_plan
from .gts import PlanningProblem, validate_plan
from .heuristics import HeuristicConfig
from .search import ALGORITHMS, Limits, SearchResult, solve

log = logging.getLogger("gtplan")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

BENCH_COLUMNS = ["domain", "size", "instance", "heuristic", "algorithm", "repetition", "status",
                 "generated_states", "expanded_states", "plan_length", "total_time",
                 "heuristic_time_fraction"]
TIME_COLUMNS = ("total_time", "heuristic_time_fraction")

DEFAULT_SIZES = {"blocksworld": [4, 6, 8, 10, 12], "ecus": [2, 3, 4]}
FULL_SIZES = {"blocksworld": [4, 6, 8, 10, 12, 14, 16, 18], "ecus": [2, 3, 4, 5]}


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--heuristic", choices=["abs", "sim"], default="abs")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="gbf",
                   help="gbf: greedy best-first; ehc: enforced hill-climbing with greedy "
                        "episodes, fails on the first dead end (no restarts); astar: g+h")
    _add_limit_flags(p)


def _add_limit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--timeout", type=float, default=60.0, help="seconds per run (default 60)")
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--max-abstract-depth", type=int, default=1000,
                   help="step cap for the initial state's abstract sequence")
    p.add_argument("--cap-factor", type=float, default=2.0,
                   help="other states get cap-factor * h(initial) abstract steps")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gtplan", description="Planning on graph transformation systems")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="search for a plan")
    s.add_argument("problem", type=Path)
    _add_search_flags(s)
    s.add_argument("--output", type=Path, help="write the plan file here")
    s.add_argument("--format", choices=["text", "json-lines"], default="text")

    v = sub.add_parser("validate", help="replay a plan file against a problem")
    v.add_argument("problem", type=Path)
    v.add_argument("plan", type=Path)

    g = sub.add_parser("gen", help="write benchmark problem files")
    g.add_argument("domain", choices=["blocksworld", "ecus"])
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--extra-instance", action="store_true", help="ecus: one additional component instance")
    g.add_argument("--all-instances", action="store_true",
                   help="write the four benchmark instances of this size into --output (a directory)")
    g.add_argument("--output", type=Path, help="file (or directory with --all-instances); default stdout")

    b = sub.add_parser("bench", help="run an experiment matrix and emit CSV")
    b.add_argument("--domain", choices=["blocksworld", "ecus"], action="append", dest="domains")
    b.add_argument("--sizes", type=int, nargs="+", help="problem sizes (default: desk-scale set)")
    b.add_argument("--full-sizes", action="store_true", help="Blocks World 4-18 and ECUs 2-5")
    b.add_argument("--problems", type=Path, nargs="*", default=[], help="problem files")
    b.add_argument("--heuristics", nargs="+", choices=["abs", "sim"], default=["abs", "sim"])
    b.add_argument("--algorithms", nargs="+", choices=sorted(ALGORITHMS), default=["gbf"])
    b.add_argument("--repetitions", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    _add_limit_flags(b)
    b.add_argument("--output", type=Path)
    b.add_argument("--format", choices=["csv", "json-lines"], default="csv")
    return ap


# -- solve -----------------------------------------------------------------

def _cfg(args) -> HeuristicConfig:
    return HeuristicConfig(max_abstract_depth=args.max_abstract_depth, per_state_cap_factor=args.cap_factor)


def _stats_dict(res: SearchResult) -> dict:
    s = res.stats
    return {"status": res.status, "plan_length": s.plan_length, "generated_states": s.generated_states,
            "expanded_states": s.expanded_states, "heuristic_calls": s.heuristic_calls,
            "heuristic_time": round(s.heuristic_time, 6), "total_time": round(s.total_time, 6),
            "heuristic_time_fraction": round(s.heuristic_time_fraction, 6)}


def cmd_solve(args, out=sys.stdout) -> int:
    problem = load_problem(args.problem)
    res = solve(problem, args.heuristic, args.algorithm,
                Limits(args.timeout, args.max_states), _cfg(args))
    stats = _stats_dict(res)
    if args.format == "json-lines":
        rec = dict(stats, problem=problem.name, heuristic=args.heuristic, algorithm=args.algorithm,
                   plan=[[r, *img] for r, img in res.plan.steps] if res.plan else None)
        out.write(json.dumps(rec) + "\n")
    else:
        if res.plan is not None:
            out.write(f"plan ({len(res.plan)} steps):\n")
            for i, (r, img) in enumerate(res.plan.steps, 1):
                out.write(f"  {i:3d}. {r} {' '.join(img)}\n")
        else:
            out.write(f"no plan: {res.status}\n")
        out.write(f"generated states: {stats['generated_states']}\n")
        out.write(f"expanded states:  {stats['expanded_states']}\n")
        out.write(f"heuristic share:  {100 * stats['heuristic_time_fraction']:.1f}%\n")
        out.write(f"total time:       {stats['total_time']:.3f} s\n")
    if res.plan is not None and args.output:
        args.output.write_text(format_plan(res.plan))
    return EXIT_OK if res.plan is not None else EXIT_FAIL


# -- validate -----------------------------------------------------------------

def cmd_validate(args, out=sys.stdout) -> int:
    problem = load_problem(args.problem)
    plan = parse_plan(args.plan.read_text())
    res = validate_plan(problem, plan)
    if res:
        out.write(f"valid plan ({len(plan)} steps)\n")
        return EXIT_OK
    if res.failed_step == len(plan):
        out.write(f"invalid plan: goal check failed after {len(plan)} steps: {res.reason}\n")
    else:
        out.write(f"invalid plan: step {res.failed_step + 1} failed: {res.reason}\n")
    return EXIT_FAIL


# -- gen ---------------------------------------------------------------------

def cmd_gen(args, out=sys.stdout) -> int:
    if args.all_instances:
        if args.output is None:
            raise ValueError("--all-instances needs --output DIR")
        probs = blocksworld_instances(args.size, args.seed) if args.domain == "blocksworld" \
            else ecus_instances(args.size)
        args.output.mkdir(parents=True, exist_ok=True)
        for i, p in enumerate(probs):
            (args.output / f"{p.name}-{i}.gts").write_text(format_problem(p))
        return EXIT_OK
    if args.domain == "blocksworld":
        p = gen_blocksworld(BlocksWorldSpec(args.size, args.seed))
    else:
        p = gen_ecus(EcusSpec(args.size, args.extra_instance, args.seed))
    text = format_problem(p)
    if args.output:
        args.output.write_text(text)
    else:
        out.write(text)
    return EXIT_OK


# -- bench -------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    problems: List[Tuple[str, Optional[int], PlanningProblem]] = field(default_factory=list)
    heuristics: Sequence[str] = ("abs", "sim")
    algorithms: Sequence[str] = ("gbf",)
    timeout: float = 60.0
    repetitions: int = 1
    max_states: Optional[int] = None
    heuristic_cfg: HeuristicConfig = field(default_factory=HeuristicConfig)

    def __post_init__(self):
        if not self.heuristics or not self.algorithms:
            raise ValueError("at least one heuristic and one algorithm are required")
        if self.timeout <= 0 or self.repetitions < 1:
            raise ValueError("timeout must be positive and repetitions at least 1")

    @classmethod
    def for_domains(cls, domains: Dict[str, Sequence[int]], seed: int = 0, **kw) -> "ExperimentConfig":
        probs = []
        for dom, sizes in domains.items():
            for n in sizes:
                insts = blocksworld_instances(n, seed) if dom == "blocksworld" else ecus_instances(n)
                probs += [(dom, n, p) for p in insts]
        return cls(problems=probs, **kw)


def run_cell(dom, size, problem, heuristic, algorithm, rep, cfg: ExperimentConfig) -> dict:
    res = solve(problem, heuristic, algorithm, Limits(cfg.timeout, cfg.max_states), cfg.heuristic_cfg)
    s = res.stats
    return {"domain": dom, "size": size if size is not None else "", "instance": problem.name,
            "heuristic": heuristic, "algorithm": algorithm, "repetition": rep, "status": res.status,
            "generated_states": s.generated_states, "expanded_states": s.expanded_states,
            "plan_length": s.plan_length if s.plan_length is not None else "",
            "total_time": round(s.total_time, 4),
            "heuristic_time_fraction": round(s.heuristic_time_fraction, 4),
            "_plan": res.plan, "_problem": problem}


def aggregate(rows: List[dict]) -> List[dict]:
    """Per (domain, size, heuristic, algorithm) means over solved runs."""
    groups: Dict[tuple, List[dict]] = {}
    for r in rows:
        groups.setdefault((r["domain"], r["size"], r["heuristic"], r["algorithm"]), []).append(r)
    out = []
    for (dom, size, h, a), rs in groups.items():
        ok = [r for r in rs if r["status"] == "solved"]

        def avg(col, nd=2):
            return round(mean(float(r[col]) for r in ok), nd) if ok else ""

        out.append({"domain": dom, "size": size, "instance": "MEAN", "heuristic": h, "algorithm": a,
                    "repetition": "", "status": f"solved {len(ok)}/{len(rs)}",
                    "generated_states": avg("generated_states"), "expanded_states": avg("expanded_states"),
                    "plan_length": avg("plan_length"), "total_time": avg("total_time", 4),
                    "heuristic_time_fraction": avg("heuristic_time_fraction", 4)})
    return out


def cmd_bench(cfg: ExperimentConfig, progress=None) -> List[dict]:
    """Run every (instance, heuristic, algorithm, repetition) cell; timeouts do not stop the matrix."""
    rows = []
    for dom, size, problem in cfg.problems:
        for h in cfg.heuristics:
            for a in cfg.algorithms:
                for rep in range(cfg.repetitions):
                    row = run_cell(dom, size, problem, h, a, rep, cfg)
                    rows.append(row)
                    if progress:
                        progress(row)
    return rows


def write_rows(rows: List[dict], fmt: str = "csv", with_aggregates: bool = True) -> str:
    data = [{k: r[k] for k in BENCH_COLUMNS} for r in rows]
    if with_aggregates:
        data += aggregate(data)
    buf = io.StringIO()
    if fmt == "json-lines":
        for r in data:
            buf.write(json.dumps(r) + "\n")
    else:
        w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(data)
    return buf.getvalue()


def _bench_from_args(args) -> ExperimentConfig:
    domains = {}
    for dom in args.domains or ([] if args.problems else ["blocksworld", "ecus"]):
        domains[dom] = args.sizes or (FULL_SIZES if args.full_sizes else DEFAULT_SIZES)[dom]
    cfg = ExperimentConfig.for_domains(domains, seed=args.seed, heuristics=args.heuristics,
                                       algorithms=args.algorithms, timeout=args.timeout,
                                       repetitions=args.repetitions, max_states=args.max_states,
                                       heuristic_cfg=_cfg(args))
    cfg.problems += [("file", None, load_problem(p)) for p in args.problems]
    return cfg


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "solve":
            return cmd_solve(args, out)
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "gen":
            return cmd_gen(args, out)
        cfg = _bench_from_args(args)

        def progress(r):
            log.info("%s %s %s: %s, %s states", r["instance"], r["heuristic"], r["algorithm"],
                     r["status"], r["generated_states"])

        text = write_rows(cmd_bench(cfg, progress), args.format)
        if args.output:
            args.output.write_text(text)
        else:
            out.write(text)
        return EXIT_OK
    except ProblemFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
