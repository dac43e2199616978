import csv
import io
import json

import pytest

from gtplan.cli import BENCH_COLUMNS, ExperimentConfig, cmd_bench, main, write_rows
from gtplan.domains import EcusSpec, gen_ecus
from gtplan.fileformat import format_plan, format_problem, parse_plan
from gtplan.gts import Plan

TOY = """\
problem toy
initial
  node a A
end
rule touch
  lhs
    node x A
  rhs
    node x A
    edge x e x
end
target
  lhs
    node g Gateway
end
"""


def run(argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def ecus2_file(tmp_path):
    path = tmp_path / "ecus-2.gts"
    path.write_text(format_problem(gen_ecus(EcusSpec(2))))
    return path


def test_solve_ecus2(ecus2_file, tmp_path):
    plan_file = tmp_path / "plan.txt"
    code, out = run(["solve", ecus2_file, "--output", plan_file])
    assert code == 0
    assert "plan (4 steps)" in out and "generated states" in out
    assert len(parse_plan(plan_file.read_text())) == 4
    code, out = run(["validate", ecus2_file, plan_file])
    assert code == 0 and "valid plan" in out


def test_solve_json_lines(ecus2_file):
    code, out = run(["solve", ecus2_file, "--format", "json-lines", "--algorithm", "ehc", "--heuristic", "sim"])
    rec = json.loads(out)
    assert code == 0 and rec["plan_length"] == 4 and rec["status"] == "solved"
    assert len(rec["plan"]) == 4


def test_solve_unsolvable(tmp_path):
    path = tmp_path / "toy.gts"
    path.write_text(TOY)
    code, out = run(["solve", path])
    assert code == 2 and ("exhausted" in out or "dead end" in out)
    code, out = run(["solve", path, "--algorithm", "ehc"])
    assert code == 2 and "dead end" in out


def test_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.gts"
    path.write_text("initial\n  node a\nend\n")
    code, _ = run(["solve", path])
    assert code == 1
    assert "line 2" in capsys.readouterr().err


def test_usage_error():
    assert run(["solve"])[0] == 1
    assert run(["frobnicate"])[0] == 1


def test_validate_sample_truncated_and_permuted(ecus2_file, tmp_path, sample_plan):
    good = tmp_path / "good.plan"
    good.write_text(format_plan(sample_plan))
    assert run(["validate", ecus2_file, good])[0] == 0

    short = tmp_path / "short.plan"
    short.write_text(format_plan(Plan(sample_plan.steps[:-1])))
    code, out = run(["validate", ecus2_file, short])
    assert code == 2 and "goal check failed" in out

    steps = list(sample_plan.steps)
    steps[1], steps[2] = steps[2], steps[1]
    permuted = tmp_path / "perm.plan"
    permuted.write_text(format_plan(Plan(steps)))
    code, out = run(["validate", ecus2_file, permuted])
    assert code == 2 and "step 2 failed" in out


def test_gen_single_and_all(tmp_path):
    code, out = run(["gen", "ecus", "--size", "3"])
    assert code == 0 and out.startswith("problem ecus-3")
    code, _ = run(["gen", "blocksworld", "--size", "4", "--all-instances", "--output", tmp_path / "bw"])
    assert code == 0
    assert len(list((tmp_path / "bw").glob("*.gts"))) == 4
    assert run(["gen", "blocksworld", "--size", "4", "--all-instances"])[0] == 1


def test_bench_csv(tmp_path):
    out_file = tmp_path / "bench.csv"
    code, _ = run(["bench", "--domain", "ecus", "--sizes", "2", "--heuristics", "abs", "sim",
                   "--timeout", "20", "--output", out_file])
    assert code == 0
    rows = list(csv.DictReader(out_file.open()))
    runs = [r for r in rows if r["instance"] != "MEAN"]
    means = [r for r in rows if r["instance"] == "MEAN"]
    assert len(runs) == 8 and len(means) == 2
    assert all(r["status"] == "solved" for r in runs)
    assert {r["status"] for r in means} == {"solved 4/4"}


def test_bench_records_timeouts_and_continues():
    cfg = ExperimentConfig.for_domains({"ecus": [4, 2]}, heuristics=["sim"], timeout=0.05)
    rows = cmd_bench(cfg)
    assert len(rows) == 8
    assert any(r["status"] == "timeout" for r in rows)
    assert any(r["status"] == "solved" for r in rows if r["size"] == 2)


def test_bench_empty_problem_list():
    text = write_rows(cmd_bench(ExperimentConfig(problems=[])))
    assert text == ",".join(BENCH_COLUMNS) + "\n"


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(heuristics=[])
    with pytest.raises(ValueError):
        ExperimentConfig(timeout=0)


def test_bench_json_lines():
    cfg = ExperimentConfig.for_domains({"ecus": [2]}, heuristics=["abs"], timeout=20)
    lines = write_rows(cmd_bench(cfg), "json-lines").splitlines()
    recs = [json.loads(l) for l in lines]
    assert [r["instance"] for r in recs][-1] == "MEAN"
    assert all(set(r) == set(BENCH_COLUMNS) for r in recs)
