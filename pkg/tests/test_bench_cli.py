from __future__ import annotations

import json

import pytest

from cthd.bench import MetricsRecord, ScoreTable, ipc_score, read_manifest, records_to_csv, run_bench
from cthd.cli import main
from cthd.errors import EmptyProblemSet
from cthd.samples import three_tasks_text


def test_ipc_examples():
    assert ipc_score({"x": [10], "best": [5]})["x"] == 0.5
    assert ipc_score({"x": [5, 7], "y": [6, 7]})["x"] == 1.0
    assert ipc_score({"x": [5, 10], "best": [5, 5]})["x"] == 0.75


def test_ipc_unsolved_and_errors():
    assert ipc_score({"x": [None], "y": [3]}) == {"x": 0.0, "y": 1.0}
    with pytest.raises(EmptyProblemSet):
        ipc_score({"x": []})
    with pytest.raises(EmptyProblemSet):
        ipc_score({})


def test_metrics_record_drops_makespan_when_unsolved():
    r = MetricsRecord("p", "cpfd", "timeout", 1.0, 0.5, makespan=3)
    assert r.makespan is None and r.cost("makespan") is None
    with pytest.raises(ValueError):
        MetricsRecord("p", "cpfd", "weird", 0, 0)


@pytest.fixture
def workdir(tmp_path):
    for tag, conc in (("c", True), ("s", False)):
        d, p = three_tasks_text(conc)
        (tmp_path / f"d{tag}.hddl").write_text(d)
        (tmp_path / f"p{tag}.hddl").write_text(p)
    (tmp_path / "manifest.txt").write_text("# two problems\ndc.hddl pc.hddl 4\nds.hddl ps.hddl\n")
    return tmp_path


def test_bench_single_system_scores_one(workdir):
    records = run_bench(read_manifest(workdir / "manifest.txt"), ["cpfd"])
    assert [r.status for r in records] == ["solved", "solved"]
    assert all(r.search_time <= r.solving_time for r in records)
    table = ScoreTable.from_records(records)
    assert all(v == {"cpfd": 1.0} for v in table.scores.values())
    assert records_to_csv(records).splitlines()[0].startswith("problem,system,status")


def test_bench_reports_encoding_sizes(workdir):
    from cthd.encoding import encode
    from cthd.samples import three_tasks

    records = run_bench(read_manifest(workdir / "manifest.txt")[:1], ["cthd"])
    stats = encode(three_tasks(True), 4).stats
    assert records[0].operators == stats["operators"] and records[0].propositions == stats["propositions"]
    assert records[0].makespan == 2


def test_cli_solve_and_validate(workdir, capsys):
    d, p = str(workdir / "dc.hddl"), str(workdir / "pc.hddl")
    assert main(["solve", d, p, "--mode", "voluntary", "--objective", "min-makespan"]) == 0
    assert ";; makespan 2" in capsys.readouterr().out
    out = workdir / "plan.json"
    assert main(["solve", d, p, "--format", "json", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["plan"]["makespan"] == 2
    assert main(["validate", d, p, str(out)]) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_cli_encode_stats(workdir, capsys):
    from cthd.encoding import encode
    from cthd.samples import three_tasks

    d, p = str(workdir / "dc.hddl"), str(workdir / "pc.hddl")
    assert main(["encode", d, p, "--bound", "4", "--stats", "--out-dir", str(workdir / "out")]) == 0
    stats = json.loads((workdir / "out" / "three_tasks_concurrent_b4_stats.json").read_text())
    assert stats["operators"] == encode(three_tasks(True), 4).stats["operators"]
    assert (workdir / "out" / "three_tasks_concurrent_b4_domain.pddl").exists()


def test_cli_roundtrip_and_external_plan(workdir, capsys):
    from cthd.encoding import encode
    from cthd.samples import three_tasks
    from cthd.strips import solve_bfs, write_plan

    d, p = str(workdir / "dc.hddl"), str(workdir / "pc.hddl")
    assert main(["roundtrip", d, p, "--deepen", "2:6"]) == 0
    assert "bound 4: valid" in capsys.readouterr().out
    enc = encode(three_tasks(True), 4)
    (workdir / "ext.plan").write_text(write_plan(solve_bfs(enc.problem), enc.problem))
    assert main(["roundtrip", d, p, "--bound", "4", "--plan-in", str(workdir / "ext.plan")]) == 0
    assert main(["roundtrip", d, p, "--bound", "2"]) == 1


def test_cli_exit_codes(workdir, capsys):
    d, p = str(workdir / "dc.hddl"), str(workdir / "pc.hddl")
    assert main([]) == 2
    assert main(["solve", d, str(workdir / "missing.hddl")]) == 2
    assert main(["solve", d, p, "--node-limit", "1"]) == 3
    assert main(["roundtrip", d, p, "--deepen", "5:2"]) == 2
    (workdir / "plan.txt").write_text(";; makespan 1\n{a1}\n")
    assert main(["validate", d, p, str(workdir / "plan.txt")]) == 2
    assert main(["bench", str(workdir / "manifest.txt"), "--systems", "cpfd,cthd", "--format", "json"]) == 0
    assert set(json.loads(capsys.readouterr().out)["scores"]) >= {"makespan", "operators"}
