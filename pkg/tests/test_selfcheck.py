from homforge import selfcheck
from homforge.metrics import write_metrics
from homforge.profile import default_profile
from homforge.selfcheck import SuiteFailure, SuiteOutcome, render_table, run_selfcheck, run_suite


def test_fast_suites_pass():
    profile = default_profile()
    for name in ("mycielski", "star-figures", "domination-threshold"):
        outcome = run_suite(name, profile.suite(name))
        assert outcome.passed, outcome.detail


def test_run_suite_reports_failures(monkeypatch):
    def broken(params):
        raise SuiteFailure("odd girth 5 < 7")

    monkeypatch.setitem(selfcheck.SUITES, "mycielski", broken)
    outcome = run_suite("mycielski", default_profile().suite("mycielski"))
    assert outcome == SuiteOutcome("mycielski", False, "odd girth 5 < 7")


def test_run_selfcheck_honors_filter():
    outcomes = run_selfcheck(default_profile(), "star-figures")
    assert [o.name for o in outcomes] == ["star-figures"]
    assert outcomes[0].detail == "K3 star 6/3, bowtie star 20/24"


def test_render_table_aligns_names():
    table = render_table(
        [SuiteOutcome("witness", True, "ok"), SuiteOutcome("oracles", False, "mismatch")]
    )
    assert table.splitlines() == [
        "suite    status  detail",
        "witness  PASS    ok",
        "oracles  FAIL    mismatch",
    ]


def test_stage_durations_reach_metrics_file(tmp_path):
    run_suite("mycielski", default_profile().suite("mycielski"))
    path = tmp_path / "homforge.prom"
    write_metrics(str(path))
    assert 'homforge_stage_duration_seconds_count{stage="selfcheck:mycielski"}' in path.read_text(
        encoding="utf-8"
    )
