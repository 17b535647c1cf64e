import io
import json
import logging

import numpy as np

from homforge.artifacts import (
    append_jsonl,
    ensure_bundle_dir,
    ensure_contract,
    render_report,
    write_text,
)
from homforge.logging_utils import JsonFormatter, configure_logging
from homforge.types import DEFAULT_BUNDLE_CONTRACT, ApproxHomReport


def test_bundle_dir_and_contract(tmp_path):
    out = ensure_bundle_dir(tmp_path, "bundle")
    write_text(out / "g.el", "n 1\n")
    created = ensure_contract(out, DEFAULT_BUNDLE_CONTRACT)
    assert "g.el" not in created
    assert sorted(created) == sorted(set(DEFAULT_BUNDLE_CONTRACT) - {"g.el"})
    assert (out / "g.el").read_text(encoding="utf-8") == "n 1\n"
    assert (out / "h.hg").read_text(encoding="utf-8") == ""


def test_append_jsonl_sorts_keys(tmp_path):
    path = tmp_path / "run.jsonl"
    append_jsonl(path, {"seed": 3, "command": "witness"})
    append_jsonl(path, {"command": "witness", "passed": True})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == '{"command": "witness", "seed": 3}'
    assert json.loads(lines[1]) == {"command": "witness", "passed": True}


def test_render_report_flattens_models():
    report = ApproxHomReport(
        n=3, edges=3, target_vertices=2, eps=0.5, violations=1, threshold=4.5,
        passed=True, pattern_freeness="free",
    )
    text = render_report(report)
    assert "violations: 1\n" in text
    assert "passed: true\n" in text
    assert "eps: 0.5\n" in text
    nested = render_report({"summary": {"copies": 2, "bad_edges": None}, "rows": []})
    assert nested == "summary.copies: 2\nsummary.bad_edges: none\nrows: -\n"


def test_json_formatter_carries_context_fields():
    record = logging.LogRecord("homforge.cli", logging.INFO, __file__, 1, "done", None, None)
    record.command = "hom"
    record.duration_s = 0.25
    payload = json.loads(JsonFormatter().format(record))
    assert payload["message"] == "done"
    assert payload["command"] == "hom"
    assert payload["duration_s"] == 0.25
    assert "stage" not in payload


def test_configure_logging_writes_json_lines(capsys):
    stream = io.StringIO()
    configure_logging("info", stream)
    try:
        logging.getLogger("homforge.test").info(
            "Stage done", extra={"stage": "star", "detail": np.int64(24)}
        )
    finally:
        configure_logging()
    payload = json.loads(stream.getvalue().splitlines()[-1])
    assert payload["level"] == "INFO"
    assert payload["detail"] == 24
    assert capsys.readouterr().out == ""
