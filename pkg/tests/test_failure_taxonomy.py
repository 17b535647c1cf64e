from homforge.failure_taxonomy import (
    PreconditionError,
    classify_failure_reason,
    exit_code_for,
    normalize_failure_code,
)


def test_normalize_failure_code():
    assert normalize_failure_code("CAP_TARGET_SIZE: 2047 > 1000") == "CAP_TARGET_SIZE"
    assert normalize_failure_code("  invalid_input: g.el:3: bad  ") == "INVALID_INPUT"
    assert normalize_failure_code("") == "UNKNOWN"
    assert normalize_failure_code(None) == "UNKNOWN"


def test_classify_failure_reason():
    assert classify_failure_reason("CAP_TARGET_SIZE: over") == "resource_cap"
    assert classify_failure_reason("BUDGET_HOM_SEARCH: 10 nodes") == "resource_cap"
    assert classify_failure_reason("INVALID_INPUT: g.el:1: self-loop") == "input_validation"
    assert classify_failure_reason("ODD_GIRTH_PRECONDITION: 5 < 9") == "precondition"
    assert classify_failure_reason("MIN_DEGREE_PRECONDITION") == "precondition"
    assert classify_failure_reason("NOT_HOM_FREE: host contains C5") == "precondition"
    assert classify_failure_reason("SEED_REQUIRED") == "precondition"
    assert classify_failure_reason("PRECONDITION_BIPARTITE") == "precondition"
    assert classify_failure_reason("VERIFY_FAILED: 3 violations") == "verification"
    assert classify_failure_reason("INTERNAL_UNIQUE_COVER") == "internal_consistency"
    assert classify_failure_reason("unhandled crash in search") == "runtime_error"


def test_exit_code_for_categories():
    assert exit_code_for("precondition") == 2
    assert exit_code_for("input_validation") == 2
    assert exit_code_for("resource_cap") == 3
    assert exit_code_for("verification") == 1
    assert exit_code_for("internal_consistency") == 1
    assert exit_code_for("runtime_error") == 1


def test_error_code_property():
    assert PreconditionError("NOT_2_CONNECTED: F has a cut vertex").code == "NOT_2_CONNECTED"
