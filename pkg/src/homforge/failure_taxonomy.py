from __future__ import annotations


class HomforgeError(RuntimeError):
    """Base error; messages follow the ``CODE_NAME: detail`` convention."""

    @property
    def code(self) -> str:
        return normalize_failure_code(str(self))


class PreconditionError(HomforgeError):
    pass


class InputFormatError(HomforgeError):
    pass


class ResourceCapError(HomforgeError):
    pass


class InternalConsistencyError(HomforgeError):
    pass


_PRECONDITION_PREFIXES = (
    "PRECONDITION_",
    "ODD_GIRTH_",
    "MIN_DEGREE_",
    "NOT_",
    "DIMENSION_",
    "SEED_",
    "LAYER_",
    "PHI_",
    "UNIQUE_COVER_",
    "PARTITE_",
)


def normalize_failure_code(reason: str | None) -> str:
    if not reason:
        return "UNKNOWN"
    raw = reason.strip()
    if not raw:
        return "UNKNOWN"
    return raw.split(":", 1)[0].strip().upper()


def classify_failure_reason(reason: str | None) -> str:
    code = normalize_failure_code(reason)

    if code.startswith("CAP_") or code.startswith("BUDGET_"):
        return "resource_cap"
    if code.startswith("INVALID_"):
        return "input_validation"
    if code.startswith(_PRECONDITION_PREFIXES):
        return "precondition"
    if code.startswith("VERIFY_"):
        return "verification"
    if code.startswith("INTERNAL_"):
        return "internal_consistency"
    return "runtime_error"


def exit_code_for(category: str) -> int:
    if category in {"precondition", "input_validation"}:
        return 2
    if category == "resource_cap":
        return 3
    return 1
