from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from pydantic import BaseModel


def ensure_bundle_dir(root: str | Path, name: str = "") -> Path:
    path = Path(root) / name if name else Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(content)


def append_jsonl(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    line = json.dumps(record, ensure_ascii=True, sort_keys=True)
    with path.open("a", encoding="utf-8", newline="\n") as handle:
        handle.write(line + "\n")


def ensure_contract(path: Path, contract: Iterable[str]) -> list[str]:
    """Create empty placeholders for missing bundle files; returns the names created."""
    created: list[str] = []
    for name in contract:
        target = path / name
        if not target.exists():
            target.write_text("", encoding="utf-8")
            created.append(name)
    return created


def _render_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_render_value(item) for item in value) if value else "-"
    return str(value)


def _flatten(prefix: str, value: Any, lines: list[str]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), item, lines)
        return
    lines.append(f"{prefix}: {_render_value(value)}")


def render_report(model: BaseModel | dict[str, Any]) -> str:
    data = model.model_dump() if isinstance(model, BaseModel) else model
    lines: list[str] = []
    _flatten("", data, lines)
    return "\n".join(lines) + "\n"
