import json
import logging
import sys
from datetime import datetime, timezone
from typing import IO, Any

# failure codes go in "code", free-form stage summaries in "detail"
_CONTEXT_FIELDS = ("command", "stage", "code", "detail", "duration_s")


def _json_default(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    return str(value)


class JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update(
            {name: getattr(record, name) for name in _CONTEXT_FIELDS if hasattr(record, name)}
        )
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=True, default=_json_default)


def configure_logging(level: str = "WARNING", stream: IO[str] | None = None) -> None:
    """Install one JSON handler on the root logger.

    Records go to stderr unless a stream is given; stdout is reserved for command results.
    """
    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level.upper())
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JsonFormatter())
    root.addHandler(handler)
