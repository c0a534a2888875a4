"""Structured logging for pinchsim.

Records logged under the ``pinchsim`` logger are kept in a bounded in-memory
buffer as JSON-safe entries. Callers attach ``extra={"event": ..., "payload":
...}``; payloads may hold numpy values, complex numbers or pydantic models.
"""
from __future__ import annotations

import json
import logging
import sys
from collections import deque
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from threading import RLock
from typing import Any, Deque, Dict, List, Mapping, Optional, Union

import numpy as np

from pinchsim.config import LOG_CAPACITY_DEFAULT, get_log_capacity, get_log_level

JSONValue = Union[str, int, float, bool, None, List["JSONValue"], Dict[str, "JSONValue"]]

ROOT_LOGGER_NAME = "pinchsim"
STREAM_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _level_number(level: str | int | None) -> Optional[int]:
    if level is None or isinstance(level, int):
        return level
    named = logging.getLevelName(str(level).upper())
    return named if isinstance(named, int) else None


def to_json_safe(value: Any) -> JSONValue:
    """Convert a log payload into plain JSON types."""

    if isinstance(value, (np.ndarray, np.generic)):
        return to_json_safe(value.tolist())
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float):
        return value if np.isfinite(value) else repr(value)
    if value is None or isinstance(value, (str, int, bool)):
        return value
    if isinstance(value, Mapping):
        return {str(key): to_json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_json_safe(item) for item in value]
    if hasattr(value, "model_dump"):
        return to_json_safe(value.model_dump(mode="json"))
    return str(value)


@dataclass(frozen=True)
class LogEntry:
    sequence: int
    timestamp: str
    logger: str
    level: str
    levelno: int
    message: str
    event: Optional[str]
    payload: JSONValue
    exception: Optional[str]

    @classmethod
    def from_record(cls, sequence: int, record: logging.LogRecord, exception: Optional[str]) -> "LogEntry":
        try:
            message = record.getMessage()
        except (TypeError, ValueError):  # pragma: no cover - bad format args
            message = str(record.msg)
        return cls(
            sequence=sequence,
            timestamp=datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            logger=record.name,
            level=record.levelname,
            levelno=record.levelno,
            message=message,
            event=getattr(record, "event", None),
            payload=to_json_safe(getattr(record, "payload", None)),
            exception=exception,
        )

    def matches(self, *, after: Optional[int], levelno: Optional[int], event_prefix: Optional[str]) -> bool:
        if after is not None and self.sequence <= after:
            return False
        if levelno is not None and self.levelno < levelno:
            return False
        if event_prefix is not None and not (self.event or "").startswith(event_prefix):
            return False
        return True

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


class InMemoryLogHandler(logging.Handler):
    """Keeps the most recent ``capacity`` records; ``None`` keeps all of them."""

    def __init__(self, capacity: Optional[int] = LOG_CAPACITY_DEFAULT) -> None:
        super().__init__()
        self.capacity = capacity if capacity and capacity > 0 else None
        self._entries: Deque[LogEntry] = deque(maxlen=self.capacity)
        self._lock = RLock()
        self._sequence = 0

    def emit(self, record: logging.LogRecord) -> None:
        exception = logging.Formatter().formatException(record.exc_info) if record.exc_info else None
        with self._lock:
            self._sequence += 1
            self._entries.append(LogEntry.from_record(self._sequence, record, exception))

    def records(
        self,
        *,
        after: Optional[int] = None,
        limit: Optional[int] = None,
        levelno: Optional[int] = None,
        event_prefix: Optional[str] = None,
    ) -> List[Dict[str, Any]]:
        with self._lock:
            entries = list(self._entries)
        selected = [
            entry.as_dict()
            for entry in entries
            if entry.matches(after=after, levelno=levelno, event_prefix=event_prefix)
        ]
        return selected[-limit:] if limit is not None else selected

    def latest_sequence(self) -> int:
        with self._lock:
            return self._sequence

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._sequence = 0


class LogManager:
    """Owns the buffer handler and the optional stderr handler of ``pinchsim``."""

    def __init__(self, capacity: Optional[int] = LOG_CAPACITY_DEFAULT) -> None:
        self.handler = InMemoryLogHandler(capacity)
        self._stream_handler: Optional[logging.StreamHandler] = None
        self._lock = RLock()
        self._configured = False

    @property
    def configured(self) -> bool:
        return self._configured

    def configure(self, *, level: str | int | None = None, stream_level: str | int | None = None) -> None:
        with self._lock:
            root = logging.getLogger(ROOT_LOGGER_NAME)
            if self.handler not in root.handlers:
                root.addHandler(self.handler)
            root.setLevel(_level_number(level) or logging.INFO)
            stream_levelno = _level_number(stream_level)
            if stream_levelno is not None:
                self._attach_stream(root, stream_levelno)
            self._configured = True

    def _attach_stream(self, root: logging.Logger, levelno: int) -> None:
        # rebind to the current sys.stderr
        if self._stream_handler is None:
            self._stream_handler = logging.StreamHandler(sys.stderr)
            self._stream_handler.setFormatter(logging.Formatter(STREAM_FORMAT))
            root.addHandler(self._stream_handler)
        else:
            self._stream_handler.setStream(sys.stderr)
        self._stream_handler.setLevel(levelno)

    def get_logs(
        self,
        *,
        after: Optional[int] = None,
        limit: Optional[int] = None,
        level: str | int | None = None,
        event_prefix: Optional[str] = None,
    ) -> List[Dict[str, Any]]:
        return self.handler.records(
            after=after, limit=limit, levelno=_level_number(level), event_prefix=event_prefix
        )

    def dump_jsonl(self, path: Path) -> int:
        """Write the buffered records as JSON lines; returns the record count."""

        entries = self.get_logs()
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            for entry in entries:
                handle.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return len(entries)

    def latest_cursor(self) -> int:
        return self.handler.latest_sequence()

    def clear(self) -> None:
        self.handler.clear()


_LOG_MANAGER = LogManager(get_log_capacity())


def ensure_configured() -> None:
    if not _LOG_MANAGER.configured:
        _LOG_MANAGER.configure(level=get_log_level())


def configure_logging(*, level: str | int | None = None, stream_level: str | int | None = None) -> None:
    _LOG_MANAGER.configure(level=level or get_log_level(), stream_level=stream_level)


def get_log_manager() -> LogManager:
    ensure_configured()
    return _LOG_MANAGER


def get_logger(name: str) -> logging.Logger:
    ensure_configured()
    return logging.getLogger(name)


__all__ = [
    "InMemoryLogHandler",
    "LogEntry",
    "LogManager",
    "configure_logging",
    "get_log_manager",
    "get_logger",
    "to_json_safe",
]
