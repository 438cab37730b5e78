"""Possibly incomplete events, traces and logs.

An event may lack its activity name, its timestamp, or both. Traces are
unordered: the only ordering information comes from timestamps.

Two input formats are understood:

* JSON: a trace is ``[[activity, timestamp], ...]`` where either slot may
  be ``null``; a log is an array of traces.
* an XES subset: ``<log><trace><event>`` elements whose children may carry
  ``concept:name`` and ``time:timestamp`` keys. Integer timestamps are taken
  as-is; ISO dates are replaced by their dense rank within the trace.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator, Sequence

__all__ = [
    "EventLog",
    "NegativeTimestamp",
    "ObservedEvent",
    "ParseError",
    "Trace",
    "dump_log",
    "dump_trace",
    "parse_log",
    "parse_trace",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class NegativeTimestamp(ParseError):
    pass


@dataclass(frozen=True)
class ObservedEvent:
    id: str
    activity: str | None = None
    timestamp: int | None = None

    @property
    def is_complete(self) -> bool:
        return self.activity is not None and self.timestamp is not None

    def shape(self) -> str:
        return "({},{})".format(
            self.activity if self.activity is not None else "_",
            self.timestamp if self.timestamp is not None else "_",
        )


@dataclass(frozen=True)
class Trace:
    events: tuple[ObservedEvent, ...] = ()

    def __post_init__(self) -> None:
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            raise ValueError("event ids must be unique within a trace")

    @classmethod
    def of(cls, pairs: Iterable[Sequence]) -> Trace:
        """Build a trace from ``(activity, timestamp)`` pairs; None marks a gap."""
        events = []
        for i, (activity, ts) in enumerate(pairs):
            if ts is not None and ts < 0:
                raise NegativeTimestamp(f"negative timestamp {ts} in event {i}")
            events.append(ObservedEvent(f"e{i}", activity, ts))
        return cls(tuple(events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[ObservedEvent]:
        return iter(self.events)

    def event(self, event_id: str) -> ObservedEvent:
        for e in self.events:
            if e.id == event_id:
                return e
        raise KeyError(event_id)

    @property
    def is_complete(self) -> bool:
        return all(e.is_complete for e in self.events)

    def pairs(self) -> list[list]:
        return [[e.activity, e.timestamp] for e in self.events]

    def without(self, index: int) -> Trace:
        return Trace.of(p for i, p in enumerate(self.pairs()) if i != index)

    def masked(self, index: int, activity: bool = False, timestamp: bool = False) -> Trace:
        pairs = self.pairs()
        if activity:
            pairs[index][0] = None
        if timestamp:
            pairs[index][1] = None
        return Trace.of(pairs)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...] = ()

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def __getitem__(self, i: int) -> Trace:
        return self.traces[i]


# -- JSON ----------------------------------------------------------------------

def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _array_offsets(text: str, depth: int) -> list[int]:
    """Offsets of every '[' opening at nesting depth `depth` (root = 1)."""
    offsets: list[int] = []
    level = 0
    in_string = escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch in "[{":
            level += 1
            if ch == "[" and level == depth:
                offsets.append(i)
        elif ch in "]}":
            level -= 1
    return offsets


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _event_from_json(item, where: tuple[int, int], index: int) -> ObservedEvent:
    line, col = where
    if not isinstance(item, list) or len(item) != 2:
        raise ParseError("event must be an [activity, timestamp] pair", line, col)
    activity, ts = item
    if activity is not None and (not isinstance(activity, str) or not activity):
        raise ParseError("activity must be a non-empty string or null", line, col)
    if ts is not None:
        if isinstance(ts, bool) or not isinstance(ts, int):
            raise ParseError("timestamp must be a natural number or null", line, col)
        if ts < 0:
            raise NegativeTimestamp(f"negative timestamp {ts}", line, col)
    return ObservedEvent(f"e{index}", activity, ts)


def _trace_from_json(data, text: str, offsets: list[int], origin: tuple[int, int]) -> Trace:
    if not isinstance(data, list):
        raise ParseError("trace must be a JSON array", *origin)
    events = []
    for i, item in enumerate(data):
        where = _line_col(text, offsets[i]) if i < len(offsets) else origin
        events.append(_event_from_json(item, where, i))
    return Trace(tuple(events))


def parse_trace(text: str) -> Trace:
    """Parse one trace in the JSON pair format."""
    data = _load_json(text)
    return _trace_from_json(data, text, _array_offsets(text, 2), (1, 1))


def _parse_json_log(text: str) -> EventLog:
    data = _load_json(text)
    if not isinstance(data, list):
        raise ParseError("log must be a JSON array of traces")
    trace_offsets = _array_offsets(text, 2)
    event_offsets = _array_offsets(text, 3)
    traces = []
    for i, item in enumerate(data):
        start = trace_offsets[i] if i < len(trace_offsets) else 0
        end = trace_offsets[i + 1] if i + 1 < len(trace_offsets) else len(text)
        own = [o for o in event_offsets if start < o < end]
        traces.append(_trace_from_json(item, text, own, _line_col(text, start)))
    return EventLog(tuple(traces))


# -- XES subset -----------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_instant(value: str) -> datetime:
    return datetime.fromisoformat(value.replace("Z", "+00:00"))


def _parse_xes(text: str) -> EventLog:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc}", line, col + 1) from None
    if _local(root.tag) != "log":
        raise ParseError("XES root element must be <log>")
    traces = []
    for trace_el in (el for el in root if _local(el.tag) == "trace"):
        names: list[str | None] = []
        stamps: list[int | datetime | None] = []
        for event_el in (el for el in trace_el if _local(el.tag) == "event"):
            name = stamp = None
            for attr in event_el:
                key, value = attr.get("key"), attr.get("value")
                if key == "concept:name":
                    name = value or None
                elif key == "time:timestamp" and value is not None:
                    kind = _local(attr.tag)
                    try:
                        stamp = int(value) if kind == "int" else _parse_instant(value)
                    except ValueError:
                        raise ParseError(f"bad timestamp {value!r}") from None
                    if isinstance(stamp, int) and stamp < 0:
                        raise NegativeTimestamp(f"negative timestamp {stamp}")
            names.append(name)
            stamps.append(stamp)
        instants = sorted({s for s in stamps if isinstance(s, datetime)})
        if instants and any(isinstance(s, int) for s in stamps):
            raise ParseError("trace mixes integer and date timestamps")
        rank = {s: i + 1 for i, s in enumerate(instants)}
        events = tuple(
            ObservedEvent(f"e{i}", n, rank[s] if isinstance(s, datetime) else s)
            for i, (n, s) in enumerate(zip(names, stamps))
        )
        traces.append(Trace(events))
    return EventLog(tuple(traces))


def parse_log(text: str) -> EventLog:
    """Parse a log from JSON or from the XES subset (detected by a leading '<')."""
    if text.lstrip().startswith("<"):
        return _parse_xes(text)
    return _parse_json_log(text)


def dump_trace(trace: Trace) -> str:
    return json.dumps(trace.pairs())


def dump_log(log: EventLog) -> str:
    return json.dumps([t.pairs() for t in log.traces])
