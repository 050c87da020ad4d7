"""Event ingestion: flattening JSON objects into typed key/value triples.

An event arrives as a JSON object of arbitrary nesting and leaves as a flat,
sorted tuple of ``(key, value, type)`` triples.  Keys are dotted paths, list
elements get their index as a path component, and every scalar is
canonicalized to a string.  The semantic type of each key comes from an
ordered glob table; by default a key simply names its own type.
"""

from __future__ import annotations

import fnmatch
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Mapping

LABEL_FIELD = "_label"
NORMAL, ANOMALY = "normal", "anomaly"
LABELS = (NORMAL, ANOMALY)

# (key, type) pairs, sorted by key
Signature = tuple[tuple[str, str], ...]


class EventIngestionError(ValueError):
    """Raised for events that cannot be turned into a well-formed record."""


@dataclass(frozen=True)
class TypeConfig:
    """Key filtering and type assignment.

    ``assignments`` is an ordered ``(glob, type)`` table; the first matching
    glob wins.  A key matching no glob gets ``default_type``, or, when that
    is None, its own path as the type.  ``include``/``exclude`` are key
    globs; an empty include list admits everything not excluded.
    """

    assignments: tuple[tuple[str, str], ...] = ()
    default_type: str | None = None
    include: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()

    def type_for(self, key: str) -> str:
        for glob, type_name in self.assignments:
            if fnmatch.fnmatchcase(key, glob):
                return type_name
        return self.default_type if self.default_type is not None else key

    def admits(self, key: str) -> bool:
        if self.include and not any(fnmatch.fnmatchcase(key, g) for g in self.include):
            return False
        return not any(fnmatch.fnmatchcase(key, g) for g in self.exclude)

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "types": [list(pair) for pair in self.assignments],
            "default": self.default_type,
            "include": list(self.include),
            "exclude": list(self.exclude),
        }

    @classmethod
    def from_json_obj(cls, obj: Any) -> "TypeConfig":
        if not isinstance(obj, dict):
            raise EventIngestionError("type config must be a JSON object")
        if "types" not in obj and not (set(obj) & {"default", "include", "exclude"}):
            # Shorthand: a flat {glob: type} mapping.
            pairs = obj.items()
            if not all(isinstance(k, str) and isinstance(v, str) for k, v in pairs):
                raise EventIngestionError("type mapping entries must be strings")
            return cls(assignments=tuple((k, v) for k, v in obj.items()))
        raw = obj.get("types", [])
        if isinstance(raw, dict):
            assignments = tuple((k, v) for k, v in raw.items())
        else:
            assignments = tuple((str(g), str(t)) for g, t in raw)
        return cls(
            assignments=assignments,
            default_type=obj.get("default"),
            include=tuple(obj.get("include", ())),
            exclude=tuple(obj.get("exclude", ())),
        )

    @classmethod
    def load(cls, path: str) -> "TypeConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n")


@dataclass(frozen=True)
class EventRecord:
    """A flattened event: sorted, typed key/value triples plus an optional
    ground-truth label (labels ride along for evaluation and never reach the
    model)."""

    triples: tuple[tuple[str, str, str], ...]
    label: str | None = None

    @cached_property
    def signature(self) -> Signature:
        return tuple((k, t) for k, _, t in self.triples)

    @cached_property
    def values(self) -> dict[str, str]:
        return {k: v for k, v, _ in self.triples}

    @property
    def dedup_key(self) -> tuple[tuple[str, str, str], ...]:
        return self.triples

    def value_at(self, key: str, type_name: str) -> str:
        for k, v, t in self.triples:
            if k == key and t == type_name:
                return v
        raise KeyError(f"event has no ({key}, {type_name}) entry")


def canonical_scalar(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):  # before int: bool is an int subclass
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "null"
    raise EventIngestionError(f"unsupported scalar {value!r}")


def flatten_event(document: Mapping[str, Any], config: TypeConfig | None = None) -> EventRecord:
    """Flatten one JSON object into an EventRecord.

    Raises EventIngestionError for non-objects, colliding flattened keys,
    bad labels, and events with no modeled fields left after filtering.
    """
    if not isinstance(document, dict):
        raise EventIngestionError("event must be a JSON object")
    config = config or TypeConfig()
    items = dict(document)
    label = None
    if LABEL_FIELD in items:
        label = items.pop(LABEL_FIELD)
        if label not in LABELS:
            raise EventIngestionError(f"label must be one of {LABELS}, got {label!r}")

    flat: dict[str, str] = {}

    def walk(prefix: str, node: Any) -> None:
        if isinstance(node, dict):
            for key, child in node.items():
                if not isinstance(key, str) or not key:
                    raise EventIngestionError("object keys must be non-empty strings")
                walk(f"{prefix}.{key}" if prefix else key, child)
        elif isinstance(node, list):
            for index, child in enumerate(node):
                walk(f"{prefix}.{index}", child)
        else:
            if prefix in flat:
                raise EventIngestionError(f"duplicate flattened key: {prefix}")
            flat[prefix] = canonical_scalar(node)

    walk("", items)
    kept = {k: v for k, v in flat.items() if config.admits(k)}
    if not kept:
        raise EventIngestionError("event has no modeled fields")
    triples = tuple(sorted((k, v, config.type_for(k)) for k, v in kept.items()))
    return EventRecord(triples, label)


def parse_event_line(line: str, config: TypeConfig | None = None) -> EventRecord:
    try:
        document = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventIngestionError(f"invalid JSON: {exc}") from exc
    return flatten_event(document, config)


def read_events(path: str, config: TypeConfig | None = None) -> list[EventRecord]:
    """Load a JSONL file strictly: any bad line aborts with its line number."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(parse_event_line(line, config))
            except EventIngestionError as exc:
                raise EventIngestionError(f"line {lineno}: {exc}") from exc
    return records


def iter_lines(path: str) -> Iterable[str]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield line


def write_jsonl(path: str, documents: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
