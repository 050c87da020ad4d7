"""Ruleset serialization, validation, and event classification.

A ruleset is a list of rules, each a signature plus one pattern per key; an
event is normal when some rule of its signature matches every value.  A
validated ruleset guarantees at most one such rule, so scanning stops at the
first hit.  Matching compiles each rule once — both per key and as a single
combined expression over NUL-joined values, which is what the hot path uses.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .events import EventIngestionError, EventRecord, Signature, TypeConfig, parse_event_line
from .patterns import Pattern, parse

RULESET_VERSION = "1"

_JOIN = "\x00"  # never appears in rendered patterns (printable-ASCII inventory)


class RulesetFormatError(ValueError):
    """Malformed ruleset file or inconsistent rule definition."""


@dataclass(frozen=True)
class Rule:
    rule_id: str
    support: int
    signature: Signature
    patterns: dict[str, Pattern]

    # compiled forms, filled in __post_init__
    _per_key: dict[str, "re.Pattern[str]"] = field(repr=False, compare=False, default=None)
    _combined: "re.Pattern[str]" = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        keys = [k for k, _ in self.signature]
        if sorted(self.patterns) != sorted(keys) or len(set(keys)) != len(keys):
            raise RulesetFormatError(
                f"rule {self.rule_id}: patterns must cover the signature keys exactly"
            )
        per_key = {k: re.compile(self.patterns[k].rendered) for k in keys}
        combined = re.compile(_JOIN.join(self.patterns[k].rendered for k in keys))
        object.__setattr__(self, "_per_key", per_key)
        object.__setattr__(self, "_combined", combined)

    def matches_values(self, values: dict[str, str]) -> bool:
        keys = [k for k, _ in self.signature]
        if any(_JOIN in values[k] for k in keys):
            return all(self._per_key[k].fullmatch(values[k]) for k in keys)
        return self._combined.fullmatch(_JOIN.join(values[k] for k in keys)) is not None

    def failing_keys(self, values: dict[str, str]) -> tuple[str, ...]:
        return tuple(
            k for k, _ in self.signature if self._per_key[k].fullmatch(values[k]) is None
        )


@dataclass(frozen=True)
class Ruleset:
    version: str
    rules: tuple[Rule, ...]
    types: TypeConfig | None = None
    _buckets: dict[Signature, tuple[Rule, ...]] = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        buckets: dict[Signature, list[Rule]] = {}
        for rule in self.rules:
            buckets.setdefault(rule.signature, []).append(rule)
        frozen = {
            sig: tuple(sorted(members, key=lambda r: (-r.support, r.rule_id)))
            for sig, members in buckets.items()
        }
        object.__setattr__(self, "_buckets", frozen)

    def bucket(self, signature: Signature) -> tuple[Rule, ...]:
        return self._buckets.get(signature, ())


UNKNOWN_SIGNATURE = "unknown_signature"
VALUE_MISMATCH = "value_mismatch"
MAX_NEAREST = 3


@dataclass(frozen=True)
class DetectionResult:
    verdict: str  # "normal" | "anomalous" | "malformed"
    rule_id: str | None = None
    failed_keys: tuple[str, ...] | None = None
    nearest_rules: tuple[str, ...] | None = None
    reason: str | None = None

    def to_json_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"verdict": self.verdict}
        if self.rule_id is not None:
            obj["rule_id"] = self.rule_id
        if self.failed_keys is not None:
            obj["failed_keys"] = list(self.failed_keys)
        if self.nearest_rules is not None:
            obj["nearest_rules"] = list(self.nearest_rules)
        if self.reason is not None:
            obj["reason"] = self.reason
        return obj


def match_event(ruleset: Ruleset, event: EventRecord) -> DetectionResult:
    """Classify one event.

    Normal events name their matching rule; anomalous events explain
    themselves with either the unknown-signature reason or the nearest rules
    of the same signature and the keys that failed against the best one.
    """
    bucket = ruleset.bucket(event.signature)
    if not bucket:
        return DetectionResult("anomalous", reason=UNKNOWN_SIGNATURE)
    values = event.values
    for rule in bucket:
        if rule.matches_values(values):
            return DetectionResult("normal", rule_id=rule.rule_id)
    ranked: list[tuple[int, Rule, tuple[str, ...]]] = []
    for rule in bucket:
        failed = rule.failing_keys(values)
        ranked.append((len(failed), rule, failed))
    best = min(count for count, _, _ in ranked)
    nearest = [(rule, failed) for count, rule, failed in ranked if count == best]
    return DetectionResult(
        "anomalous",
        failed_keys=nearest[0][1],
        nearest_rules=tuple(rule.rule_id for rule, _ in nearest[:MAX_NEAREST]),
        reason=VALUE_MISMATCH,
    )


def validate_ruleset(ruleset: Ruleset) -> list[tuple[str, str]]:
    """Same-signature rule pairs whose patterns intersect at every key —
    each one a way for a single event to match twice.  Empty means sound."""
    from .hypergraph import _intersects_cached  # shared cache

    violations: list[tuple[str, str]] = []
    for signature, rules in sorted(ruleset._buckets.items()):
        ordered = sorted(rules, key=lambda r: r.rule_id)
        for i, r1 in enumerate(ordered):
            for r2 in ordered[i + 1 :]:
                if all(
                    _intersects_cached(r1.patterns[k], r2.patterns[k]) for k, _ in signature
                ):
                    violations.append((r1.rule_id, r2.rule_id))
    return violations


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def ruleset_to_json_obj(ruleset: Ruleset) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "version": ruleset.version,
        "rules": [
            {
                "id": rule.rule_id,
                "support": rule.support,
                "signature": [list(pair) for pair in rule.signature],
                "patterns": {k: p.rendered for k, p in rule.patterns.items()},
            }
            for rule in ruleset.rules
        ],
    }
    if ruleset.types is not None:
        obj["types"] = ruleset.types.to_json_obj()
    return obj


def dumps_ruleset(ruleset: Ruleset) -> str:
    return json.dumps(ruleset_to_json_obj(ruleset), sort_keys=True, indent=2) + "\n"


def save_ruleset(ruleset: Ruleset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_ruleset(ruleset))


def ruleset_from_json_obj(obj: Any) -> Ruleset:
    if not isinstance(obj, dict) or "rules" not in obj:
        raise RulesetFormatError("ruleset must be an object with a rules list")
    rules = []
    for entry in obj["rules"]:
        try:
            signature = tuple(sorted((str(k), str(t)) for k, t in entry["signature"]))
            patterns = {str(k): parse(v) for k, v in entry["patterns"].items()}
            rules.append(
                Rule(
                    rule_id=str(entry["id"]),
                    support=int(entry["support"]),
                    signature=signature,
                    patterns=patterns,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RulesetFormatError(f"bad rule entry {entry!r}: {exc}") from exc
    types = TypeConfig.from_json_obj(obj["types"]) if "types" in obj else None
    return Ruleset(str(obj.get("version", RULESET_VERSION)), tuple(rules), types)


def load_ruleset(path: str) -> Ruleset:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RulesetFormatError(f"invalid ruleset JSON: {exc}") from exc
    return ruleset_from_json_obj(obj)


# ---------------------------------------------------------------------------
# Streaming
# ---------------------------------------------------------------------------

@dataclass
class StreamCounters:
    total: int = 0
    normal: int = 0
    anomalous: int = 0
    malformed: int = 0
    wall_time_s: float = 0.0

    @property
    def events_per_s(self) -> float:
        return self.total / self.wall_time_s if self.wall_time_s > 0 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "normal": self.normal,
            "anomalous": self.anomalous,
            "malformed": self.malformed,
            "wall_time_s": self.wall_time_s,
            "events_per_s": self.events_per_s,
        }


def iter_detection(
    ruleset: Ruleset,
    lines: Iterable[str],
    types: TypeConfig | None = None,
    counters: StreamCounters | None = None,
) -> Iterator[DetectionResult]:
    """Classify a stream of JSONL lines, order-preserving.

    Malformed lines become 'malformed' results (and count separately)
    instead of aborting the stream.
    """
    config = types if types is not None else ruleset.types
    started = time.perf_counter()
    for line in lines:
        if counters:
            counters.total += 1
        try:
            event = parse_event_line(line, config)
        except EventIngestionError as exc:
            if counters:
                counters.malformed += 1
            yield DetectionResult("malformed", reason=str(exc))
            continue
        result = match_event(ruleset, event)
        if counters:
            if result.verdict == "normal":
                counters.normal += 1
            else:
                counters.anomalous += 1
        yield result
    if counters:
        counters.wall_time_s = time.perf_counter() - started


def run_detection(
    ruleset: Ruleset, lines: Iterable[str], types: TypeConfig | None = None
) -> tuple[list[DetectionResult], StreamCounters]:
    counters = StreamCounters()
    results = list(iter_detection(ruleset, lines, types, counters))
    return results, counters


def match_events_timed(
    ruleset: Ruleset, events: list[EventRecord]
) -> StreamCounters:
    """Pure matching throughput over pre-parsed events (no JSON, no
    flattening)."""
    counters = StreamCounters()
    started = time.perf_counter()
    for event in events:
        result = match_event(ruleset, event)
        counters.total += 1
        if result.verdict == "normal":
            counters.normal += 1
        else:
            counters.anomalous += 1
    counters.wall_time_s = time.perf_counter() - started
    return counters
