"""Seeded corpus generators, noise injection, and benchmark fixtures.

Two dataset families:

* the twelve-event reference scenario: two actor populations with disjoint
  operation sets over one shared instance, plus one forbidden actor/operation
  probe in the test split;
* parametric synthetic corpora: several service archetypes, each with its
  own actor-name shape, operation set, resource, and region.  Archetypes
  share no entities, and injected anomalies violate the generating grammar
  by construction, so test labels are correct no matter what a model learns.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Any

from .detection import Rule, Ruleset, RULESET_VERSION
from .events import TypeConfig
from .patterns import derive_seed, parse


class GeneratorError(ValueError):
    """Inconsistent generator parameters."""


# ---------------------------------------------------------------------------
# Reference scenario
# ---------------------------------------------------------------------------

INSTANCE_GROUP_IDS = (
    "AttrService-InstanceRole-BTDN",
    "ModelService-InstanceRole-ZXWI",
)
DATA_GROUP_IDS = (
    "AttrService-DataRole-QRIU",
    "ModelService-DataRole-AUIB",
)
INSTANCE_GROUP_OPS = ("CreateInstance", "DeleteInstance", "GetInstanceStatus")
DATA_GROUP_OPS = ("StartInstance", "StopInstance", "GetInstanceStatus")


def _reference_doc(actor: str, operation: str) -> dict[str, Any]:
    return {
        "actor": {"id": actor},
        "api": {
            "operation": operation,
            "request": {"data": {"instanceID": "i-12345", "asnDesc": "AMAZON-AES"}},
        },
    }


def reference_type_config() -> TypeConfig:
    return TypeConfig(
        assignments=(
            ("actor.id", "Role"),
            ("api.operation", "EventName"),
            ("api.request.data.instanceID", "Instance"),
            ("api.request.data.asnDesc", "Asn"),
        )
    )


def reference_dataset() -> tuple[list[dict], list[dict], TypeConfig]:
    """The fixed twelve-event scenario plus a labeled test split.

    The test split replays the twelve normal events and adds one anomaly: a
    data-group actor invoking an instance-group operation.
    """
    train = [
        _reference_doc(actor, op)
        for actor in INSTANCE_GROUP_IDS
        for op in INSTANCE_GROUP_OPS
    ] + [
        _reference_doc(actor, op)
        for actor in DATA_GROUP_IDS
        for op in DATA_GROUP_OPS
    ]
    test = [dict(doc, _label="normal") for doc in train]
    test.append(dict(_reference_doc(DATA_GROUP_IDS[0], "DeleteInstance"), _label="anomaly"))
    return train, test, reference_type_config()


# ---------------------------------------------------------------------------
# Parametric synthetic corpora
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Archetype:
    """One service population: an actor-name shape plus its fixed context."""

    name: str
    actor_prefix: str
    suffix_alphabet: str
    suffix_length: int
    actor_count: int
    operations: tuple[str, ...]
    resource: str
    region: str

    def __post_init__(self) -> None:
        if self.actor_count < 1 or self.suffix_length < 1:
            raise GeneratorError(f"archetype {self.name}: counts must be positive")
        if not self.operations:
            raise GeneratorError(f"archetype {self.name}: needs operations")
        space = len(set(self.suffix_alphabet)) ** self.suffix_length
        if space < 4 * self.actor_count:
            raise GeneratorError(
                f"archetype {self.name}: suffix space too small for fresh probes"
            )


ANOMALY_MODES = ("forbidden_pair", "unknown_signature", "mutated_value")


@dataclass(frozen=True)
class GeneratorSpec:
    archetypes: tuple[Archetype, ...]
    train_count: int
    test_count: int
    anomaly_fraction: float = 0.1
    probe_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.train_count < 0 or self.test_count < 0:
            raise GeneratorError("event counts must be non-negative")
        if not 0.0 <= self.anomaly_fraction <= 1.0:
            raise GeneratorError("anomaly_fraction must lie in [0, 1]")
        if not 0.0 <= self.probe_fraction <= 1.0:
            raise GeneratorError("probe_fraction must lie in [0, 1]")
        if not self.archetypes:
            raise GeneratorError("need at least one archetype")
        names = [a.name for a in self.archetypes]
        if len(set(names)) != len(names):
            raise GeneratorError("archetype names must be distinct")
        prefixes = [a.actor_prefix for a in self.archetypes]
        if len(set(prefixes)) != len(prefixes):
            raise GeneratorError("actor prefixes must be distinct")
        all_ops = [op for a in self.archetypes for op in a.operations]
        if len(set(all_ops)) != len(all_ops):
            raise GeneratorError("operation names must be distinct across archetypes")
        if self.anomaly_fraction > 0 and self.test_count > 0 and len(self.archetypes) < 2:
            raise GeneratorError("forbidden-pair anomalies need at least two archetypes")


DEFAULT_ARCHETYPES = (
    Archetype(
        name="auth",
        actor_prefix="AuthService-ReadRole-",
        suffix_alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ",
        suffix_length=4,
        actor_count=4,
        operations=("GetSession", "ListSessions", "RenewSession"),
        resource="sess-00471",
        region="us-east-9",
    ),
    Archetype(
        name="billing",
        actor_prefix="BillingGateway-AdminRole-",
        suffix_alphabet="0123456789",
        suffix_length=6,
        actor_count=4,
        operations=("ChargeCard", "RefundCharge", "VoidCharge"),
        resource="acct-88012",
        region="eu-core-2",
    ),
    Archetype(
        name="storage",
        actor_prefix="StorageNode-WriteRole-",
        suffix_alphabet="abcdefghijklmnopqrstuvwxyz",
        suffix_length=5,
        actor_count=4,
        operations=("PutBlock", "SealBlock", "ReplicateBlock"),
        resource="blk-5512a",
        region="ap-vault-4",
    ),
    Archetype(
        name="pipeline",
        actor_prefix="DataPipeline-EtlRole-",
        suffix_alphabet="0123456789abcdef",
        suffix_length=8,
        actor_count=4,
        operations=("RunStage", "RetryStage", "SkipStage"),
        resource="job-77331",
        region="sa-flow-1",
    ),
    Archetype(
        name="compute",
        actor_prefix="ComputeFarm-OpsRole-",
        suffix_alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ",
        suffix_length=3,
        actor_count=4,
        operations=("BootNode", "DrainNode", "ImageNode"),
        resource="node-41902",
        region="af-grid-7",
    ),
)


def synthetic_spec(
    seed: int = 0,
    train_count: int = 50_000,
    test_count: int = 5_000,
    anomaly_fraction: float = 0.1,
    probe_fraction: float = 0.1,
) -> GeneratorSpec:
    return GeneratorSpec(
        archetypes=DEFAULT_ARCHETYPES,
        train_count=train_count,
        test_count=test_count,
        anomaly_fraction=anomaly_fraction,
        probe_fraction=probe_fraction,
        seed=seed,
    )


def synthetic_type_config() -> TypeConfig:
    return TypeConfig(
        assignments=(
            ("actor.id", "Role"),
            ("api.operation", "EventName"),
            ("resource.id", "Instance"),
            ("cloud.region", "Region"),
        )
    )


def _synthetic_doc(arch: Archetype, actor: str, operation: str) -> dict[str, Any]:
    return {
        "actor": {"id": actor},
        "api": {"operation": operation},
        "resource": {"id": arch.resource},
        "cloud": {"region": arch.region},
    }


def _draw_suffixes(arch: Archetype, seed: int, count: int, avoid: set[str]) -> list[str]:
    rng = random.Random(derive_seed(seed, "suffixes", arch.name, repr(sorted(avoid))))
    alphabet = "".join(sorted(set(arch.suffix_alphabet)))
    drawn: list[str] = []
    taken = set(avoid)
    while len(drawn) < count:
        suffix = "".join(rng.choice(alphabet) for _ in range(arch.suffix_length))
        if suffix not in taken:
            taken.add(suffix)
            drawn.append(suffix)
    return drawn


def _archetype_actors(spec: GeneratorSpec) -> list[list[str]]:
    return [
        [arch.actor_prefix + sfx for sfx in sorted(_draw_suffixes(arch, spec.seed, arch.actor_count, set()))]
        for arch in spec.archetypes
    ]


def generate(spec: GeneratorSpec) -> tuple[list[dict], list[dict], TypeConfig]:
    """Produce (train documents, labeled test documents, type config).

    The training split is all-normal.  Every (actor, operation) combination
    appears at least once when the budget allows; the rest is drawn
    uniformly.  Anomalies cycle through the three modes and are
    grammar-violating by construction.
    """
    actors = _archetype_actors(spec)
    combos = [
        (ai, actor, op)
        for ai, arch in enumerate(spec.archetypes)
        for actor in actors[ai]
        for op in arch.operations
    ]

    fill_rng = random.Random(derive_seed(spec.seed, "train-fill"))
    train_picks = combos[: spec.train_count]
    while len(train_picks) < spec.train_count:
        train_picks.append(combos[fill_rng.randrange(len(combos))])
    train_docs = [
        _synthetic_doc(spec.archetypes[ai], actor, op) for ai, actor, op in train_picks
    ]
    random.Random(derive_seed(spec.seed, "train-order")).shuffle(train_docs)

    n_anomalies = round(spec.test_count * spec.anomaly_fraction)
    n_normal = spec.test_count - n_anomalies
    n_probe = int(n_normal * spec.probe_fraction)

    test_docs: list[dict] = []
    seen_rng = random.Random(derive_seed(spec.seed, "test-normal"))
    for _ in range(n_normal - n_probe):
        ai, actor, op = combos[seen_rng.randrange(len(combos))]
        test_docs.append(dict(_synthetic_doc(spec.archetypes[ai], actor, op), _label="normal"))

    probe_rng = random.Random(derive_seed(spec.seed, "test-probe"))
    seen_suffixes = [
        {actor[len(arch.actor_prefix):] for actor in actors[ai]}
        for ai, arch in enumerate(spec.archetypes)
    ]
    probe_pool = [
        (ai, arch.actor_prefix + sfx)
        for ai, arch in enumerate(spec.archetypes)
        for sfx in _draw_suffixes(arch, spec.seed + 1, max(2 * arch.actor_count, 4), seen_suffixes[ai])
    ]
    for _ in range(n_probe):
        ai, actor = probe_pool[probe_rng.randrange(len(probe_pool))]
        arch = spec.archetypes[ai]
        op = arch.operations[probe_rng.randrange(len(arch.operations))]
        test_docs.append(dict(_synthetic_doc(arch, actor, op), _label="normal"))

    anomaly_rng = random.Random(derive_seed(spec.seed, "test-anomaly"))
    for index in range(n_anomalies):
        mode = ANOMALY_MODES[index % len(ANOMALY_MODES)]
        ai, actor, op = combos[anomaly_rng.randrange(len(combos))]
        arch = spec.archetypes[ai]
        if mode == "forbidden_pair":
            others = [b for b in range(len(spec.archetypes)) if b != ai]
            bi = others[anomaly_rng.randrange(len(others))]
            foreign = spec.archetypes[bi]
            foreign_op = foreign.operations[anomaly_rng.randrange(len(foreign.operations))]
            doc = _synthetic_doc(foreign, actor, foreign_op)  # actor from ai, rest from bi
        elif mode == "unknown_signature":
            doc = _synthetic_doc(arch, actor, op)
            doc["audit"] = {"trace": "on"}
        else:  # mutated_value: resources are constants, so any deviation is out of grammar
            doc = _synthetic_doc(arch, actor, op)
            doc["resource"] = {"id": arch.resource + "-x"}
        test_docs.append(dict(doc, _label="anomaly"))

    random.Random(derive_seed(spec.seed, "test-order")).shuffle(test_docs)
    return train_docs, test_docs, synthetic_type_config()


# ---------------------------------------------------------------------------
# Noise injection
# ---------------------------------------------------------------------------

PERTURB_MODES = ("drop", "duplicate", "shuffle")


def perturb(items: list, mode: str, level: float, seed: int = 0) -> list:
    """Noise a sequence: drop, duplicate, or locally shuffle a level-sized
    share.  Level 0 is the identity; drop keeps at least ceil(1%) of the
    input because the floor never rounds up."""
    if mode not in PERTURB_MODES:
        raise GeneratorError(f"unknown perturbation mode {mode!r}")
    if not 0.0 <= level <= 0.99:
        raise GeneratorError("level must lie in [0, 0.99]")
    rng = random.Random(derive_seed(seed, "perturb", mode, repr(level)))
    items = list(items)
    count = int(level * len(items))
    if mode == "drop":
        doomed = set(rng.sample(range(len(items)), count))
        return [item for index, item in enumerate(items) if index not in doomed]
    if mode == "duplicate":
        out = list(items)
        for _ in range(count):
            out.insert(rng.randrange(len(out) + 1), items[rng.randrange(len(items))])
        return out
    positions = sorted(rng.sample(range(len(items)), count))
    moved = [items[i] for i in positions]
    rng.shuffle(moved)
    out = list(items)
    for position, item in zip(positions, moved):
        out[position] = item
    return out


# ---------------------------------------------------------------------------
# Benchmark fixture
# ---------------------------------------------------------------------------

def bench_type_config() -> TypeConfig:
    return TypeConfig(
        assignments=(
            ("actor.id", "Role"),
            ("api.operation", "EventName"),
            ("resource.id", "Instance"),
            ("cloud.region", "Region"),
            ("payload.*", "Blob"),
            ("meta.*", "Marker"),
        )
    )


def bench_fixture(
    seed: int = 0,
    event_count: int = 20_000,
    groups: int = 10,
    rules_per_group: int = 5,
    payload_min: int = 850,
    payload_max: int = 950,
    anomaly_share: float = 0.02,
) -> tuple[Ruleset, list[str]]:
    """A hand-built ruleset (groups x rules_per_group rules, distinct
    signature per group) and ~1KB JSONL events drawn from the rules'
    languages, with a small share of value-mismatch anomalies."""
    config = bench_type_config()
    rules = []
    rule_meta = []
    index = 1
    for g in range(groups):
        marker_key = f"meta.g{g:02d}"
        for j in range(rules_per_group):
            patterns = {
                "actor.id": parse(f"Group{g:02d}Svc-Role-[A-Z]{{4}}"),
                "api.operation": parse(f"Op{g:02d}x{j}"),
                "resource.id": parse(f"res-{g:02d}{j}00"),
                "cloud.region": parse(f"zone-{g:02d}"),
                "payload.blob": parse(f"[A-Za-z0-9]{{{payload_min},{payload_max}}}"),
                marker_key: parse("enabled"),
            }
            signature = tuple(sorted((k, config.type_for(k)) for k in patterns))
            rules.append(
                Rule(rule_id=f"r{index:04d}", support=1, signature=signature, patterns=patterns)
            )
            rule_meta.append((g, j, marker_key))
            index += 1
    ruleset = Ruleset(RULESET_VERSION, tuple(rules), bench_type_config())

    rng = random.Random(derive_seed(seed, "bench-events"))
    alnum = "abcdefghijklmnopqrstuvwxyz0123456789"
    upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    lines = []
    for _ in range(event_count):
        pick = rng.randrange(len(rules))
        g, j, marker_key = rule_meta[pick]
        op = f"Op{g:02d}x{j}"
        if rng.random() < anomaly_share:
            op = f"Op{g:02d}zz"  # outside every rule's operation literal
        doc = {
            "actor": {"id": f"Group{g:02d}Svc-Role-" + "".join(rng.choice(upper) for _ in range(4))},
            "api": {"operation": op},
            "resource": {"id": f"res-{g:02d}{j}00"},
            "cloud": {"region": f"zone-{g:02d}"},
            "payload": {"blob": "".join(
                rng.choice(alnum) for _ in range(rng.randint(payload_min, payload_max))
            )},
            "meta": {marker_key.split(".", 1)[1]: "enabled"},
        }
        lines.append(json.dumps(doc, sort_keys=True))
    return ruleset, lines
