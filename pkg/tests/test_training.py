import random

import pytest

from ruleloom.detection import dumps_ruleset, validate_ruleset
from ruleloom.events import flatten_event
from ruleloom.patterns import matches, parse
from ruleloom.training import (
    TrainConfig,
    TrainingError,
    accepted_events,
    generalization_check,
    train,
)

DATA_ROLE_PATTERN = "(?:Attr|Model)Service-DataRole-(?:AUIB|QRIU)"
INSTANCE_ROLE_PATTERN = "(?:Attr|Model)Service-InstanceRole-(?:BTDN|ZXWI)"


def random_corpus(rng: random.Random) -> list:
    ops = ["read", "write", "delete"]
    users = [f"user-{i:02d}" for i in range(rng.randint(2, 5))]
    zones = ["zone-a", "zone-b"]
    docs = []
    for _ in range(rng.randint(6, 18)):
        docs.append(
            {
                "op": rng.choice(ops),
                "user": rng.choice(users),
                "zone": rng.choice(zones),
            }
        )
    return [flatten_event(doc) for doc in docs]


# ---------------------------------------------------------------------------
# The twelve-event reference run
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def reference_run(request):
    reference = request.getfixturevalue("reference")
    reference_records = request.getfixturevalue("reference_records")
    _, _, types = reference
    return train(reference_records, type_config=types)


def test_reference_training_yields_six_rules(reference_run):
    ruleset, report = reference_run
    assert len(ruleset.rules) == 6
    assert report.fixpoint
    assert report.rounds == 2
    assert report.committed_full == 2
    assert report.committed_partial == 0
    assert report.aborted == 0
    assert report.vertices == 9
    assert report.edges == 6
    assert report.wall_time_s < 5.0


def test_reference_rules_generalize_roles_only(reference_run):
    ruleset, _ = reference_run
    role_patterns = {rule.patterns["actor.id"].rendered for rule in ruleset.rules}
    assert role_patterns == {DATA_ROLE_PATTERN, INSTANCE_ROLE_PATTERN}
    for rule in ruleset.rules:
        assert rule.patterns["api.operation"].rendered.isalpha()  # never merged
        assert rule.patterns["api.request.data.instanceID"].rendered == "i-12345"
        assert rule.patterns["api.request.data.asnDesc"].rendered == "AMAZON-AES"


def test_reference_rule_operations_split_by_role(reference_run):
    ruleset, _ = reference_run
    by_role = {}
    for rule in ruleset.rules:
        by_role.setdefault(rule.patterns["actor.id"].rendered, set()).add(
            rule.patterns["api.operation"].rendered
        )
    assert by_role[DATA_ROLE_PATTERN] == {
        "GetInstanceStatus",
        "StartInstance",
        "StopInstance",
    }
    assert by_role[INSTANCE_ROLE_PATTERN] == {
        "CreateInstance",
        "DeleteInstance",
        "GetInstanceStatus",
    }


def test_reference_supports_count_merged_events(reference_run):
    ruleset, _ = reference_run
    assert all(rule.support == 2 for rule in ruleset.rules)
    assert sum(rule.support for rule in ruleset.rules) == 12


def test_reference_rule_ids_are_stable_and_padded(reference_run):
    ruleset, _ = reference_run
    assert [rule.rule_id for rule in ruleset.rules] == [
        f"r{i:04d}" for i in range(1, 7)
    ]


def test_reference_ruleset_is_sound_and_unique(reference_run, reference_records):
    ruleset, _ = reference_run
    assert generalization_check(ruleset, reference_records) == []
    assert validate_ruleset(ruleset) == []
    assert accepted_events(ruleset, reference_records) == set(range(12))


def test_role_patterns_reject_the_other_role(reference_run):
    ruleset, _ = reference_run
    instance_rule = next(
        rule for rule in ruleset.rules
        if rule.patterns["actor.id"].rendered == INSTANCE_ROLE_PATTERN
    )
    pattern = instance_rule.patterns["actor.id"]
    assert matches(pattern, "AttrService-InstanceRole-BTDN")
    assert matches(pattern, "ModelService-InstanceRole-ZXWI")
    assert not matches(pattern, "AttrService-DataRole-QRIU")
    assert not matches(pattern, "ModelService-DataRole-AUIB")


# ---------------------------------------------------------------------------
# Loop behavior
# ---------------------------------------------------------------------------

def test_training_requires_events():
    with pytest.raises(TrainingError):
        train([])


def test_single_event_learns_one_literal_rule():
    record = flatten_event({"op": "Start", "id": "i-1"})
    ruleset, report = train([record])
    assert len(ruleset.rules) == 1
    assert ruleset.rules[0].support == 1
    assert report.fixpoint and report.rounds == 1
    assert report.attempted == 0


def test_round_budget_stops_early(reference, reference_records):
    _, _, types = reference
    config = TrainConfig(max_outer_iterations=1)
    ruleset, report = train(reference_records, config, types)
    assert report.rounds == 1
    assert not report.fixpoint
    assert len(ruleset.rules) == 6  # both merges landed in round one
    assert generalization_check(ruleset, reference_records) == []


def test_pair_cap_trades_rounds_for_passes(reference, reference_records):
    _, _, types = reference
    capped, report = train(reference_records, TrainConfig(pair_cap=1), types)
    default, _ = train(reference_records, type_config=types)
    assert report.rounds == 3  # one merge per round, then the empty round
    assert report.fixpoint
    assert dumps_ruleset(capped) == dumps_ruleset(default)


def test_unfrozen_operations_also_merge(reference, reference_records):
    _, _, types = reference
    ruleset, report = train(reference_records, TrainConfig(frozen_types=()), types)
    assert len(ruleset.rules) < 6
    assert report.committed > 2
    assert generalization_check(ruleset, reference_records) == []
    assert sum(rule.support for rule in ruleset.rules) == 12


def test_verify_invariants_passes_on_reference(reference, reference_records):
    _, _, types = reference
    ruleset, _ = train(reference_records, TrainConfig(verify_invariants=True), types)
    assert len(ruleset.rules) == 6


@pytest.mark.parametrize("bad", [{"max_outer_iterations": 0}, {"pair_cap": 0}])
def test_config_validation(bad):
    with pytest.raises(TrainingError):
        TrainConfig(**bad)


def test_training_is_order_and_duplication_invariant(reference_records):
    rng = random.Random(23)
    doubled = list(reference_records) + [reference_records[i] for i in range(0, 12, 2)]
    rng.shuffle(doubled)
    baseline, _ = train(reference_records)
    perturbed, _ = train(doubled)
    assert dumps_ruleset(perturbed) == dumps_ruleset(baseline)


# ---------------------------------------------------------------------------
# Randomized corpora
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_random_corpora_train_soundly(seed):
    rng = random.Random(seed + 13000)
    records = random_corpus(rng)
    ruleset, report = train(records, TrainConfig(verify_invariants=True))
    assert generalization_check(ruleset, records) == []
    assert validate_ruleset(ruleset) == []
    assert report.committed + report.aborted == report.attempted
    assert report.fixpoint
    distinct = len({record.dedup_key for record in records})
    assert sum(rule.support for rule in ruleset.rules) == distinct
    assert accepted_events(ruleset, records) == set(range(len(records)))


def test_merged_user_patterns_stay_anchored():
    # two-digit suffixes generalize; the shared stem must survive merging
    records = [
        flatten_event({"op": "read", "user": f"user-{i:02d}"}) for i in range(4)
    ]
    ruleset, _ = train(records)
    assert len(ruleset.rules) == 1
    pattern = ruleset.rules[0].patterns["user"]
    assert matches(pattern, "user-00") and matches(pattern, "user-03")
    assert not matches(pattern, "admin-00")
