import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruleloom.events import (
    ANOMALY,
    LABEL_FIELD,
    NORMAL,
    EventIngestionError,
    EventRecord,
    TypeConfig,
    canonical_scalar,
    flatten_event,
    iter_lines,
    parse_event_line,
    read_events,
    write_jsonl,
)

# ---------------------------------------------------------------------------
# Scalar canonicalization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "value, expected",
    [
        ("text", "text"),
        ("", ""),
        (True, "true"),
        (False, "false"),
        (5, "5"),
        (-17, "-17"),
        (1.5, "1.5"),
        (0.1, "0.1"),
        (None, "null"),
    ],
)
def test_canonical_scalar(value, expected):
    assert canonical_scalar(value) == expected


def test_booleans_do_not_collapse_into_integers():
    assert canonical_scalar(True) != canonical_scalar(1)
    assert canonical_scalar(False) != canonical_scalar(0)


def test_canonical_scalar_rejects_non_json_scalars():
    with pytest.raises(EventIngestionError):
        canonical_scalar(b"bytes")
    with pytest.raises(EventIngestionError):
        canonical_scalar({1, 2})


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------

def test_flatten_nested_objects_and_lists():
    record = flatten_event(
        {"a": {"b": 1, "c": [True, {"d": "x"}]}, "top": None}
    )
    assert record.triples == (
        ("a.b", "1", "a.b"),
        ("a.c.0", "true", "a.c.0"),
        ("a.c.1.d", "x", "a.c.1.d"),
        ("top", "null", "top"),
    )
    assert record.label is None


def test_triples_are_sorted_by_key():
    record = flatten_event({"z": 1, "a": 2, "m": 3})
    assert [k for k, _, _ in record.triples] == ["a", "m", "z"]


def test_default_type_is_the_key_itself():
    record = flatten_event({"op": "Start"})
    assert record.signature == (("op", "op"),)


def test_label_is_extracted_and_never_modeled():
    record = flatten_event({"op": "Start", LABEL_FIELD: ANOMALY})
    assert record.label == ANOMALY
    assert all(k != LABEL_FIELD for k, _, _ in record.triples)
    assert flatten_event({"op": "x", LABEL_FIELD: NORMAL}).label == NORMAL


@pytest.mark.parametrize("bad", ["weird", 1, None, True])
def test_unknown_labels_are_rejected(bad):
    with pytest.raises(EventIngestionError):
        flatten_event({"op": "x", LABEL_FIELD: bad})


@pytest.mark.parametrize("doc", [[], "text", 7, None])
def test_non_object_events_are_rejected(doc):
    with pytest.raises(EventIngestionError):
        flatten_event(doc)


def test_colliding_flattened_keys_are_rejected():
    with pytest.raises(EventIngestionError, match="duplicate"):
        flatten_event({"a": {"b": 1}, "a.b": 2})
    with pytest.raises(EventIngestionError, match="duplicate"):
        flatten_event({"a": [1], "a.0": "clash"})


def test_empty_keys_are_rejected():
    with pytest.raises(EventIngestionError):
        flatten_event({"": 1})
    with pytest.raises(EventIngestionError):
        flatten_event({"a": {"": 1}})


def test_event_with_nothing_to_model_is_rejected():
    with pytest.raises(EventIngestionError):
        flatten_event({})
    config = TypeConfig(exclude=("*",))
    with pytest.raises(EventIngestionError):
        flatten_event({"a": 1}, config)


def test_empty_containers_contribute_no_fields():
    record = flatten_event({"a": {}, "b": [], "keep": 1})
    assert record.triples == (("keep", "1", "keep"),)


@given(
    st.dictionaries(
        st.text(st.characters(min_codepoint=0x21, max_codepoint=0x7E), min_size=1, max_size=6),
        st.one_of(st.integers(), st.booleans(), st.text(max_size=5), st.none()),
        min_size=1,
        max_size=6,
    )
)
@settings(deadline=None)
def test_flat_documents_round_trip_keys_and_values(doc):
    doc.pop(LABEL_FIELD, None)
    if not doc:
        return
    record = flatten_event(doc)
    assert {k for k, _, _ in record.triples} == set(doc)
    for key, value, _ in record.triples:
        assert value == canonical_scalar(doc[key])


# ---------------------------------------------------------------------------
# EventRecord accessors
# ---------------------------------------------------------------------------

def test_value_at_and_dedup_key():
    record = flatten_event({"op": "Start", "id": "i-1"})
    assert record.value_at("op", "op") == "Start"
    with pytest.raises(KeyError):
        record.value_at("op", "other-type")
    assert record.dedup_key == record.triples
    assert record.values == {"op": "Start", "id": "i-1"}


def test_identical_payloads_share_a_dedup_key_despite_labels():
    a = flatten_event({"op": "Start", LABEL_FIELD: NORMAL})
    b = flatten_event({"op": "Start"})
    assert a.dedup_key == b.dedup_key
    assert a != b  # the label still distinguishes the records themselves


# ---------------------------------------------------------------------------
# Type configuration
# ---------------------------------------------------------------------------

def test_first_matching_glob_wins():
    config = TypeConfig(assignments=(("ids.*", "identifier"), ("ids.special", "special")))
    assert config.type_for("ids.special") == "identifier"


def test_unmatched_keys_fall_back_to_default_then_self():
    config = TypeConfig(assignments=(("a", "A"),), default_type="generic")
    assert config.type_for("zzz") == "generic"
    assert TypeConfig().type_for("zzz") == "zzz"


def test_include_and_exclude_filtering():
    config = TypeConfig(include=("keep.*",), exclude=("keep.secret",))
    assert config.admits("keep.name")
    assert not config.admits("keep.secret")
    assert not config.admits("other")
    unrestricted = TypeConfig(exclude=("drop",))
    assert unrestricted.admits("anything")
    assert not unrestricted.admits("drop")


def test_filtering_applies_during_flattening():
    config = TypeConfig(assignments=(("instanceID", "resource-id"),), exclude=("ts",))
    record = flatten_event({"instanceID": "i-1", "ts": 170, "op": "Get"}, config)
    assert record.signature == (("instanceID", "resource-id"), ("op", "op"))


def test_shorthand_mapping_form():
    config = TypeConfig.from_json_obj({"instanceID": "resource-id", "op": "operation"})
    assert config.assignments == (("instanceID", "resource-id"), ("op", "operation"))
    assert config.default_type is None


def test_full_form_with_list_and_dict_tables():
    by_list = TypeConfig.from_json_obj(
        {"types": [["a", "A"]], "default": "d", "include": ["a*"], "exclude": ["b"]}
    )
    by_dict = TypeConfig.from_json_obj({"types": {"a": "A"}, "default": "d"})
    assert by_list.assignments == by_dict.assignments == (("a", "A"),)
    assert by_list.include == ("a*",) and by_list.exclude == ("b",)
    assert by_list.default_type == "d"


def test_config_json_round_trip():
    config = TypeConfig(
        assignments=(("x*", "X"), ("y", "Y")),
        default_type="rest",
        include=("x*", "y"),
        exclude=("x.hidden",),
    )
    assert TypeConfig.from_json_obj(config.to_json_obj()) == config


def test_config_file_round_trip(tmp_path):
    config = TypeConfig(assignments=(("a", "A"),), default_type="d")
    path = tmp_path / "types.json"
    config.dump(str(path))
    assert TypeConfig.load(str(path)) == config


@pytest.mark.parametrize("obj", [["a"], "a", 5, {"a": 3}])
def test_malformed_config_objects_are_rejected(obj):
    with pytest.raises(EventIngestionError):
        TypeConfig.from_json_obj(obj)


# ---------------------------------------------------------------------------
# Line and file IO
# ---------------------------------------------------------------------------

def test_parse_event_line_reports_bad_json():
    with pytest.raises(EventIngestionError, match="invalid JSON"):
        parse_event_line("{not json")
    record = parse_event_line('{"op": "Start"}')
    assert record.values == {"op": "Start"}


def test_read_events_round_trip_and_blank_lines(tmp_path):
    path = tmp_path / "events.jsonl"
    docs = [{"op": "Start", "id": "i-1"}, {"op": "Stop", "id": "i-2"}]
    write_jsonl(str(path), docs)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("\n   \n")
    records = read_events(str(path))
    assert [r.values["op"] for r in records] == ["Start", "Stop"]
    assert len(list(iter_lines(str(path)))) == 2


def test_read_events_reports_the_failing_line_number(tmp_path):
    path = tmp_path / "events.jsonl"
    path.write_text('{"op": "ok"}\n{"bad\n', encoding="utf-8")
    with pytest.raises(EventIngestionError, match="line 2"):
        read_events(str(path))


def test_reference_corpus_flattens_to_one_signature(reference, reference_records):
    _, _, types = reference
    signatures = {r.signature for r in reference_records}
    assert len(signatures) == 1
    (signature,) = signatures
    id_key = "api.request.data.instanceID"
    assert (id_key, types.type_for(id_key)) in signature
    assert types.type_for(id_key) == "Instance"
