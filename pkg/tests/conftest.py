import random

import pytest

from ruleloom.datagen import reference_dataset
from ruleloom.events import flatten_event
from ruleloom.hypergraph import build_from_events
from ruleloom.patterns import (
    CLASS_INVENTORY,
    LiteralUnion,
    Pattern,
    RepeatClass,
)


@pytest.fixture(scope="session")
def reference():
    """(train documents, labeled test documents, type config) of the
    twelve-event scenario."""
    return reference_dataset()


@pytest.fixture(scope="session")
def reference_records(reference):
    train_docs, _, types = reference
    return [flatten_event(doc, types) for doc in train_docs]


@pytest.fixture()
def reference_graph(reference_records):
    return build_from_events(reference_records)


# ---------------------------------------------------------------------------
# Random pattern generation shared by fuzz tests: abstract descriptions are
# drawn first, then materialized both as package objects and as the oracle's
# plain-tuple form, keeping the two sides independent.
# ---------------------------------------------------------------------------

FUZZ_ALPHABETS = ["0123456789", "abcdef", "ABCDEF", "abc123", "xyz", "XY-9"]


def random_unit_desc(rng: random.Random, allow_optional: bool = True) -> tuple:
    if rng.random() < 0.6:
        count = rng.randint(1, 3)
        alphabet = rng.choice(FUZZ_ALPHABETS)
        strings = {
            "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 4)))
            for _ in range(count)
        }
        optional = allow_optional and rng.random() < 0.15
        return ("lit", sorted(strings), optional)
    cls = rng.choice(CLASS_INVENTORY[:4])  # keep the fuzz languages enumerable
    lo = rng.randint(1, 2)
    hi = lo + rng.randint(0, 1)
    optional = allow_optional and rng.random() < 0.15
    return ("rc", cls.chars, lo, hi, optional)


def _desc_choices(desc: list[tuple]) -> int:
    total = 1
    for unit in desc:
        if unit[0] == "lit":
            _, strings, optional = unit
            n = len(strings)
        else:
            _, chars, lo, hi, optional = unit
            size = len(set(chars))
            n = sum(size**k for k in range(lo, hi + 1))
        total *= n + 1 if optional else n
    return total


def random_pattern_desc(
    rng: random.Random, max_units: int = 3, cap: int = 3000
) -> list[tuple]:
    """Pattern description whose full language stays enumerable (<= cap)."""
    while True:
        desc = [random_unit_desc(rng) for _ in range(rng.randint(1, max_units))]
        if _desc_choices(desc) <= cap:
            return desc


def materialize(desc: list[tuple]) -> Pattern:
    units = []
    for unit in desc:
        if unit[0] == "lit":
            _, strings, optional = unit
            units.append(LiteralUnion(tuple(strings), optional))
        else:
            _, chars, lo, hi, optional = unit
            cls = next(c for c in CLASS_INVENTORY if c.chars == chars)
            units.append(RepeatClass(cls, lo, hi, optional))
    return Pattern(tuple(units))
