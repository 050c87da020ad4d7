"""Least-cost pattern merging.

Given two patterns and a set of forbidden patterns, find the cheapest
pattern whose language covers both inputs while staying disjoint from every
forbidden one.  Candidates come from aligning the inputs unit-by-unit
(splitting literals at separator characters first), refining aligned literal
pairs into shared-prefix/variable/shared-suffix runs, and optionally widening
variable parts to character-class repeats; a plain union of both languages
serves as a fallback when they are small.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .patterns import (
    CostVector,
    LiteralUnion,
    Pattern,
    PatternError,
    RegexUnit,
    RepeatClass,
    cost,
    enumerate_words,
    generalize_literals_to_rc,
    intersects,
    least_class,
    merge_rc,
    word_count,
)

SEPARATORS = "-_/.:"
UNION_FALLBACK_LIMIT = 64  # per-input language size admitting the plain-union fallback
CANDIDATE_CAP = 1024


@dataclass(frozen=True)
class ScoredCandidate:
    pattern: Pattern
    cost: CostVector
    valid: bool  # disjoint from every forbidden pattern


@dataclass(frozen=True)
class MergeOutcome:
    result: Pattern | None
    candidates: tuple[ScoredCandidate, ...]


def _chunk_literal(s: str) -> list[str]:
    """Separator-terminated chunks: ``a-b.c`` -> ``['a-', 'b.', 'c']``."""
    chunks: list[str] = []
    buf: list[str] = []
    for ch in s:
        buf.append(ch)
        if ch in SEPARATORS:
            chunks.append("".join(buf))
            buf = []
    if buf:
        chunks.append("".join(buf))
    return chunks


def _split_units(p: Pattern) -> list[RegexUnit]:
    units: list[RegexUnit] = []
    for unit in p.units:
        if isinstance(unit, LiteralUnion) and len(unit.strings) == 1 and not unit.optional:
            units.extend(LiteralUnion((chunk,)) for chunk in _chunk_literal(unit.strings[0]))
        else:
            units.append(unit)
    return units


def split_aligned(r1: Pattern, r2: Pattern) -> list[tuple[RegexUnit, RegexUnit]] | None:
    """Chunk both patterns at separators and pair units positionally.

    Returns None when the chunk counts disagree, in which case no positional
    alignment exists at this granularity.
    """
    u1, u2 = _split_units(r1), _split_units(r2)
    if len(u1) != len(u2):
        return None
    return list(zip(u1, u2))


Segment = tuple[RegexUnit, ...]


def _split_segments(p: Pattern) -> list[Segment]:
    """Separator-delimited segments, each a run of whole units.

    A separator-terminated literal chunk closes the segment it ends; unions,
    class repeats, and unterminated chunks accumulate into the open one.  This
    is coarser than ``_split_units``: two patterns whose unit counts diverge
    (one grew a refined prefix/class/suffix run where the other kept a union)
    still align segment-by-segment.
    """
    segments: list[Segment] = []
    current: list[RegexUnit] = []
    for unit in _split_units(p):
        current.append(unit)
        if (
            isinstance(unit, LiteralUnion)
            and len(unit.strings) == 1
            and not unit.optional
            and unit.strings[0][-1:] in SEPARATORS
        ):
            segments.append(tuple(current))
            current = []
    if current:
        segments.append(tuple(current))
    return segments


def _common_prefix(strings: list[str]) -> str:
    if not strings:
        return ""
    first, last = min(strings), max(strings)
    i = 0
    while i < len(first) and i < len(last) and first[i] == last[i]:
        i += 1
    return first[:i]


def _common_suffix(strings: list[str]) -> str:
    reversed_common = _common_prefix([s[::-1] for s in strings])
    return reversed_common[::-1]


def _units_cost(units: tuple[RegexUnit, ...]) -> float:
    return cost(Pattern(units)).scalar if units else 0.0


def _with_rc_variant(units: tuple[RegexUnit, ...], index: int) -> tuple[RegexUnit, ...] | None:
    unit = units[index]
    if not isinstance(unit, LiteralUnion):
        return None
    try:
        widened = generalize_literals_to_rc(unit)
    except PatternError:
        return None
    return units[:index] + (widened,) + units[index + 1 :]


def _refine_literal_pair(a: LiteralUnion, b: LiteralUnion) -> list[tuple[RegexUnit, ...]]:
    """Decompose two literal unions into shared prefix, variable middle, and
    shared suffix, yielding one variant with the middle as a union and one
    with it widened to a class repeat.

    Optional inputs are never refined: their languages contain the empty
    word, which a mandatory shared prefix or suffix would silently drop.
    """
    if a.optional or b.optional:
        return []
    all_strings = list(a.strings + b.strings)
    prefix = _common_prefix(all_strings)
    trimmed = [s[len(prefix) :] for s in all_strings]
    suffix = _common_suffix(trimmed)
    cut = len(suffix)
    middles = {s[: len(s) - cut] for s in trimmed}

    units: list[RegexUnit] = []
    middle_index = -1
    if prefix:
        units.append(LiteralUnion((prefix,)))
    if middles != {""}:
        middle_index = len(units)
        units.append(LiteralUnion(tuple(middles)))
    if suffix:
        units.append(LiteralUnion((suffix,)))
    if not units:
        return []
    base = tuple(units)
    variants = [base]
    if middle_index >= 0:
        widened = _with_rc_variant(base, middle_index)
        if widened is not None:
            variants.append(widened)
    return variants


def _pair_candidates(a: RegexUnit, b: RegexUnit) -> list[tuple[RegexUnit, ...]]:
    """Candidate unit runs whose language covers both units' languages."""
    out: list[tuple[RegexUnit, ...]] = []
    seen: set[tuple[RegexUnit, ...]] = set()

    def add(units: tuple[RegexUnit, ...] | None) -> None:
        if units and units not in seen:
            seen.add(units)
            out.append(units)

    if a == b:
        add((a,))

    if isinstance(a, LiteralUnion) and isinstance(b, LiteralUnion):
        union = LiteralUnion(a.strings + b.strings, a.optional or b.optional)
        add((union,))
        add(_with_rc_variant((union,), 0))
        if a.strings and b.strings:
            for variant in _refine_literal_pair(a, b):
                add(variant)
    elif isinstance(a, RepeatClass) and isinstance(b, RepeatClass):
        add((merge_rc(a, b),))
    else:
        rc, lu = (a, b) if isinstance(a, RepeatClass) else (b, a)
        assert isinstance(lu, LiteralUnion)
        if lu.strings:
            try:
                add((merge_rc(rc, generalize_literals_to_rc(lu)),))
            except PatternError:
                pass
        else:  # the union is empty-only; the repeat just turns optional
            add((RepeatClass(rc.char_class, rc.min_len, rc.max_len, optional=True),))
    return out


def _covering_rc(segment: Segment) -> RepeatClass | None:
    """Narrowest single class repeat whose language covers the segment's."""
    chars: set[str] = set()
    min_total = 0
    max_total = 0
    for unit in segment:
        if isinstance(unit, LiteralUnion):
            if not unit.strings:
                continue
            for s in unit.strings:
                chars.update(s)
            min_total += 0 if unit.optional else min(len(s) for s in unit.strings)
            max_total += max(len(s) for s in unit.strings)
        else:
            chars.update(unit.char_class.members)
            min_total += 0 if unit.optional else unit.min_len
            max_total += unit.max_len
    if max_total == 0:
        return None
    cls = least_class(chars)
    if cls is None:
        return None
    if min_total == 0:
        return RepeatClass(cls, 1, max_total, optional=True)
    return RepeatClass(cls, min_total, max_total)


def _segment_candidates(seg_a: Segment, seg_b: Segment) -> list[Segment]:
    """Candidate unit runs covering both segments' languages."""
    if len(seg_a) == 1 and len(seg_b) == 1:
        return _pair_candidates(seg_a[0], seg_b[0])
    out: list[Segment] = []
    seen: set[Segment] = set()

    def add(units: Segment | None) -> None:
        if units and units not in seen:
            seen.add(units)
            out.append(units)

    if seg_a == seg_b:
        add(seg_a)
    pa, pb = Pattern(seg_a), Pattern(seg_b)
    if word_count(pa) <= UNION_FALLBACK_LIMIT and word_count(pb) <= UNION_FALLBACK_LIMIT:
        words = set(enumerate_words(pa)) | set(enumerate_words(pb))
        add((LiteralUnion(tuple(words)),))
    rc_a, rc_b = _covering_rc(seg_a), _covering_rc(seg_b)
    if rc_a is not None and rc_b is not None:
        add((merge_rc(rc_a, rc_b),))
    return out


def _assemble(per_pair: list[list[tuple[RegexUnit, ...]]], cap: int) -> list[Pattern]:
    """Best-first cross product of per-pair options, cheapest sums first,
    truncated at ``cap`` assembled patterns."""
    ranked = [sorted(options, key=_units_cost) for options in per_pair]
    costs = [[_units_cost(option) for option in options] for options in ranked]
    start = (0,) * len(ranked)
    heap: list[tuple[float, tuple[int, ...]]] = [
        (sum(c[0] for c in costs), start)
    ]
    visited = {start}
    assembled: list[Pattern] = []
    while heap and len(assembled) < cap:
        total, vector = heapq.heappop(heap)
        units: list[RegexUnit] = []
        for slot, choice in enumerate(vector):
            units.extend(ranked[slot][choice])
        assembled.append(Pattern(tuple(units)))
        for slot in range(len(vector)):
            if vector[slot] + 1 < len(ranked[slot]):
                succ = vector[:slot] + (vector[slot] + 1,) + vector[slot + 1 :]
                if succ not in visited:
                    visited.add(succ)
                    bump = costs[slot][succ[slot]] - costs[slot][vector[slot]]
                    heapq.heappush(heap, (total + bump, succ))
    return assembled


def merge_regex_detailed(
    r1: Pattern, r2: Pattern, negatives: tuple[Pattern, ...] = ()
) -> MergeOutcome:
    """Full merge with the scored candidate list retained.

    The winner is the cheapest candidate disjoint from every negative; when
    the inputs render identically the input itself is the only candidate
    considered (nothing can cover the language more cheaply).
    """
    if r1 == r2:
        valid = all(not intersects(r1, neg) for neg in negatives)
        outcome = ScoredCandidate(r1, cost(r1), valid)
        return MergeOutcome(r1 if valid else None, (outcome,))

    candidates: list[Pattern] = []
    alignments: list[list[tuple[Segment, Segment]]] = []

    def add_alignment(slots: list[tuple[Segment, Segment]]) -> None:
        if slots not in alignments:
            alignments.append(slots)

    u1, u2 = _split_units(r1), _split_units(r2)
    if len(u1) == len(u2):
        add_alignment([((a,), (b,)) for a, b in zip(u1, u2)])
    s1, s2 = _split_segments(r1), _split_segments(r2)
    if len(s1) == len(s2):
        add_alignment(list(zip(s1, s2)))
    if len(r1.units) == len(r2.units):
        add_alignment([((a,), (b,)) for a, b in zip(r1.units, r2.units)])
    for alignment in alignments:
        per_pair = [_segment_candidates(a, b) for a, b in alignment]
        if any(not options for options in per_pair):
            continue
        candidates.extend(_assemble(per_pair, CANDIDATE_CAP))

    if word_count(r1) <= UNION_FALLBACK_LIMIT and word_count(r2) <= UNION_FALLBACK_LIMIT:
        words = set(enumerate_words(r1)) | set(enumerate_words(r2))
        candidates.append(Pattern((LiteralUnion(tuple(words)),)))

    unique: dict[str, Pattern] = {}
    for candidate in candidates:
        unique.setdefault(candidate.rendered, candidate)

    scored = sorted(
        ((cost(p), rendered, p) for rendered, p in unique.items()),
        key=lambda entry: (*entry[0].sort_key(), entry[1]),
    )
    result: Pattern | None = None
    records: list[ScoredCandidate] = []
    for cost_vec, _, candidate in scored:
        valid = all(not intersects(candidate, neg) for neg in negatives)
        records.append(ScoredCandidate(candidate, cost_vec, valid))
        if valid and result is None:
            result = candidate
    return MergeOutcome(result, tuple(records))


def merge_regex(r1: Pattern, r2: Pattern, negatives: tuple[Pattern, ...] = ()) -> Pattern | None:
    """Cheapest pattern covering both inputs and avoiding all negatives,
    or None when every candidate collides with a negative."""
    return merge_regex_detailed(r1, r2, negatives).result
