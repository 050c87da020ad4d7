"""Independent reference implementations the tests cross-check against.

Everything here is deliberately naive — exhaustive enumeration, full-matrix
dynamic programming, dict-of-dicts matrix iteration — and shares no code
with the package, so a bug there cannot hide inside its own oracle.

Abstract unit descriptions used by the enumeration oracle:
    ("lit", [strings...], optional)
    ("rc", chars, min_len, max_len, optional)
A pattern description is a list of such units; tests materialize the same
description into package objects separately.
"""

from __future__ import annotations

import itertools
import re

UnitDesc = tuple

# ---------------------------------------------------------------------------
# Language enumeration
# ---------------------------------------------------------------------------

def unit_words(unit: UnitDesc) -> set[str]:
    if unit[0] == "lit":
        _, strings, optional = unit
        words = set(strings)
    else:
        _, chars, lo, hi, optional = unit
        alphabet = sorted(set(chars))
        words = {
            "".join(tup)
            for n in range(lo, hi + 1)
            for tup in itertools.product(alphabet, repeat=n)
        }
    if optional:
        words.add("")
    return words


def language(units: list[UnitDesc]) -> set[str]:
    words = {""}
    for unit in units:
        words = {w + u for w in words for u in unit_words(unit)}
    return words


def language_size(units: list[UnitDesc]) -> int:
    return len(language(units))


def desc_matches(units: list[UnitDesc], word: str) -> bool:
    return word in language(units)


def regex_matches(rendered: str, word: str) -> bool:
    """Membership judged by Python's own regex engine."""
    return re.fullmatch(rendered, word) is not None


def languages_intersect(units_a: list[UnitDesc], units_b: list[UnitDesc]) -> bool:
    return not language(units_a).isdisjoint(language(units_b))


def upper_bound_size(units: list[UnitDesc]) -> int:
    """Product of per-unit word counts — cheap upper bound on language size."""
    total = 1
    for unit in units:
        total *= len(unit_words(unit))
    return total


def intersects_via_enumeration(small_desc: list[UnitDesc], other_rendered: str) -> bool:
    """Brute-force intersection: enumerate one side, let Python's regex
    engine judge membership in the other."""
    compiled = re.compile(other_rendered)
    return any(compiled.fullmatch(word) for word in language(small_desc))


# ---------------------------------------------------------------------------
# String distances
# ---------------------------------------------------------------------------

def levenshtein_matrix(a: str, b: str) -> int:
    """Full-matrix Wagner-Fischer."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[m][n]


def normalized_levenshtein(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    return levenshtein_matrix(a, b) / longest if longest else 0.0


def hausdorff_sets(words_a, words_b) -> float:
    def directed(src, dst):
        return max(min(normalized_levenshtein(s, t) for t in dst) for s in src)

    return max(directed(words_a, words_b), directed(words_b, words_a))


# ---------------------------------------------------------------------------
# Similarity iteration (dict arithmetic, no numpy)
# ---------------------------------------------------------------------------

def sim_blocks(
    entities: list,
    events: list,
    incidence: dict,
    entity_label,
    decay: float,
    iterations: int,
    event_label=None,
):
    """Reference block iteration over a star expansion.

    ``incidence`` maps event id -> set of entity ids.  ``entity_label`` is a
    symmetric callable returning the label weight for an entity pair (the
    diagonal is handled here); ``event_label`` likewise for event pairs,
    defaulting to a neutral 1.  Returns (SV, SE) as nested dicts after
    ``iterations`` steps of: identity + decay * label * normalized two-step
    flow, then symmetrization.
    """
    if event_label is None:
        event_label = lambda a, b: 1.0
    deg_v = {v: 0 for v in entities}
    deg_e = {e: len(incidence[e]) for e in events}
    for e in events:
        for v in incidence[e]:
            deg_v[v] += 1
    sv = {a: {b: 1.0 if a == b else 0.0 for b in entities} for a in entities}
    se = {a: {b: 1.0 if a == b else 0.0 for b in events} for a in events}
    for _ in range(iterations):
        raw_v: dict = {}
        for a in entities:
            raw_v[a] = {}
            for b in entities:
                if a == b:
                    raw_v[a][b] = 1.0
                    continue
                flow = sum(
                    se[ea][eb]
                    for ea in events
                    if a in incidence[ea]
                    for eb in events
                    if b in incidence[eb]
                )
                raw_v[a][b] = decay * entity_label(a, b) * flow / (deg_v[a] * deg_v[b])
        raw_e: dict = {}
        for ea in events:
            raw_e[ea] = {}
            for eb in events:
                if ea == eb:
                    raw_e[ea][eb] = 1.0
                    continue
                flow = sum(sv[va][vb] for va in incidence[ea] for vb in incidence[eb])
                raw_e[ea][eb] = decay * event_label(ea, eb) * flow / (deg_e[ea] * deg_e[eb])
        sv = {
            a: {b: (raw_v[a][b] + raw_v[b][a]) / 2.0 for b in entities} for a in entities
        }
        se = {a: {b: (raw_e[a][b] + raw_e[b][a]) / 2.0 for b in events} for a in events}
    return sv, se


# ---------------------------------------------------------------------------
# Negative examples, straight from the definition
# ---------------------------------------------------------------------------

def negative_examples_brute(graph, v1: int, v2: int) -> set[str]:
    """Values (rendered) at the merge slot of every edge that is outside the
    two merge neighborhoods yet differs from some neighborhood edge only at
    that slot."""
    vert = graph.vertex(v1)
    slot = (vert.key, vert.type)
    neighborhood = set(graph.hyperedge_neighbors(v1)) | set(graph.hyperedge_neighbors(v2))

    def profile(eid):
        sig = graph.edge_signature(eid)
        rest = tuple(
            (k, t, graph.edge_value(eid, k, t).rendered)
            for k, t in sig
            if (k, t) != slot
        )
        return sig, rest

    inside = {profile(eid) for eid in neighborhood if slot in graph.edge_signature(eid)}
    found: set[str] = set()
    for eid in graph.edge_ids():
        if eid in neighborhood:
            continue
        sig = graph.edge_signature(eid)
        if slot not in sig:
            continue
        if profile(eid) in inside:
            found.add(graph.edge_value(eid, *slot).rendered)
    return found
