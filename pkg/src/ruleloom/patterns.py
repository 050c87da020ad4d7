"""Bounded regular expressions over a fixed character-class inventory.

A pattern is a concatenation of units of two kinds: unions of literal
strings, and character-class repeats with finite bounds.  There is no Kleene
star, so every pattern denotes a finite language.  That finiteness is what
makes the operations below cheap and exact: word counting, uniform sampling,
intersection checks, and least-generalization, all of which the synthesizer
and the ruleset validator lean on.

Rendered patterns use a conservative surface syntax that is valid in
mainstream regex dialects, so rulesets on disk can be consumed by other
tooling directly.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Union


class PatternError(ValueError):
    """Malformed pattern construction, or text outside the pattern language."""


# ---------------------------------------------------------------------------
# Character classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharClass:
    """A named set of characters, e.g. ``[0-9]``.

    ``label`` is the bracketed form used in rendered regexes; ``chars`` holds
    the members as a sorted string (sorted so that iteration order never
    depends on hash randomization).
    """

    label: str
    chars: str

    def __post_init__(self) -> None:
        if self.chars != "".join(sorted(set(self.chars))):
            raise PatternError(f"class members must be sorted and unique: {self.label}")

    @cached_property
    def members(self) -> frozenset[str]:
        return frozenset(self.chars)

    @property
    def size(self) -> int:
        return len(self.chars)


def _cc(label: str, chars: str) -> CharClass:
    return CharClass(label, "".join(sorted(set(chars))))


_DIGIT_CHARS = "0123456789"
_LOWER_CHARS = "abcdefghijklmnopqrstuvwxyz"
_UPPER_CHARS = _LOWER_CHARS.upper()
_PRINTABLE_CHARS = "".join(chr(c) for c in range(0x20, 0x7F))

DIGITS = _cc("[0-9]", _DIGIT_CHARS)
LOWER = _cc("[a-z]", _LOWER_CHARS)
UPPER = _cc("[A-Z]", _UPPER_CHARS)
HEX_LOWER = _cc("[a-f0-9]", "abcdef" + _DIGIT_CHARS)
LETTERS = _cc("[A-Za-z]", _LOWER_CHARS + _UPPER_CHARS)
ALNUM = _cc("[A-Za-z0-9]", _LOWER_CHARS + _UPPER_CHARS + _DIGIT_CHARS)
WORDY = _cc("[A-Za-z0-9_-]", _LOWER_CHARS + _UPPER_CHARS + _DIGIT_CHARS + "_-")
TOKEN = _cc("[A-Za-z0-9_.:/-]", _LOWER_CHARS + _UPPER_CHARS + _DIGIT_CHARS + "_.:/-")
PRINTABLE = _cc("[ -~]", _PRINTABLE_CHARS)

# Ordered narrow-to-wide; generalization picks the *first* covering class, so
# the order doubles as the tie-break between incomparable classes (a lone "a"
# generalizes to [a-z], not to the hex class, even though both contain it).
CLASS_INVENTORY: tuple[CharClass, ...] = (
    DIGITS,
    LOWER,
    UPPER,
    HEX_LOWER,
    LETTERS,
    ALNUM,
    WORDY,
    TOKEN,
    PRINTABLE,
)

CLASS_BY_LABEL: dict[str, CharClass] = {c.label: c for c in CLASS_INVENTORY}


def least_class(chars: Iterable[str]) -> CharClass | None:
    """First inventory class containing every given character.

    Returns None when even the widest class (printable ASCII) cannot cover
    the input.
    """
    needed = set(chars)
    for cls in CLASS_INVENTORY:
        if needed <= cls.members:
            return cls
    return None


# ---------------------------------------------------------------------------
# Units and patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiteralUnion:
    """A choice between fixed strings, e.g. ``(?:Attr|Model)``.

    Strings are stored sorted and deduplicated.  The empty string is never a
    member; passing it sets ``optional`` instead, which marks that the unit
    may also match nothing.
    """

    strings: tuple[str, ...]
    optional: bool = False

    def __post_init__(self) -> None:
        if not all(isinstance(s, str) for s in self.strings):
            raise PatternError("literal union members must be strings")
        uniq = sorted(set(self.strings))
        optional = self.optional
        if "" in uniq:
            uniq.remove("")
            optional = True
        if not uniq and not optional:
            raise PatternError("literal union needs at least one string")
        object.__setattr__(self, "strings", tuple(uniq))
        object.__setattr__(self, "optional", optional)


@dataclass(frozen=True)
class RepeatClass:
    """A bounded repeat of a character class, e.g. ``[0-9]{3,5}``.

    Bounds are finite and the minimum is at least one; a unit that may match
    nothing carries ``optional`` instead of a zero minimum.
    """

    char_class: CharClass
    min_len: int
    max_len: int
    optional: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.min_len, int) or not isinstance(self.max_len, int):
            raise PatternError("repeat bounds must be integers")
        if not 1 <= self.min_len <= self.max_len:
            raise PatternError(
                "repeat bounds need 1 <= min <= max; "
                "zero-width repeats are expressed with optional=True"
            )


RegexUnit = Union[LiteralUnion, RepeatClass]


def _join_singleton_literals(units: tuple[RegexUnit, ...]) -> tuple[RegexUnit, ...]:
    out: list[RegexUnit] = []
    for unit in units:
        prev = out[-1] if out else None
        if (
            isinstance(unit, LiteralUnion)
            and isinstance(prev, LiteralUnion)
            and len(unit.strings) == 1
            and len(prev.strings) == 1
            and not unit.optional
            and not prev.optional
        ):
            out[-1] = LiteralUnion((prev.strings[0] + unit.strings[0],))
        else:
            out.append(unit)
    return tuple(out)


@dataclass(frozen=True)
class Pattern:
    """An ordered concatenation of units; immutable after construction.

    Adjacent single-string literal units are joined during construction, so
    structurally different unit lists that spell the same literal text
    compare equal.
    """

    units: tuple[RegexUnit, ...]

    def __post_init__(self) -> None:
        units = tuple(self.units)
        if not units:
            raise PatternError("pattern needs at least one unit")
        for unit in units:
            if not isinstance(unit, (LiteralUnion, RepeatClass)):
                raise PatternError(f"not a pattern unit: {unit!r}")
        object.__setattr__(self, "units", _join_singleton_literals(units))

    @cached_property
    def rendered(self) -> str:
        return render(self)

    def __str__(self) -> str:
        return self.rendered


def literal(s: str) -> Pattern:
    """Pattern matching exactly the one string."""
    return Pattern((LiteralUnion((s,)),))


def single_literal(p: Pattern) -> str | None:
    """The unique string of a one-literal pattern, or None."""
    if len(p.units) == 1:
        unit = p.units[0]
        if isinstance(unit, LiteralUnion) and len(unit.strings) == 1 and not unit.optional:
            return unit.strings[0]
    return None


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def matches(p: Pattern, s: str) -> bool:
    """Anchored membership test: True iff the whole string is in p's language."""
    positions = {0}
    for unit in p.units:
        nxt: set[int] = set()
        for i in positions:
            if unit.optional:
                nxt.add(i)
            if isinstance(unit, LiteralUnion):
                for t in unit.strings:
                    if s.startswith(t, i):
                        nxt.add(i + len(t))
            else:
                members = unit.char_class.members
                j = i
                stop = min(len(s), i + unit.max_len)
                while j < stop and s[j] in members:
                    j += 1
                if j - i >= unit.min_len:
                    nxt.update(range(i + unit.min_len, j + 1))
        if not nxt:
            return False
        positions = nxt
    return len(s) in positions


# ---------------------------------------------------------------------------
# Counting, enumeration, sampling
# ---------------------------------------------------------------------------

def _unit_count(unit: RegexUnit) -> int:
    if isinstance(unit, LiteralUnion):
        n = len(unit.strings)
    else:
        size = unit.char_class.size
        n = sum(size**length for length in range(unit.min_len, unit.max_len + 1))
    return n + 1 if unit.optional else n


def word_count(p: Pattern) -> int:
    """Size of the pattern's language as an exact (big) integer.

    Computed as the product of per-unit choice counts.  Distinct choice
    vectors can only collapse onto one word when adjacent units can trade
    characters (say, two abutting repeats of the same class); the synthesizer
    never emits such patterns, and for them the product is exact.
    """
    total = 1
    for unit in p.units:
        total *= _unit_count(unit)
    return total


def _unit_language(unit: RegexUnit) -> Iterator[str]:
    if unit.optional:
        yield ""
    if isinstance(unit, LiteralUnion):
        yield from unit.strings
    else:
        chars = unit.char_class.chars
        for length in range(unit.min_len, unit.max_len + 1):
            for combo in product(chars, repeat=length):
                yield "".join(combo)


def iter_words(p: Pattern) -> Iterator[str]:
    """Every word of the language, in a deterministic order."""
    pools = [tuple(_unit_language(u)) for u in p.units]
    for combo in product(*pools):
        yield "".join(combo)


def enumerate_words(p: Pattern, limit: int | None = None) -> list[str]:
    """Materialize the language; refuses patterns larger than ``limit`` words."""
    if limit is not None and word_count(p) > limit:
        raise PatternError(f"language exceeds {limit} words")
    return list(iter_words(p))


def derive_seed(seed: int, *parts: str) -> int:
    """Stable sub-seed from a base seed and string context.

    Content-addressed so results never depend on call order.
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(repr(seed).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(part.encode())
    return int.from_bytes(h.digest(), "big")


def _sample_unit(unit: RegexUnit, rng: random.Random) -> str:
    if isinstance(unit, LiteralUnion):
        pool = list(unit.strings)
        if unit.optional:
            pool.append("")
        return rng.choice(pool)
    r = rng.randrange(_unit_count(unit))
    if unit.optional:
        if r == 0:
            return ""
        r -= 1
    size = unit.char_class.size
    chars = unit.char_class.chars
    for length in range(unit.min_len, unit.max_len + 1):
        block = size**length
        if r < block:
            return "".join(rng.choice(chars) for _ in range(length))
        r -= block
    raise AssertionError("unreachable: residual exceeds unit count")


def sample_words(p: Pattern, n: int, seed: int = 0) -> list[str]:
    """Draw n words, each uniform per unit; deterministic for a given seed."""
    if n < 1:
        raise PatternError("need at least one sample")
    rng = random.Random(derive_seed(seed, p.rendered))
    return ["".join(_sample_unit(u, rng) for u in p.units) for _ in range(n)]


# ---------------------------------------------------------------------------
# Intersection
# ---------------------------------------------------------------------------

class _Nfa:
    """Char-set-labelled NFA with epsilon moves; acyclic because the source
    language is finite."""

    __slots__ = ("steps", "eps", "final")

    def __init__(self) -> None:
        self.steps: list[list[tuple[frozenset[str], int]]] = [[]]
        self.eps: list[list[int]] = [[]]
        self.final = 0

    def new_state(self) -> int:
        self.steps.append([])
        self.eps.append([])
        return len(self.steps) - 1


def _compile_nfa(p: Pattern) -> _Nfa:
    nfa = _Nfa()
    cur = 0
    for unit in p.units:
        nxt = nfa.new_state()
        if unit.optional:
            nfa.eps[cur].append(nxt)
        if isinstance(unit, LiteralUnion):
            for text in unit.strings:
                prev = cur
                for ch in text[:-1]:
                    mid = nfa.new_state()
                    nfa.steps[prev].append((frozenset((ch,)), mid))
                    prev = mid
                nfa.steps[prev].append((frozenset((text[-1],)), nxt))
        else:
            members = unit.char_class.members
            prev = cur
            for consumed in range(1, unit.max_len + 1):
                state = nfa.new_state()
                nfa.steps[prev].append((members, state))
                if consumed >= unit.min_len:
                    nfa.eps[state].append(nxt)
                prev = state
        cur = nxt
    nfa.final = cur
    return nfa


def _closures(nfa: _Nfa) -> list[frozenset[int]]:
    closures: list[frozenset[int]] = [frozenset()] * len(nfa.steps)
    done = [False] * len(nfa.steps)

    def visit(state: int) -> frozenset[int]:
        if done[state]:
            return closures[state]
        reach = {state}
        for succ in nfa.eps[state]:
            reach |= visit(succ)
        closures[state] = frozenset(reach)
        done[state] = True
        return closures[state]

    for state in range(len(nfa.steps)):
        visit(state)
    return closures


def intersects(p1: Pattern, p2: Pattern) -> bool:
    """True iff the two languages share at least one word.

    Product construction over the two finite automata; terminates because
    both are acyclic.
    """
    n1, n2 = _compile_nfa(p1), _compile_nfa(p2)
    c1, c2 = _closures(n1), _closures(n2)
    stack = [(a, b) for a in c1[0] for b in c2[0]]
    seen = set(stack)
    while stack:
        a, b = stack.pop()
        if a == n1.final and b == n2.final:
            return True
        for set_a, a2 in n1.steps[a]:
            for set_b, b2 in n2.steps[b]:
                if not set_a.isdisjoint(set_b):
                    for a3 in c1[a2]:
                        for b3 in c2[b2]:
                            pair = (a3, b3)
                            if pair not in seen:
                                seen.add(pair)
                                stack.append(pair)
    return False


# ---------------------------------------------------------------------------
# Generalization
# ---------------------------------------------------------------------------

def generalize_literals_to_rc(unit: LiteralUnion) -> RepeatClass:
    """Widen a literal union to the narrowest covering class repeat.

    The class is the first inventory entry containing every character; the
    bounds span the shortest and longest member.  The result's language is a
    superset of the union's.
    """
    if not unit.strings:
        raise PatternError("cannot generalize a union with no strings")
    chars = set().union(*(set(s) for s in unit.strings))
    cls = least_class(chars)
    if cls is None:
        raise PatternError("characters outside the printable-ASCII inventory")
    lengths = sorted(len(s) for s in unit.strings)
    return RepeatClass(cls, lengths[0], lengths[-1], optional=unit.optional)


def merge_rc(a: RepeatClass, b: RepeatClass) -> RepeatClass:
    """Least inventory class covering both, with hulled bounds."""
    cls = least_class(a.char_class.members | b.char_class.members)
    if cls is None:  # both inputs come from the inventory, so never happens
        raise PatternError("no covering class")
    return RepeatClass(
        cls,
        min(a.min_len, b.min_len),
        max(a.max_len, b.max_len),
        optional=a.optional or b.optional,
    )


# ---------------------------------------------------------------------------
# Rendering and parsing
# ---------------------------------------------------------------------------

_METACHARS = frozenset("\\^$.|?*+()[]{}")


def _escape(s: str) -> str:
    return "".join("\\" + ch if ch in _METACHARS else ch for ch in s)


def render(p: Pattern) -> str:
    """Serialize to the surface syntax; inverse of :func:`parse` on
    normalized patterns."""
    parts: list[str] = []
    for unit in p.units:
        if isinstance(unit, LiteralUnion):
            if not unit.strings:
                parts.append("(?:)?")
            elif len(unit.strings) == 1 and not unit.optional:
                parts.append(_escape(unit.strings[0]))
            else:
                body = "(?:" + "|".join(_escape(s) for s in unit.strings) + ")"
                parts.append(body + "?" if unit.optional else body)
        else:
            if unit.min_len == unit.max_len:
                reps = "{%d}" % unit.min_len
            else:
                reps = "{%d,%d}" % (unit.min_len, unit.max_len)
            core = unit.char_class.label + reps
            # A trailing ? directly after {m,M} would read as a lazy
            # quantifier in mainstream dialects, so optional repeats are
            # wrapped in a group.
            parts.append(f"(?:{core})?" if unit.optional else core)
    return "".join(parts)


def _parse_class(s: str, i: int) -> tuple[RepeatClass, int]:
    end = s.find("]", i)
    if end < 0:
        raise PatternError("unterminated character class")
    label = s[i : end + 1]
    cls = CLASS_BY_LABEL.get(label)
    if cls is None:
        raise PatternError(f"character class not in inventory: {label}")
    i = end + 1
    if i >= len(s) or s[i] != "{":
        raise PatternError("character class requires a {m} or {m,M} bound")
    close = s.find("}", i)
    if close < 0:
        raise PatternError("unterminated repeat bound")
    body = s[i + 1 : close]
    lo, comma, hi = body.partition(",")
    if comma and not hi:
        raise PatternError("unbounded repeats like {m,} are not supported")
    try:
        min_len = int(lo)
        max_len = int(hi) if hi else min_len
    except ValueError as exc:
        raise PatternError(f"malformed repeat bound {{{body}}}") from exc
    return RepeatClass(cls, min_len, max_len), close + 1


def _parse_group(s: str, i: int) -> tuple[RegexUnit, int]:
    if not s.startswith("(?:", i):
        raise PatternError("only non-capturing (?:...) groups are supported")
    i += 3
    n = len(s)
    if i < n and s[i] == "[":
        unit, i = _parse_class(s, i)
        if i >= n or s[i] != ")":
            raise PatternError("class group must close immediately after the bound")
        i += 1
        if i < n and s[i] == "?":
            return RepeatClass(unit.char_class, unit.min_len, unit.max_len, optional=True), i + 1
        return unit, i
    alts: list[str] = []
    buf: list[str] = []
    while True:
        if i >= n:
            raise PatternError("unterminated group")
        ch = s[i]
        if ch == "\\":
            if i + 1 >= n or s[i + 1] not in _METACHARS:
                raise PatternError("unsupported escape in group")
            buf.append(s[i + 1])
            i += 2
        elif ch == "|":
            alts.append("".join(buf))
            buf = []
            i += 1
        elif ch == ")":
            alts.append("".join(buf))
            i += 1
            break
        elif ch in _METACHARS:
            raise PatternError(f"unsupported construct {ch!r} inside group")
        else:
            buf.append(ch)
            i += 1
    optional = i < n and s[i] == "?"
    if optional:
        i += 1
    if alts == [""] and not optional:
        raise PatternError("empty group must be optional: (?:)?")
    return LiteralUnion(tuple(alts), optional), i


def _parse_literal_run(s: str, i: int) -> tuple[str, int]:
    out: list[str] = []
    n = len(s)
    while i < n:
        ch = s[i]
        if ch == "\\":
            if i + 1 >= n or s[i + 1] not in _METACHARS:
                raise PatternError(f"unsupported escape at offset {i}")
            out.append(s[i + 1])
            i += 2
        elif ch in "([":
            break
        elif ch in _METACHARS:
            raise PatternError(f"unsupported construct {ch!r} at offset {i}")
        else:
            out.append(ch)
            i += 1
    return "".join(out), i


def parse(s: str) -> Pattern:
    """Parse the surface syntax back into a Pattern.

    Accepts exactly what :func:`render` can produce (plus harmless spelling
    variants that normalize away); anything wider — wildcards, unbounded
    repeats, capturing groups, backreferences — is rejected.
    """
    if not s:
        raise PatternError("empty pattern text")
    units: list[RegexUnit] = []
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if ch == "(":
            unit, i = _parse_group(s, i)
            units.append(unit)
        elif ch == "[":
            unit, i = _parse_class(s, i)
            if i < n and s[i] == "?":
                raise PatternError("optional repeats must be written (?:[...]{m,M})?")
            units.append(unit)
        else:
            text, i = _parse_literal_run(s, i)
            units.append(LiteralUnion((text,)))
    return Pattern(tuple(units))


# ---------------------------------------------------------------------------
# Cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostVector:
    """Two-part pattern cost: structural size and language size.

    ``node_count`` charges one token per literal string plus one per
    character, one per union bar, two per class repeat (class and bound),
    one per optional marker, and one per concatenation joint.
    ``log_word_count`` is the natural log of the language size, which keeps
    astronomically large repeat languages comparable with small unions.
    Patterns are ranked by the sum of the two, with the smaller language
    preferred on ties.
    """

    node_count: int
    log_word_count: float

    @property
    def scalar(self) -> float:
        return self.node_count + self.log_word_count

    def sort_key(self) -> tuple[float, float]:
        return (self.scalar, self.log_word_count)


def _unit_nodes(unit: RegexUnit) -> int:
    if isinstance(unit, LiteralUnion):
        nodes = sum(1 + len(s) for s in unit.strings) + max(len(unit.strings) - 1, 0)
    else:
        nodes = 2
    return nodes + 1 if unit.optional else nodes


def cost(p: Pattern) -> CostVector:
    nodes = sum(_unit_nodes(u) for u in p.units) + len(p.units) - 1
    return CostVector(nodes, math.log(word_count(p)))
