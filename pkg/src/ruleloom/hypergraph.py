"""The rule hypergraph: entities as vertices, events as hyperedges.

Each vertex is a typed key with a pattern-valued entry; each hyperedge ties
together the entities of one (or, after merging, several) training events.
The structure maintains one global invariant — edge uniqueness: no two edges
with the same signature may have pairwise-intersecting values at every key.
That is exactly the property that makes the emitted ruleset unambiguous (at
most one rule can match any event), so every mutation is transactional: a
merge that would break it rolls back without a trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .events import EventRecord, Signature
from .patterns import Pattern, intersects, literal, matches


class GraphError(ValueError):
    """Structural misuse: dead vertices, mismatched types, malformed events."""


@dataclass(frozen=True)
class Vertex:
    key: str
    type: str
    value: Pattern

    @property
    def rendered(self) -> str:
        return self.value.rendered

    @property
    def content_key(self) -> tuple[str, str, str]:
        return (self.key, self.type, self.rendered)


@dataclass(frozen=True)
class Hyperedge:
    vertex_ids: frozenset[int]
    support: int


@lru_cache(maxsize=65536)
def _intersects_cached(p1: Pattern, p2: Pattern) -> bool:
    return intersects(p1, p2)


class RuleHypergraph:
    """Mutable hypergraph with stable, never-reused vertex and edge ids."""

    def __init__(self) -> None:
        self._vertices: dict[int, Vertex] = {}
        self._edges: dict[int, Hyperedge] = {}
        self._incidence: dict[int, set[int]] = {}
        self._by_content: dict[tuple[str, str, str], int] = {}
        self._by_vertex_set: dict[frozenset[int], int] = {}
        self._signatures: dict[int, Signature] = {}
        self._next_vertex = 0
        self._next_edge = 0

    # -- bookkeeping -------------------------------------------------------

    def clone(self) -> "RuleHypergraph":
        other = RuleHypergraph()
        other._vertices = dict(self._vertices)
        other._edges = dict(self._edges)
        other._incidence = {vid: set(eids) for vid, eids in self._incidence.items()}
        other._by_content = dict(self._by_content)
        other._by_vertex_set = dict(self._by_vertex_set)
        other._signatures = dict(self._signatures)
        other._next_vertex = self._next_vertex
        other._next_edge = self._next_edge
        return other

    def _adopt(self, other: "RuleHypergraph") -> None:
        self.__dict__.update(other.__dict__)

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def vertex_ids(self) -> Iterator[int]:
        return iter(self._vertices)

    def edge_ids(self) -> Iterator[int]:
        return iter(self._edges)

    def vertex(self, vid: int) -> Vertex:
        try:
            return self._vertices[vid]
        except KeyError:
            raise GraphError(f"no live vertex {vid}") from None

    def edge(self, eid: int) -> Hyperedge:
        try:
            return self._edges[eid]
        except KeyError:
            raise GraphError(f"no live hyperedge {eid}") from None

    def is_live(self, vid: int) -> bool:
        return vid in self._vertices

    def edge_signature(self, eid: int) -> Signature:
        self.edge(eid)
        return self._signatures[eid]

    def edge_value(self, eid: int, key: str, type_name: str) -> Pattern:
        for vid in self.edge(eid).vertex_ids:
            vertex = self._vertices[vid]
            if vertex.key == key and vertex.type == type_name:
                return vertex.value
        raise GraphError(f"hyperedge {eid} has no ({key}, {type_name}) entry")

    def hyperedge_neighbors(self, vid: int) -> frozenset[int]:
        """Ids of the hyperedges incident to a live vertex."""
        self.vertex(vid)
        return frozenset(self._incidence[vid])

    # -- construction ------------------------------------------------------

    def _intern_vertex(self, key: str, type_name: str, value: Pattern) -> int:
        content = (key, type_name, value.rendered)
        found = self._by_content.get(content)
        if found is not None:
            return found
        vid = self._next_vertex
        self._next_vertex += 1
        self._vertices[vid] = Vertex(key, type_name, value)
        self._incidence[vid] = set()
        self._by_content[content] = vid
        return vid

    def _add_edge(self, vertex_ids: frozenset[int], support: int) -> int:
        existing = self._by_vertex_set.get(vertex_ids)
        if existing is not None:
            old = self._edges[existing]
            self._edges[existing] = Hyperedge(vertex_ids, old.support + support)
            return existing
        eid = self._next_edge
        self._next_edge += 1
        self._edges[eid] = Hyperedge(vertex_ids, support)
        self._by_vertex_set[vertex_ids] = eid
        self._signatures[eid] = tuple(
            sorted((self._vertices[v].key, self._vertices[v].type) for v in vertex_ids)
        )
        for vid in vertex_ids:
            self._incidence[vid].add(eid)
        return eid

    # -- neighborhood queries ----------------------------------------------

    def _rest_values(self, eid: int, skip: tuple[str, str]) -> tuple[tuple[str, str, str], ...]:
        out = []
        for vid in self._edges[eid].vertex_ids:
            vertex = self._vertices[vid]
            if (vertex.key, vertex.type) != skip:
                out.append(vertex.content_key)
        return tuple(sorted(out))

    def negative_examples(self, v1: int, v2: int) -> tuple[Pattern, ...]:
        """Values that a merge of v1 and v2 must not cover.

        These are the values, at v1's key and type, of every edge outside
        the two neighborhoods that agrees with some neighborhood edge on its
        signature and on all remaining keys.  Such an edge describes the
        same context with a different entity, so covering its value would
        let one rule swallow a behaviorally distinct one.
        """
        a, b = self.vertex(v1), self.vertex(v2)
        if (a.key, a.type) != (b.key, b.type):
            raise GraphError("negative examples need vertices of one key and type")
        slot = (a.key, a.type)
        hood = self._incidence[v1] | self._incidence[v2]
        contexts: dict[Signature, set[tuple[tuple[str, str, str], ...]]] = {}
        for eid in hood:
            contexts.setdefault(self._signatures[eid], set()).add(self._rest_values(eid, slot))
        found: dict[str, Pattern] = {}
        for eid in self._edges:
            if eid in hood:
                continue
            sig = self._signatures[eid]
            rests = contexts.get(sig)
            if rests is None or self._rest_values(eid, slot) not in rests:
                continue
            value = self.edge_value(eid, *slot)
            found.setdefault(value.rendered, value)
        return tuple(found[r] for r in sorted(found))

    def aligned_subgraph(self, v1: int, v2: int) -> frozenset[int]:
        """Edges of the two neighborhoods that pair up: same signature and
        equal values on every key other than the merge slot.  This is the
        sub-neighborhood a partial merge is allowed to rewrite."""
        a, b = self.vertex(v1), self.vertex(v2)
        if (a.key, a.type) != (b.key, b.type):
            raise GraphError("alignment needs vertices of one key and type")
        slot = (a.key, a.type)
        by_context: dict[tuple, list[int]] = {}
        for eid in self._incidence[v1]:
            context = (self._signatures[eid], self._rest_values(eid, slot))
            by_context.setdefault(context, []).append(eid)
        aligned: set[int] = set()
        for eid in self._incidence[v2]:
            context = (self._signatures[eid], self._rest_values(eid, slot))
            partners = by_context.get(context)
            if partners:
                aligned.add(eid)
                aligned.update(partners)
        return frozenset(aligned)

    # -- uniqueness ---------------------------------------------------------

    def check_edge_uniqueness(
        self, signatures: Iterable[Signature] | None = None
    ) -> list[tuple[int, int]]:
        """Pairs of same-signature edges whose values intersect at every key.

        An empty result certifies that no event can be matched by two edges.
        """
        wanted = set(signatures) if signatures is not None else None
        buckets: dict[Signature, list[int]] = {}
        for eid, sig in self._signatures.items():
            if eid in self._edges and (wanted is None or sig in wanted):
                buckets.setdefault(sig, []).append(eid)
        violations: list[tuple[int, int]] = []
        for sig, eids in buckets.items():
            eids.sort()
            for i, e1 in enumerate(eids):
                for e2 in eids[i + 1 :]:
                    if all(
                        _intersects_cached(self.edge_value(e1, k, t), self.edge_value(e2, k, t))
                        for k, t in sig
                    ):
                        violations.append((e1, e2))
        return violations

    # -- merging -------------------------------------------------------------

    def _unlink_edge(self, eid: int) -> Hyperedge:
        edge = self._edges.pop(eid)
        del self._by_vertex_set[edge.vertex_ids]
        del self._signatures[eid]
        for vid in edge.vertex_ids:
            self._incidence[vid].discard(eid)
        return edge

    def _drop_if_isolated(self, vid: int) -> None:
        if vid in self._vertices and not self._incidence[vid]:
            vertex = self._vertices.pop(vid)
            del self._incidence[vid]
            del self._by_content[vertex.content_key]

    def _apply_merge(
        self, v1: int, v2: int, merged: Pattern, only_edges: frozenset[int] | None
    ) -> set[Signature]:
        a, b = self.vertex(v1), self.vertex(v2)
        if v1 == v2:
            raise GraphError("cannot merge a vertex with itself")
        if (a.key, a.type) != (b.key, b.type):
            raise GraphError("merged vertices must share key and type")
        targets = self._incidence[v1] | self._incidence[v2]
        if only_edges is not None:
            if not only_edges or not only_edges <= targets:
                raise GraphError("partial merge needs a non-empty sub-neighborhood")
            targets = set(only_edges)
        v3 = self._intern_vertex(a.key, a.type, merged)
        touched: set[Signature] = set()
        for eid in sorted(targets):
            edge = self._unlink_edge(eid)
            new_ids = frozenset((edge.vertex_ids - {v1, v2}) | {v3})
            self._add_edge(new_ids, edge.support)
            touched.add(tuple(sorted(
                (self._vertices[v].key, self._vertices[v].type) for v in new_ids
            )))
        self._drop_if_isolated(v1)
        self._drop_if_isolated(v2)
        return touched

    def merge_vertices_full(self, v1: int, v2: int, merged: Pattern) -> bool:
        """Replace both vertices with one across all their edges.

        Transactional: returns False and leaves the graph untouched when the
        rewrite would create two same-signature edges with overlapping
        values.
        """
        trial = self.clone()
        touched = trial._apply_merge(v1, v2, merged, None)
        if trial.check_edge_uniqueness(touched):
            return False
        self._adopt(trial)
        return True

    def merge_vertices_partial(
        self, v1: int, v2: int, subgraph: frozenset[int], merged: Pattern
    ) -> bool:
        """Replace the two vertices only within the given edges; either input
        vertex survives if it keeps edges elsewhere.  Transactional like the
        full merge."""
        trial = self.clone()
        touched = trial._apply_merge(v1, v2, merged, subgraph)
        if trial.check_edge_uniqueness(touched):
            return False
        self._adopt(trial)
        return True

    # -- event acceptance ----------------------------------------------------

    def edge_matches_event(self, eid: int, event: EventRecord) -> bool:
        if self.edge_signature(eid) != event.signature:
            return False
        values = event.values
        return all(
            matches(self._vertices[vid].value, values[self._vertices[vid].key])
            for vid in self.edge(eid).vertex_ids
        )

    def accepts(self, event: EventRecord) -> bool:
        return any(self.edge_matches_event(eid, event) for eid in self._edges)

    # -- serialization ---------------------------------------------------------

    def to_debug_json(self) -> dict:
        vertices = sorted(
            ({"id": vid, "key": v.key, "type": v.type, "value": v.rendered}
             for vid, v in self._vertices.items()),
            key=lambda entry: entry["id"],
        )
        edges = sorted(
            ({"id": eid, "support": e.support, "vertices": sorted(e.vertex_ids)}
             for eid, e in self._edges.items()),
            key=lambda entry: entry["id"],
        )
        return {"vertices": vertices, "edges": edges}


def build_from_events(events: Iterable[EventRecord]) -> RuleHypergraph:
    """Construct the hypergraph from a training stream.

    Duplicate events coalesce into one edge; support counts distinct events
    only, so repeating an event in the stream changes nothing downstream.
    """
    graph = RuleHypergraph()
    seen: set[tuple[tuple[str, str, str], ...]] = set()
    for event in events:
        if len(event.triples) < 2:
            raise GraphError(
                f"event with a single entity cannot form a hyperedge: {event.triples!r}"
            )
        if len({(k, t) for k, _, t in event.triples}) != len(event.triples):
            raise GraphError(f"event repeats a (key, type) pair: {event.triples!r}")
        if event.dedup_key in seen:
            continue
        seen.add(event.dedup_key)
        vids = frozenset(
            graph._intern_vertex(key, type_name, literal(value))
            for key, value, type_name in event.triples
        )
        graph._add_edge(vids, 1)
    return graph
