"""The training loop: similarity-guided merging to a fixpoint ruleset.

Each round scores all same-key-and-type entity pairs, then walks the pairs
above the merge threshold from the strongest down.  For every pair it
gathers negative examples from the graph, asks the synthesizer for a merged
pattern that avoids them, and applies the merge transactionally — falling
back to a partial merge over the aligned sub-neighborhood when the full
rewrite would break edge uniqueness.  Rounds repeat until one commits
nothing (the fixpoint) or the round budget runs out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Iterable

from .detection import Rule, Ruleset, RULESET_VERSION, match_event
from .events import EventRecord, TypeConfig
from .hypergraph import RuleHypergraph, build_from_events
from .similarity import SimParams, candidate_pairs, sim_matrix
from .synthesis import merge_regex


class TrainingError(ValueError):
    """Unusable training input or configuration."""


@dataclass(frozen=True)
class TrainConfig:
    sim: SimParams = SimParams()
    max_outer_iterations: int = 50
    pair_cap: int = 10_000
    # Types whose entities are never merged.  Operation names are identity
    # bearing by default: generalizing them erases exactly the behavioral
    # distinctions the ruleset exists to capture.
    frozen_types: tuple[str, ...] = ("EventName",)
    # Re-check the global uniqueness invariant after every committed merge.
    verify_invariants: bool = False

    def __post_init__(self) -> None:
        if self.max_outer_iterations < 1:
            raise TrainingError("max_outer_iterations must be positive")
        if self.pair_cap < 1:
            raise TrainingError("pair_cap must be positive")


@dataclass
class TrainReport:
    rounds: int = 0
    attempted: int = 0
    committed_full: int = 0
    committed_partial: int = 0
    aborted_regex: int = 0
    aborted_uniqueness: int = 0
    vertices: int = 0
    edges: int = 0
    wall_time_s: float = 0.0
    fixpoint: bool = False

    @property
    def committed(self) -> int:
        return self.committed_full + self.committed_partial

    @property
    def aborted(self) -> int:
        return self.aborted_regex + self.aborted_uniqueness

    def to_dict(self) -> dict[str, Any]:
        return {
            "rounds": self.rounds,
            "attempted": self.attempted,
            "committed": self.committed,
            "committed_full": self.committed_full,
            "committed_partial": self.committed_partial,
            "aborted_regex": self.aborted_regex,
            "aborted_uniqueness": self.aborted_uniqueness,
            "vertices": self.vertices,
            "edges": self.edges,
            "wall_time_s": self.wall_time_s,
            "fixpoint": self.fixpoint,
        }


def _run_round(graph: RuleHypergraph, config: TrainConfig, report: TrainReport) -> int:
    """One merge round; returns the number of committed merges."""
    sim = sim_matrix(graph, config.sim)
    pairs = candidate_pairs(
        graph, sim, threshold=config.sim.merge_threshold, frozen_types=config.frozen_types
    )[: config.pair_cap]
    committed = 0
    for _, v1, v2 in pairs:
        # Vertices consumed earlier this round keep their stale scores;
        # their successors only compete in the next round.
        if not graph.is_live(v1) or not graph.is_live(v2):
            continue
        report.attempted += 1
        negatives = graph.negative_examples(v1, v2)
        merged = merge_regex(graph.vertex(v1).value, graph.vertex(v2).value, negatives)
        if merged is None:
            report.aborted_regex += 1
            continue
        if graph.merge_vertices_full(v1, v2, merged):
            report.committed_full += 1
            committed += 1
        else:
            subgraph = graph.aligned_subgraph(v1, v2)
            if subgraph and graph.merge_vertices_partial(v1, v2, subgraph, merged):
                report.committed_partial += 1
                committed += 1
            else:
                report.aborted_uniqueness += 1
                continue
        if config.verify_invariants:
            offenders = graph.check_edge_uniqueness()
            if offenders:
                raise AssertionError(f"edge uniqueness violated after commit: {offenders}")
    return committed


def train(
    events: Iterable[EventRecord],
    config: TrainConfig | None = None,
    type_config: TypeConfig | None = None,
) -> tuple[Ruleset, TrainReport]:
    """Learn a ruleset from a training stream.

    The returned report carries round and merge counters plus whether the
    loop reached its fixpoint before the round budget; the ruleset embeds
    ``type_config`` when given, so detection can reuse it.
    """
    config = config or TrainConfig()
    events = list(events)
    if not events:
        raise TrainingError("training needs at least one event")
    started = time.perf_counter()
    graph = build_from_events(events)
    report = TrainReport()
    for _ in range(config.max_outer_iterations):
        report.rounds += 1
        if _run_round(graph, config, report) == 0:
            report.fixpoint = True
            break
    report.vertices = graph.vertex_count
    report.edges = graph.edge_count
    report.wall_time_s = time.perf_counter() - started
    return ruleset_from_graph(graph, type_config), report


def ruleset_from_graph(
    graph: RuleHypergraph, type_config: TypeConfig | None = None
) -> Ruleset:
    """Serialize the graph's edges as rules, canonically ordered.

    Two edges can never agree on both signature and every rendered value
    (they would have coalesced), so the sort below is a strict total order
    and rule ids are reproducible for any event-stream permutation.
    """
    entries = []
    for eid in graph.edge_ids():
        signature = graph.edge_signature(eid)
        patterns = {k: graph.edge_value(eid, k, t) for k, t in signature}
        rendered = tuple(patterns[k].rendered for k, _ in signature)
        entries.append((signature, rendered, graph.edge(eid).support, patterns))
    entries.sort(key=lambda e: (e[0], e[1]))
    width = max(4, len(str(len(entries))))
    rules = tuple(
        Rule(
            rule_id=f"r{index:0{width}d}",
            support=support,
            signature=signature,
            patterns=patterns,
        )
        for index, (signature, _, support, patterns) in enumerate(entries, 1)
    )
    return Ruleset(RULESET_VERSION, rules, type_config)


def generalization_check(ruleset: Ruleset, events: Iterable[EventRecord]) -> list[dict[str, Any]]:
    """Violations of the every-training-event-matches-exactly-once
    postcondition; empty for a sound training run."""
    violations = []
    for index, event in enumerate(events):
        bucket = ruleset.bucket(event.signature)
        count = sum(1 for rule in bucket if rule.matches_values(event.values))
        if count != 1:
            violations.append({"index": index, "matches": count, "values": event.values})
    return violations


def accepted_events(ruleset: Ruleset, events: Iterable[EventRecord]) -> set[int]:
    """Indexes of events the ruleset accepts; handy for monotonicity checks."""
    return {
        index
        for index, event in enumerate(events)
        if match_event(ruleset, event).verdict == "normal"
    }
