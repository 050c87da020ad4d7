"""ruleloom: learn interpretable regex rulesets from structured event
logs, then flag any event no rule accepts.

The pipeline: flatten JSON events into typed (key, value) entities,
build a hypergraph whose vertices are regex-valued entities and whose
edges are whole events, iteratively merge the most similar vertex pairs
into bounded regexes that provably exclude observed counterexamples,
and emit the surviving edges as a ruleset for streaming detection.
"""

from .detection import (
    DetectionResult,
    Rule,
    Ruleset,
    RulesetFormatError,
    dumps_ruleset,
    iter_detection,
    load_ruleset,
    match_event,
    run_detection,
    save_ruleset,
    validate_ruleset,
)
from .estimator import RegexRulesetDetector
from .events import (
    EventIngestionError,
    EventRecord,
    TypeConfig,
    flatten_event,
    parse_event_line,
    read_events,
)
from .hypergraph import GraphError, RuleHypergraph, build_from_events
from .metrics import Metrics, MetricsError, evaluate
from .patterns import (
    CharClass,
    CostVector,
    LiteralUnion,
    Pattern,
    PatternError,
    RepeatClass,
    cost,
    intersects,
    literal,
    parse,
)
from .similarity import (
    DEFAULT_MERGE_THRESHOLD,
    SimParams,
    candidate_pairs,
    hausdorff_distance,
    sim_history,
    sim_matrix,
    sim_score,
)
from .synthesis import MergeOutcome, merge_regex, merge_regex_detailed
from .training import (
    TrainConfig,
    TrainReport,
    TrainingError,
    generalization_check,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CharClass",
    "CostVector",
    "DEFAULT_MERGE_THRESHOLD",
    "DetectionResult",
    "EventIngestionError",
    "EventRecord",
    "GraphError",
    "LiteralUnion",
    "MergeOutcome",
    "Metrics",
    "MetricsError",
    "Pattern",
    "PatternError",
    "RegexRulesetDetector",
    "RepeatClass",
    "Rule",
    "RuleHypergraph",
    "Ruleset",
    "RulesetFormatError",
    "SimParams",
    "TrainConfig",
    "TrainReport",
    "TrainingError",
    "TypeConfig",
    "build_from_events",
    "candidate_pairs",
    "cost",
    "dumps_ruleset",
    "evaluate",
    "flatten_event",
    "generalization_check",
    "hausdorff_distance",
    "intersects",
    "iter_detection",
    "literal",
    "load_ruleset",
    "match_event",
    "merge_regex",
    "merge_regex_detailed",
    "parse",
    "parse_event_line",
    "read_events",
    "run_detection",
    "save_ruleset",
    "sim_history",
    "sim_matrix",
    "sim_score",
    "train",
    "validate_ruleset",
]
