"""scikit-learn style front door for the train/detect pipeline.

The estimator consumes iterables of JSON-object events (dicts) rather than
numeric arrays, so it deliberately skips ``check_array``-style validation;
parameter handling, cloning, and the fitted-attribute convention follow the
usual estimator contract.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .detection import match_event
from .events import EventRecord, TypeConfig, flatten_event
from .similarity import DEFAULT_MERGE_THRESHOLD, SimParams
from .training import TrainConfig, train


class RegexRulesetDetector(BaseEstimator):
    """Unsupervised anomaly detector over structured JSON events.

    ``fit`` learns a ruleset from an all-normal training stream; ``predict``
    follows the outlier-estimator convention and returns +1 for events some
    rule matches and -1 for everything else.
    """

    def __init__(
        self,
        decay_factor: float = 0.8,
        iterations: int = 4,
        merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
        sample_count: int = 32,
        rng_seed: int = 0,
        max_outer_iterations: int = 50,
        pair_cap: int = 10_000,
        frozen_types: tuple[str, ...] = ("EventName",),
        type_assignments: tuple[tuple[str, str], ...] = (),
        default_type: str | None = None,
    ) -> None:
        self.decay_factor = decay_factor
        self.iterations = iterations
        self.merge_threshold = merge_threshold
        self.sample_count = sample_count
        self.rng_seed = rng_seed
        self.max_outer_iterations = max_outer_iterations
        self.pair_cap = pair_cap
        self.frozen_types = frozen_types
        self.type_assignments = type_assignments
        self.default_type = default_type

    def _type_config(self) -> TypeConfig:
        return TypeConfig(
            assignments=tuple(self.type_assignments),
            default_type=self.default_type,
        )

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            sim=SimParams(
                decay_factor=self.decay_factor,
                iterations=self.iterations,
                merge_threshold=self.merge_threshold,
                sample_count=self.sample_count,
                rng_seed=self.rng_seed,
            ),
            max_outer_iterations=self.max_outer_iterations,
            pair_cap=self.pair_cap,
            frozen_types=tuple(self.frozen_types),
        )

    def _as_records(self, X) -> list[EventRecord]:
        config = self._type_config()
        records = []
        for item in X:
            if isinstance(item, EventRecord):
                records.append(item)
            elif isinstance(item, dict):
                records.append(flatten_event(item, config))
            else:
                raise TypeError(
                    f"expected JSON objects or EventRecords, got {type(item).__name__}"
                )
        return records

    def fit(self, X, y=None) -> "RegexRulesetDetector":
        records = self._as_records(X)
        self.ruleset_, self.report_ = train(
            records, self._train_config(), type_config=self._type_config()
        )
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "ruleset_"):
            raise NotFittedError(
                "this RegexRulesetDetector is not fitted yet; call fit first"
            )
        records = self._as_records(X)
        return np.array(
            [1 if match_event(self.ruleset_, r).verdict == "normal" else -1 for r in records],
            dtype=int,
        )

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).predict(X)
