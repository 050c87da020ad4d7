"""Confusion counts and derived scores for labeled detection runs.

Anomalies are the positive class.  Derived scores are computed through
exact rationals so the usual identities hold bit-for-bit, with every
division-by-zero case defined as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .events import ANOMALY, NORMAL


class MetricsError(ValueError):
    """Misaligned or malformed evaluation input."""


@dataclass(frozen=True)
class Metrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def precision_exact(self) -> Fraction:
        denom = self.tp + self.fp
        return Fraction(self.tp, denom) if denom else Fraction(0)

    def recall_exact(self) -> Fraction:
        denom = self.tp + self.fn
        return Fraction(self.tp, denom) if denom else Fraction(0)

    def f1_exact(self) -> Fraction:
        p, r = self.precision_exact(), self.recall_exact()
        return 2 * p * r / (p + r) if p + r else Fraction(0)

    @property
    def precision(self) -> float:
        return float(self.precision_exact())

    @property
    def recall(self) -> float:
        return float(self.recall_exact())

    @property
    def f1(self) -> float:
        return float(self.f1_exact())

    def to_dict(self) -> dict[str, Any]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def evaluate(verdicts: Sequence[str], labels: Sequence[str]) -> Metrics:
    """Score aligned verdict/label streams.

    Verdicts are "normal"/"anomalous" as produced by detection; labels are
    "normal"/"anomaly" ground truth.  The streams must have equal length —
    anything else means the caller paired the wrong files.
    """
    if len(verdicts) != len(labels):
        raise MetricsError(
            f"verdicts and labels must align: {len(verdicts)} vs {len(labels)}"
        )
    tp = fp = fn = tn = 0
    for verdict, label in zip(verdicts, labels):
        if verdict not in ("normal", "anomalous"):
            raise MetricsError(f"unexpected verdict {verdict!r}")
        if label not in (NORMAL, ANOMALY):
            raise MetricsError(f"unexpected label {label!r}")
        predicted_anomaly = verdict == "anomalous"
        is_anomaly = label == ANOMALY
        if predicted_anomaly and is_anomaly:
            tp += 1
        elif predicted_anomaly:
            fp += 1
        elif is_anomaly:
            fn += 1
        else:
            tn += 1
    return Metrics(tp, fp, fn, tn)
