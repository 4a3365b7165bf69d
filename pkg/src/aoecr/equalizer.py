"""Eight-metric service-quality equalizer.

Weights live on the probability simplex and steer how the expert optimizer
emphasizes each quality. Patient feedback moves weight toward whatever
scored poorly: w_m <- w_m * exp(rate * (3 - score_m) / 2), renormalized, so
a score of 3 is exactly neutral, 1 grows the weight, and 5 relaxes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

SIMPLEX_TOLERANCE = 1e-9
DEFAULT_LEARNING_RATE = 0.2


class Metric(str, Enum):
    CONCISENESS = "conciseness"
    APPROPRIATENESS = "appropriateness"
    CLARITY = "clarity"
    EMPATHY = "empathy"
    ENCOURAGEMENT = "encouragement"
    EXPLANATION = "explanation"
    SAFETY = "safety"
    UNDERSTANDING = "understanding"


METRICS: tuple[Metric, ...] = tuple(Metric)
METRIC_NAMES: tuple[str, ...] = tuple(m.value for m in METRICS)
UNIFORM_WEIGHT = 1.0 / len(METRICS)


@dataclass(frozen=True)
class EqualizerWeights:
    """Per-metric weights in fixed metric order; always a valid simplex point."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(METRICS):
            raise ValueError(f"need {len(METRICS)} weights, got {len(self.values)}")
        if any(v < 0.0 for v in self.values):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.values) - 1.0) > SIMPLEX_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {sum(self.values)!r}")

    @classmethod
    def uniform(cls) -> "EqualizerWeights":
        return cls(tuple(UNIFORM_WEIGHT for _ in METRICS))

    @classmethod
    def from_dict(cls, mapping: Mapping[str, float]) -> "EqualizerWeights":
        return cls(tuple(float(mapping[m.value]) for m in METRICS))

    @classmethod
    def normalized(cls, raw: Iterable[float]) -> "EqualizerWeights":
        raw = [max(0.0, float(v)) for v in raw]
        total = sum(raw)
        if total <= 0.0:
            return cls.uniform()
        return cls(tuple(v / total for v in raw))

    def __getitem__(self, metric: Metric) -> float:
        return self.values[METRICS.index(metric)]

    def as_dict(self) -> dict[str, float]:
        return {m.value: v for m, v in zip(METRICS, self.values)}

    def ranked(self) -> list[tuple[Metric, float]]:
        """Metrics by descending weight; ties keep the fixed metric order."""
        return sorted(zip(METRICS, self.values), key=lambda mv: -mv[1])


@dataclass(frozen=True)
class MetricVector:
    """One ballot: a 1-5 score per metric, fixed order."""

    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.scores) != len(METRICS):
            raise ValueError(f"need {len(METRICS)} scores, got {len(self.scores)}")
        if any(not (1.0 <= s <= 5.0) for s in self.scores):
            raise ValueError(f"scores must be in [1, 5], got {self.scores}")

    @classmethod
    def constant(cls, value: float) -> "MetricVector":
        return cls(tuple(float(value) for _ in METRICS))

    @classmethod
    def from_dict(cls, mapping: Mapping[str, float]) -> "MetricVector":
        return cls(tuple(float(mapping[m.value]) for m in METRICS))

    def __getitem__(self, metric: Metric) -> float:
        return self.scores[METRICS.index(metric)]

    def as_dict(self) -> dict[str, float]:
        return {m.value: s for m, s in zip(METRICS, self.scores)}

    def mean(self) -> float:
        return sum(self.scores) / len(self.scores)


def update_equalizer(
    weights: EqualizerWeights,
    feedback: MetricVector,
    rate: float = DEFAULT_LEARNING_RATE,
) -> EqualizerWeights:
    """Multiplicative-exponential reweighting from one feedback ballot.

    Low scores grow the metric's weight (it needs more attention next time),
    high scores shrink it; all-3 feedback is an exact fixed point.
    """
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    scaled = [
        w * math.exp(rate * (3.0 - s) / 2.0) for w, s in zip(weights.values, feedback.scores)
    ]
    total = sum(scaled)
    return EqualizerWeights(tuple(v / total for v in scaled))


def equalizer_presets() -> dict[str, EqualizerWeights]:
    """Named equalizers: balanced, brevity-first, and safety & encouragement."""
    n = len(METRICS)
    conciseness = [0.60 / (n - 1)] * n
    conciseness[METRICS.index(Metric.CONCISENESS)] = 0.40
    safety_enc = [0.50 / (n - 2)] * n
    safety_enc[METRICS.index(Metric.SAFETY)] = 0.25
    safety_enc[METRICS.index(Metric.ENCOURAGEMENT)] = 0.25
    return {
        "default": EqualizerWeights.uniform(),
        "conciseness": EqualizerWeights(tuple(conciseness)),
        "safety_encouragement": EqualizerWeights(tuple(safety_enc)),
    }


# Emphasis bands for prompt rendering, thresholds relative to the uniform weight.
def emphasis_band(weight: float) -> str:
    if weight > 2.0 * UNIFORM_WEIGHT:
        return "dominant"
    if weight > 1.25 * UNIFORM_WEIGHT:
        return "raised"
    if weight >= 0.75 * UNIFORM_WEIGHT:
        return "neutral"
    return "de-emphasized"


_BAND_PHRASES = {
    "dominant": "make this the overriding priority",
    "raised": "give this extra attention",
    "neutral": "keep this in balance",
    "de-emphasized": "do not add material for this",
}


def render_equalizer_lines(weights: EqualizerWeights) -> list[str]:
    """One prompt line per metric, ranked by weight, tagged with its band."""
    return [
        f"- {metric.value} ({emphasis_band(w)}): {_BAND_PHRASES[emphasis_band(w)]}"
        for metric, w in weights.ranked()
    ]
