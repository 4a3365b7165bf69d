"""Response-quality evaluation under equalizer presets.

For each sampled pair the tentative reply is produced, optimized under one
or more presets, and everything is scored by the judge panel. Comparisons
aggregate, per metric: both means, and what share of items improved,
stayed unchanged, or regressed (the three always sum to 100%).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..equalizer import METRICS, EqualizerWeights
from ..expert import AllBallotsInvalid, optimize_response, score_response
from ..forge.forge import DialoguePair
from ..gateway.backends import Backend
from ..gateway.oracle import format_context_tag
from ..pipeline import AgentPipeline, PipelineConfig, SessionContext

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    baseline_mean: float
    optimized_mean: float
    improved_pct: float
    unchanged_pct: float
    regressed_pct: float
    baseline_scores: tuple[float, ...]
    optimized_scores: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "baseline_mean": self.baseline_mean,
            "optimized_mean": self.optimized_mean,
            "improved_pct": self.improved_pct,
            "unchanged_pct": self.unchanged_pct,
            "regressed_pct": self.regressed_pct,
            "baseline_scores": list(self.baseline_scores),
            "optimized_scores": list(self.optimized_scores),
        }


@dataclass(frozen=True)
class ResponseComparison:
    name: str
    baseline_label: str
    optimized_label: str
    items: int
    metrics: tuple[MetricComparison, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "baseline_label": self.baseline_label,
            "optimized_label": self.optimized_label,
            "items": self.items,
            "metrics": [m.to_dict() for m in self.metrics],
        }

    def to_markdown(self) -> str:
        lines = [
            f"# Response comparison: {self.name}",
            "",
            f"Items scored: {self.items}",
            "",
            f"| metric | {self.baseline_label} mean | {self.optimized_label} mean | improved % | unchanged % | regressed % |",
            "| --- | ---: | ---: | ---: | ---: | ---: |",
        ]
        for m in self.metrics:
            lines.append(
                f"| {m.metric} | {m.baseline_mean:.3f} | {m.optimized_mean:.3f} | "
                f"{m.improved_pct:.1f} | {m.unchanged_pct:.1f} | {m.regressed_pct:.1f} |"
            )
        return "\n".join(lines) + "\n"


def compare_scored(
    name: str,
    baseline_label: str,
    optimized_label: str,
    baseline: Sequence[Sequence[float]],
    optimized: Sequence[Sequence[float]],
) -> ResponseComparison:
    """Aggregate two aligned lists of per-item panel-mean score vectors."""
    if len(baseline) != len(optimized):
        raise ValueError("baseline and optimized score lists must be aligned")
    n = len(baseline)
    metrics = []
    for i, metric in enumerate(METRICS):
        base_scores = tuple(item[i] for item in baseline)
        opt_scores = tuple(item[i] for item in optimized)
        improved = sum(1 for b, o in zip(base_scores, opt_scores) if o > b)
        regressed = sum(1 for b, o in zip(base_scores, opt_scores) if o < b)
        unchanged = n - improved - regressed
        metrics.append(
            MetricComparison(
                metric=metric.value,
                baseline_mean=sum(base_scores) / n if n else 0.0,
                optimized_mean=sum(opt_scores) / n if n else 0.0,
                improved_pct=100.0 * improved / n if n else 0.0,
                unchanged_pct=100.0 * unchanged / n if n else 0.0,
                regressed_pct=100.0 * regressed / n if n else 0.0,
                baseline_scores=base_scores,
                optimized_scores=opt_scores,
            )
        )
    return ResponseComparison(name, baseline_label, optimized_label, n, tuple(metrics))


def evaluate_responses(
    sample: Sequence[DialoguePair],
    presets: Mapping[str, EqualizerWeights],
    panel: Sequence[Backend],
    generation_backend: Backend,
    expert_backend: Backend,
) -> list[ResponseComparison]:
    """Score tentative vs optimized replies for every preset pairing.

    Emits the three standard comparisons when the presets include
    `default`, `conciseness`, and `safety_encouragement`; items whose
    every ballot is invalid are excluded and logged.
    """
    if not panel:
        raise ValueError("panel must be non-empty")
    pipeline = AgentPipeline(generation_backend, PipelineConfig(classify_enabled=False, self_check_enabled=False))

    scored: dict[str, list[tuple[float, ...]]] = {"tentative": []}
    for preset_name in presets:
        scored[preset_name] = []

    for pair in sample:
        tag = format_context_tag(pair.id, label=pair.action_label, clarity=pair.clarity.value)
        request = f"{pair.patient_request} {tag}"
        ctx = SessionContext(session_id=f"resp-{pair.id}")
        try:
            _, tentative = pipeline.generate_tentative(ctx, request)
        except Exception as exc:  # noqa: BLE001 - one bad item must not sink the run
            log.warning("pair %s: tentative generation failed (%s); skipped", pair.id, exc)
            continue
        variants = {"tentative": tentative}
        for preset_name, weights in presets.items():
            variants[preset_name] = optimize_response(tentative, request, weights, expert_backend)
        try:
            item_scores = {
                variant: score_response(text, request, panel).mean.scores
                for variant, text in variants.items()
            }
        except AllBallotsInvalid as exc:
            log.warning("pair %s: %s; item excluded", pair.id, exc)
            continue
        for variant, vec in item_scores.items():
            scored[variant].append(vec)

    comparisons = []
    if "default" in presets:
        comparisons.append(
            compare_scored(
                "tentative_vs_default", "tentative", "default", scored["tentative"], scored["default"]
            )
        )
        for other in ("conciseness", "safety_encouragement"):
            if other in presets:
                comparisons.append(
                    compare_scored(
                        f"default_vs_{other}", "default", other, scored["default"], scored[other]
                    )
                )
    return comparisons
