"""Command-accuracy evaluation with stage ablation.

Three stages, each the previous plus one mechanism:

- prompt_only: raw generation under the baseline fault profile;
- prompt_finetuned_proxy: raw generation under a reduced fault profile
  (training is out of scope here, so its effect is modeled as the oracle
  emitting fewer faults);
- full_with_cos: the reduced profile plus the self-check/revision chain.

Correctness is exact byte match of canonical command serializations. A
clarify decision is correct exactly when the request was genuinely unclear.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from ..commands import serialize_plan
from ..forge.forge import ClarityLevel, DialoguePair
from ..gateway.oracle import OracleBackend, OracleConfig, format_context_tag
from ..pipeline import AgentPipeline, Clarify, Execute, PipelineConfig, Refuse, SessionContext

log = logging.getLogger(__name__)


class AblationStage(str, Enum):
    PROMPT_ONLY = "prompt_only"
    PROMPT_FINETUNED_PROXY = "prompt_finetuned_proxy"
    FULL_WITH_COS = "full_with_cos"


STAGE_ORDER: tuple[AblationStage, ...] = tuple(AblationStage)

# Headline totals reported for the original fine-tuned hardware deployment.
# Our offline mock stack cannot reproduce them; they are printed as shape
# references only and never asserted.
REFERENCE_ACCURACIES: dict[str, float] = {
    "prompt_only_total_pct": 62.41,
    "full_total_pct": 90.18,
    "finetuned_high_clarity_pct": 98.72,
}


@dataclass(frozen=True)
class FaultProfile:
    """Per-clarity corruption rates per stage, plus check behavior."""

    prompt_only: Mapping[str, float] = field(
        default_factory=lambda: {"high": 0.15, "medium": 0.45, "low": 0.65, "unclear": 0.85}
    )
    finetuned: Mapping[str, float] = field(
        default_factory=lambda: {"high": 0.05, "medium": 0.30, "low": 0.50, "unclear": 0.70}
    )
    detection: float = 0.9
    revision_rounds: int = 2

    def corruption_for_stage(self, stage: AblationStage) -> Mapping[str, float]:
        if stage is AblationStage.PROMPT_ONLY:
            return dict(self.prompt_only)
        return dict(self.finetuned)

    def to_dict(self) -> dict:
        return {
            "prompt_only": dict(self.prompt_only),
            "finetuned": dict(self.finetuned),
            "detection": self.detection,
            "revision_rounds": self.revision_rounds,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "FaultProfile":
        return cls(
            prompt_only=dict(doc.get("prompt_only", {})),
            finetuned=dict(doc.get("finetuned", {})),
            detection=float(doc.get("detection", 0.9)),
            revision_rounds=int(doc.get("revision_rounds", 2)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "FaultProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class AccuracyCell:
    correct: int = 0
    total: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {"correct": self.correct, "total": self.total, "accuracy": self.accuracy}


@dataclass
class AccuracyReport:
    stage: AblationStage
    per_clarity: dict[str, AccuracyCell]

    @property
    def total(self) -> AccuracyCell:
        cell = AccuracyCell()
        for sub in self.per_clarity.values():
            cell.correct += sub.correct
            cell.total += sub.total
        return cell

    def recomputed_total_accuracy(self) -> float:
        """Count-weighted mean of per-clarity accuracies; must equal total.accuracy."""
        total_n = sum(c.total for c in self.per_clarity.values())
        if not total_n:
            return 0.0
        return sum(c.accuracy * c.total for c in self.per_clarity.values()) / total_n

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "per_clarity": {
                level.value: self.per_clarity[level.value].to_dict()
                for level in ClarityLevel
                if level.value in self.per_clarity
            },
            "total": self.total.to_dict(),
        }


def _stage_pipeline(stage: AblationStage, profile: FaultProfile, seed: int) -> AgentPipeline:
    backend = OracleBackend(
        OracleConfig(
            corruption=profile.corruption_for_stage(stage),
            detection=profile.detection,
            seed=seed,
        )
    )
    with_cos = stage is AblationStage.FULL_WITH_COS
    config = PipelineConfig(
        revision_rounds=profile.revision_rounds,
        classify_enabled=with_cos,
        self_check_enabled=with_cos,
    )
    return AgentPipeline(backend, config)


def evaluate_commands(
    dataset: Sequence[DialoguePair],
    stage: AblationStage,
    profile: FaultProfile | None = None,
    seed: int = 0,
) -> AccuracyReport:
    """Run every pair through the stage-configured pipeline and score it."""
    profile = profile or FaultProfile()
    pipeline = _stage_pipeline(stage, profile, seed)
    cells: dict[str, AccuracyCell] = {level.value: AccuracyCell() for level in ClarityLevel}

    for pair in dataset:
        tag = format_context_tag(pair.id, label=pair.action_label, clarity=pair.clarity.value)
        ctx = SessionContext(session_id=f"eval-{pair.id}")
        decision = pipeline.handle_request(ctx, f"{pair.patient_request} {tag}")
        if isinstance(decision, Execute):
            correct = serialize_plan(decision.plan) == pair.canonical_command
        elif isinstance(decision, Clarify):
            correct = pair.clarity is ClarityLevel.UNCLEAR
        else:
            assert isinstance(decision, Refuse)
            log.info("pair %s refused: %s", pair.id, decision.reason)
            correct = False
        cell = cells[pair.clarity.value]
        cell.total += 1
        cell.correct += int(correct)

    populated = {level: cell for level, cell in cells.items() if cell.total}
    return AccuracyReport(stage=stage, per_clarity=populated or cells)


@dataclass
class AblationResult:
    reports: list[AccuracyReport]
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "stages": [r.to_dict() for r in self.reports],
            "reference_not_asserted": REFERENCE_ACCURACIES,
        }

    def to_markdown(self) -> str:
        clarity_names = [level.value for level in ClarityLevel]
        lines = [
            "# Command accuracy ablation",
            "",
            f"Seed: {self.seed}",
            "",
            "| stage | " + " | ".join(clarity_names) + " | total |",
            "| --- | " + " | ".join("---:" for _ in clarity_names) + " | ---: |",
        ]
        for report in self.reports:
            cells = [
                _pct(report.per_clarity[name].accuracy) if name in report.per_clarity else "-"
                for name in clarity_names
            ]
            lines.append(
                f"| {report.stage.value} | " + " | ".join(cells) + f" | {_pct(report.total.accuracy)} |"
            )
        lines += [
            "",
            "Reference totals from the original fine-tuned deployment "
            "(different model stack; shown for shape only, never asserted): "
            f"prompt {REFERENCE_ACCURACIES['prompt_only_total_pct']:.2f}%, "
            f"full chain {REFERENCE_ACCURACIES['full_total_pct']:.2f}%, "
            f"high clarity after tuning {REFERENCE_ACCURACIES['finetuned_high_clarity_pct']:.2f}%.",
        ]
        return "\n".join(lines) + "\n"


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def run_ablation(
    dataset: Sequence[DialoguePair],
    profile: FaultProfile | None = None,
    seed: int = 0,
) -> AblationResult:
    """All three stages over the same dataset and seed, in stage order."""
    profile = profile or FaultProfile()
    reports = [evaluate_commands(dataset, stage, profile, seed) for stage in STAGE_ORDER]
    return AblationResult(reports=reports, seed=seed)
