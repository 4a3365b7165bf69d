"""Quantitative assessment: command accuracy by clarity with stage ablation,
and response scoring under different equalizer presets."""

from .ablation import (
    AblationResult,
    AblationStage,
    AccuracyCell,
    AccuracyReport,
    FaultProfile,
    evaluate_commands,
    run_ablation,
)
from .report import emit_report
from .responses import MetricComparison, ResponseComparison, evaluate_responses

__all__ = [
    "AblationResult",
    "AblationStage",
    "AccuracyCell",
    "AccuracyReport",
    "FaultProfile",
    "MetricComparison",
    "ResponseComparison",
    "emit_report",
    "evaluate_commands",
    "evaluate_responses",
    "run_ablation",
]
