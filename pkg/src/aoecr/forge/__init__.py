"""Patient-nurse dialogue dataset forge: simulated pair generation,
clarity degradation, 4x expansion, statistics, and fine-tune export."""

from .degrade import DegradationResult, apply_degradation, degrade_clarity, token_retention
from .forge import (
    ClarityLevel,
    DialoguePair,
    RejectedPair,
    ScenarioSeed,
    backend_degrader,
    dataset_stats,
    default_seeds,
    expand_dataset,
    export_finetune,
    forge_dataset,
    load_dataset,
    save_dataset,
    simulate_pair,
)

__all__ = [
    "ClarityLevel",
    "DegradationResult",
    "DialoguePair",
    "RejectedPair",
    "ScenarioSeed",
    "apply_degradation",
    "backend_degrader",
    "dataset_stats",
    "default_seeds",
    "degrade_clarity",
    "expand_dataset",
    "export_finetune",
    "forge_dataset",
    "load_dataset",
    "save_dataset",
    "simulate_pair",
    "token_retention",
]
