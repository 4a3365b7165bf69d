"""Dialogue pair generation and dataset assembly.

Two role-prompted backends play patient and nurse to produce high-clarity
request/response pairs, each carrying its ground-truth action label and
canonical command. Expansion then adds one degraded variant per remaining
clarity level, quadrupling the dataset while preserving label, command,
and nurse response verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..commands import ACTION_NAMES, CommandPlan, default_label_vocabulary, plan_from_label, serialize_plan
from ..gateway.backends import Backend
from ..gateway.oracle import format_context_tag
from ..gateway.prompts import (
    ChatMessage,
    DEGRADE_INSTRUCTION,
    GENERATE_INSTRUCTION,
    NURSE_INSTRUCTION,
    PATIENT_INSTRUCTION,
    PromptBundle,
    Role,
    default_prompt_bundle,
)
from ..gateway.sections import extract_sections, render_sections
from ..util import stable_rng
from .degrade import degrade_clarity


class ClarityLevel(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    UNCLEAR = "unclear"


CLARITY_ORDER: tuple[ClarityLevel, ...] = tuple(ClarityLevel)

DEFAULT_REASONS: tuple[str, ...] = (
    "direct_adjustment",
    "physical_discomfort",
    "psychological_sensation",
)

_SIM_ENVIRONMENT = (
    "Simulated care scenario. An elderly patient lies on an adjustable nursing bed "
    "with four mechanisms: lift (bed height), backrest (sitting up or lying back), "
    "left_leg and right_leg rests. A nurse is present and operates the bed."
)


@dataclass(frozen=True)
class ScenarioSeed:
    reason: str
    label: str
    rng_seed: int

    def __post_init__(self) -> None:
        if self.label not in default_label_vocabulary():
            raise ValueError(f"label {self.label!r} is not in the label vocabulary")


@dataclass(frozen=True)
class DialoguePair:
    id: str
    clarity: ClarityLevel
    patient_request: str
    nurse_response: str
    action_label: str
    canonical_command: str
    parent_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "clarity": self.clarity.value,
            "patient_request": self.patient_request,
            "nurse_response": self.nurse_response,
            "action_label": self.action_label,
            "canonical_command": self.canonical_command,
            "parent_id": self.parent_id,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DialoguePair":
        return cls(
            id=doc["id"],
            clarity=ClarityLevel(doc["clarity"]),
            patient_request=doc["patient_request"],
            nurse_response=doc["nurse_response"],
            action_label=doc["action_label"],
            canonical_command=doc["canonical_command"],
            parent_id=doc.get("parent_id"),
        )


class RejectedPair(RuntimeError):
    """The generated patient request failed the sanity gate."""


def default_seeds(count: int, labels: Sequence[str] | None = None) -> list[ScenarioSeed]:
    """Round-robin over labels and reasons; uniform across the eight actions
    unless told otherwise."""
    labels = list(labels) if labels else list(ACTION_NAMES)
    seeds = []
    for i in range(count):
        label = labels[i % len(labels)]
        reason = DEFAULT_REASONS[(i // len(labels)) % len(DEFAULT_REASONS)]
        seeds.append(ScenarioSeed(reason=reason, label=label, rng_seed=i))
    return seeds


def _looks_like_command_leak(text: str) -> bool:
    if "{" in text or "}" in text or "[[" in text:
        return True
    return any(name in text for name in ACTION_NAMES)


def simulate_pair(
    seed: ScenarioSeed,
    patient_backend: Backend,
    nurse_backend: Backend,
    vocabulary: Mapping[str, CommandPlan] | None = None,
) -> DialoguePair:
    """One high-clarity dialogue pair from the two role-played backends."""
    pair_id = f"p{seed.rng_seed:06d}"
    tag = format_context_tag(pair_id, label=seed.label, clarity="high", reason=seed.reason)
    target = serialize_plan(plan_from_label(seed.label, vocabulary=vocabulary))

    patient_prompt = (
        f"{PATIENT_INSTRUCTION}\n"
        f"Scenario: your reason is {seed.reason.replace('_', ' ')}; the adjustment you "
        f"need corresponds to this control command: {target}\n{tag}"
    )
    patient_messages = [
        ChatMessage(Role.SYSTEM, _SIM_ENVIRONMENT),
        ChatMessage(Role.USER, patient_prompt),
    ]
    request = extract_sections(
        patient_backend.complete(patient_messages), required=("request",)
    )["request"].strip()
    if not request or _looks_like_command_leak(request):
        raise RejectedPair(f"{pair_id}: patient emission leaked command syntax or was empty")

    nurse_prompt = f"{NURSE_INSTRUCTION}\nPatient said:\n{request}\n{tag}"
    nurse_messages = [
        ChatMessage(Role.SYSTEM, _SIM_ENVIRONMENT),
        ChatMessage(Role.USER, nurse_prompt),
    ]
    response = extract_sections(
        nurse_backend.complete(nurse_messages), required=("response",)
    )["response"].strip()
    if not response:
        raise RejectedPair(f"{pair_id}: nurse emission was empty")

    return DialoguePair(
        id=pair_id,
        clarity=ClarityLevel.HIGH,
        patient_request=request,
        nurse_response=response,
        action_label=seed.label,
        canonical_command=target,
    )


_LEVEL_SUFFIX = {ClarityLevel.MEDIUM: "med", ClarityLevel.LOW: "low", ClarityLevel.UNCLEAR: "unc"}

# degrader signature: (request_text, level_name, pair_id) -> degraded text
Degrader = "Callable[[str, str, str], str]"


def backend_degrader(backend: Backend):
    """Degrade by prompting a backend instead of the offline rule operators.

    The rule operators stay the default because they are deterministic and
    measurable; this path exists for producing corpora with a live model.
    """

    def degrade(text: str, level: str, pair_id: str) -> str:
        tag = format_context_tag(pair_id, clarity=level)
        prompt = (
            f"{DEGRADE_INSTRUCTION}\nseverity: {level}\n"
            + render_sections({"request": text})
            + f"\n{tag}"
        )
        messages = [ChatMessage(Role.SYSTEM, _SIM_ENVIRONMENT), ChatMessage(Role.USER, prompt)]
        degraded = extract_sections(backend.complete(messages), required=("request",))["request"].strip()
        return degraded or text

    return degrade


def expand_dataset(
    pairs: Sequence[DialoguePair],
    master_seed: int = 0,
    degrader=None,
) -> list[DialoguePair]:
    """Exactly 4x: every high-clarity pair plus one variant per other level.

    Labels, commands, and nurse responses are preserved verbatim; only the
    patient request is degraded, by the rule operators unless a backend
    degrader is supplied.
    """
    out: list[DialoguePair] = []
    for pair in pairs:
        if pair.clarity is not ClarityLevel.HIGH:
            raise ValueError(f"expansion input must be high clarity, got {pair.id}")
        out.append(pair)
        for level in (ClarityLevel.MEDIUM, ClarityLevel.LOW, ClarityLevel.UNCLEAR):
            if degrader is not None:
                degraded = degrader(pair.patient_request, level.value, pair.id)
            else:
                rng = stable_rng(master_seed, pair.id, level.value)
                degraded = degrade_clarity(pair.patient_request, level.value, rng)
            out.append(
                replace(
                    pair,
                    id=f"{pair.id}-{_LEVEL_SUFFIX[level]}",
                    clarity=level,
                    patient_request=degraded,
                    parent_id=pair.id,
                )
            )
    return out


def forge_dataset(
    seed_count: int,
    patient_backend: Backend,
    nurse_backend: Backend,
    master_seed: int = 0,
    labels: Sequence[str] | None = None,
) -> list[DialoguePair]:
    """Full forge run: simulate high-clarity pairs, then expand 4x."""
    seeds = default_seeds(seed_count, labels)
    pairs = [simulate_pair(seed, patient_backend, nurse_backend) for seed in seeds]
    return expand_dataset(pairs, master_seed)


# --- stats ---------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetStats:
    total: int
    by_action: dict[str, int]
    by_clarity: dict[str, int]

    def to_dict(self) -> dict:
        return {"total": self.total, "by_action": self.by_action, "by_clarity": self.by_clarity}

    def to_markdown(self) -> str:
        lines = [
            "# Dataset statistics",
            "",
            f"Total pairs: {self.total}",
            "",
            "| action label | pairs |",
            "| --- | ---: |",
        ]
        lines += [f"| {label} | {n} |" for label, n in sorted(self.by_action.items())]
        lines += ["", "| clarity | pairs |", "| --- | ---: |"]
        lines += [
            f"| {level.value} | {self.by_clarity.get(level.value, 0)} |" for level in CLARITY_ORDER
        ]
        return "\n".join(lines) + "\n"


def dataset_stats(dataset: Sequence[DialoguePair]) -> DatasetStats:
    by_action: dict[str, int] = {}
    by_clarity: dict[str, int] = {}
    for pair in dataset:
        by_action[pair.action_label] = by_action.get(pair.action_label, 0) + 1
        by_clarity[pair.clarity.value] = by_clarity.get(pair.clarity.value, 0) + 1
    return DatasetStats(total=len(dataset), by_action=by_action, by_clarity=by_clarity)


# --- persistence ------------------------------------------------------------------

def save_dataset(dataset: Iterable[DialoguePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in dataset:
            fh.write(json.dumps(pair.to_dict(), sort_keys=True) + "\n")


def load_dataset(path: str | Path) -> list[DialoguePair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(DialoguePair.from_dict(json.loads(line)))
    return pairs


def export_finetune(
    dataset: Sequence[DialoguePair],
    path: str | Path,
    bundle: PromptBundle | None = None,
) -> Path:
    """Instruction-tuning JSONL: rendered prompt in, fenced command+reply out.

    Byte-stable for a fixed dataset so exports can be diffed.
    """
    bundle = bundle or default_prompt_bundle()
    system_text = bundle.system_text()
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in dataset:
            instruction = (
                f"{system_text}\n\n{GENERATE_INSTRUCTION}\nPatient request:\n{pair.patient_request}"
            )
            output = render_sections(
                {"command": pair.canonical_command, "response": pair.nurse_response}
            )
            fh.write(json.dumps({"instruction": instruction, "output": output}, sort_keys=True) + "\n")
    return path
