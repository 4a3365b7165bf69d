"""Expert post-processing of tentative replies.

optimize_response rewrites a tentative reply under the current equalizer;
score_response collects 1-5 ballots from a judge panel and averages them.
Both degrade safely: a failed optimization returns the tentative reply
unchanged, and a panel where every ballot is unusable raises loudly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Sequence

from .equalizer import METRIC_NAMES, EqualizerWeights, MetricVector, render_equalizer_lines
from .gateway.backends import Backend, BackendError
from .gateway.prompts import OPTIMIZE_INSTRUCTION, SCORE_INSTRUCTION, ChatMessage, Role
from .gateway.sections import ExtractError, extract_sections, render_sections

log = logging.getLogger(__name__)

_EXPERT_SYSTEM = (
    "You are a senior elderly-care nurse reviewing a bedside assistant's replies. "
    "You rewrite or rate replies; you never change what the bed will do."
)
_JUDGE_SYSTEM = (
    "You are an elderly-care service quality expert rating a bedside assistant's reply."
)


class AllBallotsInvalid(RuntimeError):
    """Every judge on the panel returned an unusable ballot."""


def optimization_prompt(
    tentative: str, request: str, weights: EqualizerWeights
) -> list[ChatMessage]:
    lines = "\n".join(render_equalizer_lines(weights))
    body = (
        f"{OPTIMIZE_INSTRUCTION}\n\n"
        f"Service qualities, highest priority first:\n{lines}\n\n"
        f"Patient request:\n{request}\n\n"
        + render_sections({"tentative": tentative})
    )
    return [ChatMessage(Role.SYSTEM, _EXPERT_SYSTEM), ChatMessage(Role.USER, body)]


def optimize_response(
    tentative: str,
    request: str,
    weights: EqualizerWeights,
    backend: Backend,
) -> str:
    """Rewrite the tentative reply under the equalizer; on any backend or
    format failure, fall back to the tentative reply verbatim."""
    if not tentative:
        raise ValueError("tentative response must be non-empty")
    messages = optimization_prompt(tentative, request, weights)
    try:
        emission = backend.complete(messages)
        optimized = extract_sections(emission, required=("response",))["response"].strip()
    except (BackendError, ExtractError) as exc:
        log.warning("response optimization failed (%s); returning tentative reply", exc)
        return tentative
    return optimized or tentative


def scoring_prompt(response: str, request: str) -> list[ChatMessage]:
    body = (
        f"{SCORE_INSTRUCTION}\n\n"
        f"Qualities: {', '.join(METRIC_NAMES)}\n\n"
        f"Patient request:\n{request}\n\n"
        + render_sections({"response": response})
    )
    return [ChatMessage(Role.SYSTEM, _JUDGE_SYSTEM), ChatMessage(Role.USER, body)]


def _parse_ballot(emission: str) -> MetricVector:
    scores_text = extract_sections(emission, required=("scores",))["scores"]
    raw = json.loads(scores_text)
    if not isinstance(raw, dict):
        raise ValueError("scores section must hold a JSON object")
    missing = [name for name in METRIC_NAMES if name not in raw]
    if missing:
        raise ValueError(f"ballot missing metrics: {missing}")
    return MetricVector.from_dict(raw)  # range-checks 1..5


@dataclass(frozen=True)
class PanelScore:
    ballots: tuple[MetricVector, ...]  # valid ballots only
    mean: MetricVector
    overall: float
    invalid_count: int = 0


def score_response(response: str, request: str, panel: Sequence[Backend]) -> PanelScore:
    """Collect one ballot per panel expert and average them.

    A ballot with missing metrics, out-of-range values, or a malformed
    emission is dropped whole (and logged); the panel mean uses only valid
    ballots. Raises AllBallotsInvalid when nothing survives.
    """
    if not panel:
        raise ValueError("panel must be non-empty")
    messages = scoring_prompt(response, request)
    ballots: list[MetricVector] = []
    invalid = 0
    for i, judge in enumerate(panel):
        try:
            ballots.append(_parse_ballot(judge.complete(messages)))
        except (BackendError, ExtractError, ValueError, json.JSONDecodeError) as exc:
            invalid += 1
            log.warning("panel expert %d ballot dropped: %s", i, exc)
    if not ballots:
        raise AllBallotsInvalid(f"all {len(panel)} ballots invalid")
    mean = MetricVector(
        tuple(sum(b.scores[i] for b in ballots) / len(ballots) for i in range(len(METRIC_NAMES)))
    )
    return PanelScore(tuple(ballots), mean, mean.mean(), invalid)
