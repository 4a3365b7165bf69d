"""Ground-truth oracle backend.

A deterministic stand-in for the live model that answers every stage of the
agent chain from the ground truth carried in a context tag, with seeded
fault injection:

- command emissions are corrupted (one step's action swapped for a random
  different one) with a per-clarity probability;
- correspondence checks detect a wrong command with a configurable
  probability and never flag a correct one;
- revisions re-emit the truth, corrupted at their own (or the same) rate.

Every random draw comes from a stream keyed by (seed, purpose, request id,
prompt digest), so concurrent or reordered calls cannot perturb results and
reruns are bit-identical.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..commands import (
    ALL_ACTIONS,
    CommandPlan,
    CommandStep,
    PlanKind,
    default_label_vocabulary,
    plan_from_label,
    serialize_plan,
)
from . import phrases
from .backends import BackendError, messages_digest
from .prompts import (
    CHECK_INSTRUCTION,
    CLARIFY_INSTRUCTION,
    CLASSIFY_INSTRUCTION,
    ChatMessage,
    DEGRADE_INSTRUCTION,
    GENERATE_INSTRUCTION,
    NURSE_INSTRUCTION,
    OPTIMIZE_INSTRUCTION,
    PATIENT_INSTRUCTION,
    REVISE_INSTRUCTION,
    SCORE_INSTRUCTION,
)
from .sections import extract_sections, render_sections

_TAG_RE = re.compile(r"\[\[ctx ([^\]]*)\]\]")


@dataclass(frozen=True)
class ContextTag:
    """Ground-truth metadata riding along with a request.

    Only mock backends read it; a remote model just sees a short bracketed
    annotation at the end of the request.
    """

    request_id: str
    label: str | None = None
    clarity: str = "high"
    reason: str | None = None


def format_context_tag(
    request_id: str,
    label: str | None = None,
    clarity: str = "high",
    reason: str | None = None,
) -> str:
    parts = [f"id={request_id}"]
    if label is not None:
        parts.append(f"label={label}")
    parts.append(f"clarity={clarity}")
    if reason is not None:
        parts.append(f"reason={reason}")
    return "[[ctx " + " ".join(parts) + "]]"


def parse_context_tag(text: str) -> ContextTag | None:
    """Last context tag in the text, or None."""
    matches = _TAG_RE.findall(text)
    if not matches:
        return None
    fields: dict[str, str] = {}
    for item in matches[-1].split():
        if "=" in item:
            key, value = item.split("=", 1)
            fields[key] = value
    if "id" not in fields:
        return None
    return ContextTag(
        request_id=fields["id"],
        label=fields.get("label"),
        clarity=fields.get("clarity", "high"),
        reason=fields.get("reason"),
    )


_CLASS_BY_KIND = {
    PlanKind.SINGLE: "single_action",
    PlanKind.SEQUENCE: "action_sequence",
    PlanKind.LOOP: "loop_action",
    PlanKind.STOP: "single_action",
}

# Keyword fallback for untagged text (live console use); first match wins.
_LABEL_RULES: tuple[tuple[str, str], ...] = (
    (r"\bleg (exercise|exercises|routine|cycling|movement)\b|\bexercise\b|\bcycle my legs\b", "leg_exercise"),
    (r"\b(lie|lay|lying).{0,24}\bflat\b|\bflat(ten)?\b.{0,24}\bbed\b", "lie_flat"),
    (r"\bsit (me )?up\b|\bbackrest\b.{0,16}\b(up|raise|raised)\b|\braise\b.{0,16}\bbackrest\b", "backrest_extend"),
    (r"\b(lie|lay|lean) (me )?(back|down)\b|\bbackrest\b.{0,16}\b(down|lower)\b|\blower\b.{0,16}\bbackrest\b", "backrest_retract"),
    (r"\bboth( of my)? legs\b.{0,20}\b(up|raise|raised)\b|\braise both\b", "raise_both_legs"),
    (r"\bboth( of my)? legs\b.{0,20}\b(down|lower)\b|\blower both\b", "lower_both_legs"),
    (r"\bleft leg\b.{0,20}\b(up|raise|raised|prop)\b|\b(raise|prop|lift)\b.{0,16}\bleft leg\b", "left_leg_extend"),
    (r"\bleft leg\b.{0,20}\b(down|lower)\b|\blower\b.{0,16}\bleft leg\b", "left_leg_retract"),
    (r"\bright leg\b.{0,20}\b(up|raise|raised|prop)\b|\b(raise|prop|lift)\b.{0,16}\bright leg\b", "right_leg_extend"),
    (r"\bright leg\b.{0,20}\b(down|lower)\b|\blower\b.{0,16}\bright leg\b", "right_leg_retract"),
    (r"\b(bed|it)\b.{0,16}\b(higher|up)\b|\b(raise|lift)\b.{0,16}\bbed\b", "lift_extend"),
    (r"\b(bed|it)\b.{0,16}\b(lower|down)\b|\blower\b.{0,16}\bbed\b", "lift_retract"),
)


def infer_label(text: str) -> str | None:
    """Best-effort action label for untagged free text."""
    lowered = text.lower()
    for pattern, label in _LABEL_RULES:
        if re.search(pattern, lowered):
            return label
    return None


@dataclass
class OracleConfig:
    corruption: float | Mapping[str, float] = 0.0
    detection: float = 1.0
    revision_corruption: float | Mapping[str, float] | None = None
    seed: int = 0
    loop_repetitions: int = 3
    vocabulary: dict[str, CommandPlan] | None = field(default=None, repr=False)

    def corruption_for(self, clarity: str) -> float:
        return _rate_for(self.corruption, clarity)

    def revision_corruption_for(self, clarity: str) -> float:
        if self.revision_corruption is None:
            return self.corruption_for(clarity)
        return _rate_for(self.revision_corruption, clarity)


def _rate_for(rates: float | Mapping[str, float], clarity: str) -> float:
    if isinstance(rates, Mapping):
        return float(rates.get(clarity, 0.0))
    return float(rates)


def corrupted_plan(plan: CommandPlan, rng: random.Random) -> CommandPlan:
    """Swap one step's action for a uniformly random different action."""
    if not plan.steps:
        return plan
    idx = rng.randrange(len(plan.steps))
    victim = plan.steps[idx]
    other_actions = [a for a in ALL_ACTIONS if a != victim.action]
    new_action = other_actions[rng.randrange(len(other_actions))]
    steps = list(plan.steps)
    steps[idx] = CommandStep(new_action, victim.extent, victim.speed_scale)
    return CommandPlan(plan.kind, tuple(steps), plan.repetitions)


class OracleBackend:
    """Answers chain-stage prompts from ground truth with injected faults."""

    def __init__(self, config: OracleConfig | None = None):
        self.config = config or OracleConfig()
        self._vocab = self.config.vocabulary or default_label_vocabulary(
            self.config.loop_repetitions
        )

    # one rng stream per (seed, purpose, request, exact prompt)
    def _rng(self, purpose: str, request_id: str, digest: str) -> random.Random:
        material = f"{self.config.seed}|{purpose}|{request_id}|{digest}".encode("utf-8")
        return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))

    # seeded only by the request id: stable across prompt re-renderings
    def _pick(self, purpose: str, request_id: str, modulus: int = 1 << 16) -> int:
        material = f"{self.config.seed}|{purpose}|{request_id}".encode("utf-8")
        return int.from_bytes(hashlib.sha256(material).digest()[:8], "big") % modulus

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise BackendError("empty message list")
        joined = "\n".join(m.content for m in messages)
        tag = parse_context_tag(joined)
        user_text = messages[-1].content
        digest = messages_digest(messages)

        if PATIENT_INSTRUCTION in user_text:
            return self._patient(self._need_tag(tag))
        if NURSE_INSTRUCTION in user_text:
            return self._nurse(self._need_tag(tag))
        if CLASSIFY_INSTRUCTION in user_text:
            label = self._ground_label(tag, user_text)
            if label is None:
                return render_sections({"classification": "unclear"})
            return self._classify(label)
        if GENERATE_INSTRUCTION in user_text:
            return self._generate(self._grounded(tag, user_text), digest)
        if CHECK_INSTRUCTION in user_text:
            return self._check(self._grounded(tag, user_text), user_text, digest)
        if REVISE_INSTRUCTION in user_text:
            return self._revise(self._grounded(tag, user_text), digest)
        if CLARIFY_INSTRUCTION in user_text:
            pick = self._pick("clarify", tag.request_id if tag else digest)
            return render_sections({"question": phrases.clarify_question(pick)})
        if OPTIMIZE_INSTRUCTION in user_text:
            return self._optimize(user_text)
        if SCORE_INSTRUCTION in user_text:
            return self._score(user_text)
        if DEGRADE_INSTRUCTION in user_text:
            return self._degrade(tag, user_text)
        raise BackendError("oracle cannot tell which stage this prompt belongs to")

    @staticmethod
    def _need_tag(tag: ContextTag | None) -> ContextTag:
        if tag is None or tag.label is None:
            raise BackendError("oracle needs a [[ctx ...]] tag with a label for this stage")
        return tag

    @staticmethod
    def _ground_label(tag: ContextTag | None, user_text: str) -> str | None:
        if tag is not None and tag.label is not None:
            return tag.label
        return infer_label(user_text)

    def _grounded(self, tag: ContextTag | None, user_text: str) -> ContextTag:
        """Tag carrying a usable label, inferring one for untagged text."""
        if tag is not None and tag.label is not None:
            return tag
        label = infer_label(user_text)
        if label is None:
            raise BackendError("oracle cannot ground this request: no tag and no recognizable action")
        if tag is not None:
            request_id = tag.request_id
        else:
            request_id = hashlib.sha256(user_text.encode("utf-8")).hexdigest()[:12]
        clarity = tag.clarity if tag else "high"
        return ContextTag(request_id=request_id, label=label, clarity=clarity)

    def _truth(self, label: str) -> CommandPlan:
        return plan_from_label(label, vocabulary=self._vocab)

    # --- stages ---------------------------------------------------------------

    def _patient(self, tag: ContextTag) -> str:
        pick = self._pick("patient", tag.request_id)
        text = phrases.request_template(tag.label or "", tag.reason or "direct_adjustment", pick)
        return render_sections({"request": text})

    def _nurse(self, tag: ContextTag) -> str:
        pick = self._pick("nurse", tag.request_id)
        return render_sections({"response": phrases.nurse_response(tag.label or "", pick)})

    def _classify(self, label: str) -> str:
        kind = self._truth(label).kind
        return render_sections({"classification": _CLASS_BY_KIND[kind]})

    def _generate(self, tag: ContextTag, digest: str) -> str:
        plan = self._truth(tag.label or "")
        rng = self._rng("generate", tag.request_id, digest)
        if rng.random() < self.config.corruption_for(tag.clarity):
            plan = corrupted_plan(plan, rng)
        pick = self._pick("nurse", tag.request_id)
        return render_sections(
            {
                "command": serialize_plan(plan),
                "response": phrases.nurse_response(tag.label or "", pick),
            }
        )

    def _check(self, tag: ContextTag, user_text: str, digest: str) -> str:
        sections = extract_sections(user_text)
        candidate = sections.get("command", "")
        truth = serialize_plan(self._truth(tag.label or ""))
        if candidate.strip() == truth:
            return render_sections({"verdict": "consistent"})
        rng = self._rng("check", tag.request_id, digest)
        if rng.random() < self.config.detection:
            got = _first_action_difference(candidate, truth)
            return render_sections(
                {"verdict": f"mismatch: command performs {got} which the request does not ask for"}
            )
        return render_sections({"verdict": "consistent"})

    def _revise(self, tag: ContextTag, digest: str) -> str:
        plan = self._truth(tag.label or "")
        rng = self._rng("revise", tag.request_id, digest)
        if rng.random() < self.config.revision_corruption_for(tag.clarity):
            plan = corrupted_plan(plan, rng)
        return render_sections({"command": serialize_plan(plan)})

    def _optimize(self, user_text: str) -> str:
        sections = extract_sections(user_text)
        tentative = sections.get("tentative", "").strip()
        if not tentative:
            raise BackendError("optimize prompt carries no [[tentative]] section")
        emphasized = _emphasized_metrics(user_text)
        if emphasized.get("conciseness") in ("dominant", "raised"):
            out = _first_sentence(tentative)
        else:
            out = tentative
            boosts = [m for m, band in emphasized.items() if m != "conciseness"]
            if not boosts:
                boosts = ["understanding", "empathy", "safety"]
            for metric in boosts:
                phrase = _METRIC_PHRASES.get(metric)
                if phrase and phrase not in out:
                    out = f"{out} {phrase}"
        return render_sections({"response": out})

    def _score(self, user_text: str) -> str:
        sections = extract_sections(user_text)
        response = sections.get("response", "")
        scores = heuristic_scores(response)
        return render_sections({"scores": json.dumps(scores, sort_keys=True)})

    def _degrade(self, tag: ContextTag | None, user_text: str) -> str:
        from ..forge.degrade import apply_degradation

        sections = extract_sections(user_text)
        original = sections.get("request", "").strip()
        if not original:
            raise BackendError("degrade prompt carries no [[request]] section")
        match = re.search(r"severity:\s*(medium|low|unclear)", user_text)
        level = match.group(1) if match else "medium"
        stream_id = tag.request_id if tag else original
        rng = self._rng("degrade", str(stream_id), level)
        return render_sections({"request": apply_degradation(original, level, rng).text})


def _first_action_difference(candidate_json: str, truth_json: str) -> str:
    try:
        cand = json.loads(candidate_json)
        truth = json.loads(truth_json)
        cand_steps = cand.get("steps", [])
        truth_steps = truth.get("steps", [])
        for i, step in enumerate(cand_steps):
            want = truth_steps[i]["action"] if i < len(truth_steps) else None
            if step.get("action") != want:
                return str(step.get("action"))
        return str(cand_steps[0].get("action")) if cand_steps else "nothing"
    except (ValueError, KeyError, AttributeError, TypeError):
        return "an unparseable command"


def _first_sentence(text: str) -> str:
    match = re.search(r"[.!?]", text)
    if match:
        return text[: match.end()]
    return text


_BAND_LINE_RE = re.compile(r"^- ([a-z_]+) \((dominant|raised|neutral|de-emphasized)\)", re.MULTILINE)


def _emphasized_metrics(prompt_text: str) -> dict[str, str]:
    """Metric -> band for every dominant/raised line in the optimize prompt."""
    out: dict[str, str] = {}
    for metric, band in _BAND_LINE_RE.findall(prompt_text):
        if band in ("dominant", "raised"):
            out[metric] = band
    return out


_METRIC_PHRASES: dict[str, str] = {
    "appropriateness": "It's no trouble at all, this is exactly what I'm here for.",
    "clarity": "To be clear, I'm adjusting only the part of the bed you asked about.",
    "empathy": "I understand this position has been uncomfortable for you.",
    "encouragement": "You're doing wonderfully, and this will help you feel better.",
    "explanation": "I'm doing this because it relieves the pressure and helps you rest.",
    "safety": "I'll move it slowly and gently, and I'll stop the moment you say so.",
    "understanding": "I hear you, you'd like the bed to suit you better right now.",
}

_KEYWORDS: dict[str, tuple[str, ...]] = {
    "appropriateness": ("of course", "no trouble", "right away", "here for"),
    "clarity": ("backrest", "leg", "bed", "lower", "rais", "flat", "to be clear"),
    "empathy": ("i understand", "uncomfortable", "i know", "sorry"),
    "encouragement": ("wonderful", "you're doing", "feel better", "well done"),
    "explanation": ("because", "so that", "so you can", "this will"),
    "safety": ("slowly", "gently", "stop", "safe", "careful"),
    "understanding": ("i hear", "you'd like", "you want", "as you asked"),
}


def heuristic_scores(response: str) -> dict[str, int]:
    """Deterministic 1-5 rubric used by the oracle judge.

    Conciseness rewards brevity; every other metric scores 3 plus keyword
    hits. Purely lexical on purpose: feeding in an enriched response must
    move scores the way a (mock) expert panel would.
    """
    lowered = response.lower()
    words = len(response.split())
    if words == 0:
        return {metric: 1 for metric in list(_KEYWORDS) + ["conciseness"]}
    if words <= 14:
        conciseness = 5
    elif words <= 24:
        conciseness = 4
    elif words <= 38:
        conciseness = 3
    elif words <= 55:
        conciseness = 2
    else:
        conciseness = 1
    scores = {"conciseness": conciseness}
    for metric, keys in _KEYWORDS.items():
        hits = sum(1 for k in keys if k in lowered)
        scores[metric] = max(1, min(5, 3 + hits))
    return scores
