"""The care-agent inference chain.

A patient request flows through: stop-word hot path (no model), request
classification, tentative command + reply generation, a correspondence
check with bounded revision, degree-of-need extent scaling, and capability
validation. Every failure collapses into a safe decision: ask a question
or refuse — never execute an unverified command.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

from .bed import Telemetry
from .commands import (
    BedCapabilities,
    CommandPlan,
    DEFAULT_DEGREE_TABLE,
    DegreeModifier,
    PlanParseError,
    find_degree,
    scale_extents,
    stop,
    validate_plan,
)
from .equalizer import EqualizerWeights
from .gateway.backends import Backend, BackendError
from .gateway.prompts import (
    CHECK_INSTRUCTION,
    CLARIFY_INSTRUCTION,
    CLASSIFY_INSTRUCTION,
    ChatMessage,
    GENERATE_INSTRUCTION,
    PromptBundle,
    REVISE_INSTRUCTION,
    Role,
    default_prompt_bundle,
    render_prompt,
)
from .gateway.sections import ExtractError, extract_sections, render_sections


class RequestClass(str, Enum):
    UNCLEAR = "unclear"
    SINGLE_ACTION = "single_action"
    ACTION_SEQUENCE = "action_sequence"
    LOOP_ACTION = "loop_action"


@dataclass(frozen=True)
class SelfCheckVerdict:
    consistent: bool
    reason: str = ""

    def __post_init__(self) -> None:
        if not self.consistent and not self.reason:
            raise ValueError("a mismatch verdict must carry a reason")


@dataclass(frozen=True)
class Execute:
    plan: CommandPlan
    response: str


@dataclass(frozen=True)
class Clarify:
    question: str


@dataclass(frozen=True)
class Refuse:
    reason: str


AgentDecision = Union[Execute, Clarify, Refuse]


@dataclass
class SessionContext:
    session_id: str
    history: list[ChatMessage] = field(default_factory=list)
    telemetry: Telemetry | None = None
    pending_clarification: str | None = None  # original request awaiting an answer
    weights: EqualizerWeights = field(default_factory=EqualizerWeights.uniform)


@dataclass
class PipelineConfig:
    revision_rounds: int = 2
    stop_words: tuple[str, ...] = ("stop", "halt")
    degree_table: tuple[DegreeModifier, ...] = DEFAULT_DEGREE_TABLE
    caps: BedCapabilities = field(default_factory=BedCapabilities)
    bundle: PromptBundle = field(default_factory=default_prompt_bundle)
    classify_enabled: bool = True
    self_check_enabled: bool = True

    # worst case: classify + 2x generate (one reprompt) + (R+1) checks + R revisions
    @property
    def max_backend_calls(self) -> int:
        return 3 + 2 * self.revision_rounds + 1


STOP_RESPONSE = "Stopping right away."
EXHAUSTED_QUESTION = (
    "I want to be certain I do the right thing. Could you tell me again, plainly, "
    "what you would like me to adjust?"
)

_VALID_CLASSES = {c.value for c in RequestClass}


def matches_stop_word(text: str, stop_words: Sequence[str]) -> bool:
    lowered = text.lower()
    return any(re.search(r"\b" + re.escape(w.lower()) + r"\b", lowered) for w in stop_words)


def apply_request_degree(
    request: str,
    plan: CommandPlan,
    table: Sequence[DegreeModifier] = DEFAULT_DEGREE_TABLE,
) -> CommandPlan:
    """Scale every step's extent by the degree phrase found in the request.

    No phrase leaves the plan untouched; scaling never amplifies, so the
    predicted execution time only shrinks or stays as generated.
    """
    degree = find_degree(request, table)
    if degree is None:
        return plan
    return scale_extents(plan, degree.extent_fraction)


class BackendCallCounter:
    """Wraps a backend so the chain's hard call ceiling can be asserted."""

    def __init__(self, backend: Backend):
        self.backend = backend
        self.calls = 0

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        self.calls += 1
        return self.backend.complete(messages)


class AgentPipeline:
    def __init__(self, backend: Backend, config: PipelineConfig | None = None):
        self.backend = backend
        self.config = config or PipelineConfig()
        self.last_call_count = 0

    # --- individual chain stages -----------------------------------------------

    def classify_request(self, ctx: SessionContext, request: str, backend: Backend | None = None) -> RequestClass:
        """Ask the model for the request class; anything unparseable is
        treated as unclear so the safe branch wins."""
        if not request:
            raise ValueError("request must be non-empty")
        backend = backend or self.backend
        prompt = f"{CLASSIFY_INSTRUCTION}\nPatient request:\n{request}"
        emission = backend.complete(self._messages(ctx, prompt))
        try:
            label = extract_sections(emission, required=("classification",))["classification"]
        except ExtractError:
            return RequestClass.UNCLEAR
        label = label.strip().lower()
        if label not in _VALID_CLASSES:
            return RequestClass.UNCLEAR
        return RequestClass(label)

    def generate_tentative(
        self, ctx: SessionContext, request: str, backend: Backend | None = None
    ) -> tuple[CommandPlan, str]:
        """Tentative command + reply. A malformed emission earns exactly one
        reprompt carrying the parse error; a second failure propagates."""
        backend = backend or self.backend
        prompt = f"{GENERATE_INSTRUCTION}\nPatient request:\n{request}"
        emission = backend.complete(self._messages(ctx, prompt))
        try:
            return self._parse_generation(emission)
        except (PlanParseError, ExtractError) as first_error:
            retry_prompt = (
                f"{GENERATE_INSTRUCTION}\nPatient request:\n{request}\n"
                f"Your previous answer was rejected: {first_error}. "
                "Emit exactly one [[command]] section with schema-valid JSON and one [[response]] section."
            )
            emission = backend.complete(self._messages(ctx, retry_prompt))
            return self._parse_generation(emission)

    @staticmethod
    def _parse_generation(emission: str) -> tuple[CommandPlan, str]:
        from .commands import parse_plan

        sections = extract_sections(emission, required=("command", "response"))
        plan = parse_plan(sections["command"])
        return plan, sections["response"].strip()

    def self_check(
        self,
        ctx: SessionContext,
        request: str,
        plan: CommandPlan,
        round_index: int = 0,
        backend: Backend | None = None,
    ) -> SelfCheckVerdict:
        backend = backend or self.backend
        from .commands import serialize_plan

        prompt = (
            f"{CHECK_INSTRUCTION}\nCheck round {round_index}.\n"
            f"Patient request:\n{request}\n"
            + render_sections({"command": serialize_plan(plan)})
        )
        emission = backend.complete(self._messages(ctx, prompt))
        verdict_text = extract_sections(emission, required=("verdict",))["verdict"].strip()
        lowered = verdict_text.lower()
        if lowered.startswith("consistent"):
            return SelfCheckVerdict(True)
        if lowered.startswith("mismatch"):
            reason = verdict_text.split(":", 1)[1].strip() if ":" in verdict_text else "unspecified mismatch"
            return SelfCheckVerdict(False, reason or "unspecified mismatch")
        # unreadable verdict: treat as a mismatch so the plan cannot slip through
        return SelfCheckVerdict(False, f"unreadable verdict: {verdict_text[:80]}")

    def revise(
        self,
        ctx: SessionContext,
        request: str,
        plan: CommandPlan,
        reason: str,
        round_index: int = 1,
        backend: Backend | None = None,
    ) -> CommandPlan:
        backend = backend or self.backend
        from .commands import parse_plan, serialize_plan

        prompt = (
            f"{REVISE_INSTRUCTION}\nRevision attempt {round_index}.\n"
            f"Patient request:\n{request}\n"
            f"Rejected command:\n"
            + render_sections({"command": serialize_plan(plan)})
            + f"\nProblem: {reason}"
        )
        emission = backend.complete(self._messages(ctx, prompt))
        sections = extract_sections(emission, required=("command",))
        return parse_plan(sections["command"])

    def ask_clarification(self, ctx: SessionContext, request: str, backend: Backend | None = None) -> str:
        backend = backend or self.backend
        prompt = f"{CLARIFY_INSTRUCTION}\nPatient request:\n{request}"
        emission = backend.complete(self._messages(ctx, prompt))
        question = extract_sections(emission, required=("question",))["question"].strip()
        return question or EXHAUSTED_QUESTION

    # --- the full chain -----------------------------------------------------------

    def handle_request(self, ctx: SessionContext, request: str) -> AgentDecision:
        """Run the whole chain; every outcome is execute, clarify, or refuse."""
        if matches_stop_word(request, self.config.stop_words):
            # hot path: halting must not wait on any model round trip
            self.last_call_count = 0
            return Execute(stop(), STOP_RESPONSE)

        if ctx.pending_clarification:
            request = f"{ctx.pending_clarification} {request}"
            ctx.pending_clarification = None

        counter = BackendCallCounter(self.backend)
        try:
            decision = self._run_chain(ctx, request, counter)
        except BackendError as exc:
            decision = Refuse(f"the assistant is unavailable right now ({exc})")
        except (PlanParseError, ExtractError) as exc:
            decision = Refuse(f"could not produce a safe command ({exc})")
        self.last_call_count = counter.calls
        assert counter.calls <= self.config.max_backend_calls, (
            f"chain used {counter.calls} backend calls, ceiling is {self.config.max_backend_calls}"
        )
        if isinstance(decision, Clarify):
            ctx.pending_clarification = request
        return decision

    def _run_chain(self, ctx: SessionContext, request: str, backend: BackendCallCounter) -> AgentDecision:
        if self.config.classify_enabled:
            klass = self.classify_request(ctx, request, backend)
            if klass is RequestClass.UNCLEAR:
                return Clarify(self.ask_clarification(ctx, request, backend))

        plan, response = self.generate_tentative(ctx, request, backend)

        if self.config.self_check_enabled:
            verdict = self.self_check(ctx, request, plan, round_index=0, backend=backend)
            rounds = 0
            while not verdict.consistent:
                if rounds >= self.config.revision_rounds:
                    # revision budget exhausted: fall back to asking the patient
                    return Clarify(EXHAUSTED_QUESTION)
                rounds += 1
                plan = self.revise(ctx, request, plan, verdict.reason, round_index=rounds, backend=backend)
                verdict = self.self_check(ctx, request, plan, round_index=rounds, backend=backend)

        plan = apply_request_degree(request, plan, self.config.degree_table)

        violations = validate_plan(plan, self.config.caps)
        if violations:
            summary = "; ".join(str(v) for v in violations)
            return Refuse(f"the command is outside this bed's capabilities: {summary}")
        return Execute(plan, response)

    # --- helpers ---------------------------------------------------------------------

    def _messages(self, ctx: SessionContext, user_text: str) -> list[ChatMessage]:
        return render_prompt(self.config.bundle, ctx.history, user_text)


def record_exchange(ctx: SessionContext, request: str, decision: AgentDecision) -> None:
    """Append the turn to the session history for later prompts."""
    ctx.history.append(ChatMessage(Role.USER, request))
    if isinstance(decision, Execute):
        ctx.history.append(ChatMessage(Role.ASSISTANT, decision.response))
    elif isinstance(decision, Clarify):
        ctx.history.append(ChatMessage(Role.ASSISTANT, decision.question))
    else:
        ctx.history.append(ChatMessage(Role.ASSISTANT, decision.reason))
