"""Prompt assembly for the care agent.

The system prompt is built from four parts: who the agent is, what it must
do, the bed manual (which embeds the command schema verbatim), and one
worked example that pins the output format. Stage instructions are shared
constants so the deterministic oracle backend can recognize which step of
the chain it is being asked to perform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..commands import schema_document


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError("message content must be non-empty")

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class PromptBundle:
    role_info: str
    task_description: str
    robot_manual: str
    one_shot_example: str

    def system_text(self) -> str:
        return "\n\n".join(
            (self.role_info, self.task_description, self.robot_manual, self.one_shot_example)
        )


# Stage instructions: the first line of each stage's user turn. Keep these
# stable; the oracle backend dispatches on them and scripted transcripts
# hash the full prompt bytes.
CLASSIFY_INSTRUCTION = (
    "Classify the patient's request as exactly one of: "
    "unclear, single_action, action_sequence, loop_action. "
    "Answer with a [[classification]] section only."
)
GENERATE_INSTRUCTION = (
    "Produce the bed control command for the patient's request, plus a short, "
    "caring reply. Answer with a [[command]] section holding the command JSON "
    "and a [[response]] section holding the reply."
)
CHECK_INSTRUCTION = (
    "Verify that the proposed command faithfully carries out the patient's request. "
    "Answer with a [[verdict]] section containing either 'consistent' or "
    "'mismatch: <what is wrong>'."
)
REVISE_INSTRUCTION = (
    "The proposed command did not match the patient's request. Produce a corrected "
    "command. Answer with a [[command]] section only."
)
CLARIFY_INSTRUCTION = (
    "The patient's request is unclear. Ask one short, gentle question that would "
    "let you identify the adjustment they want. Answer with a [[question]] section only."
)
PATIENT_INSTRUCTION = (
    "You are playing an elderly patient lying on the nursing bed described above. "
    "Given the scenario, voice the request you would make to your nurse, in one or "
    "two natural sentences. Never mention command names or JSON. "
    "Answer with a [[request]] section only."
)
NURSE_INSTRUCTION = (
    "You are playing the nurse at this bed. Give a simple, kind reply confirming "
    "what you will do for the patient's request. Answer with a [[response]] section only."
)
OPTIMIZE_INSTRUCTION = (
    "Rewrite the tentative reply to the patient, keeping its meaning, guided by the "
    "service qualities listed below in priority order. Answer with a [[response]] "
    "section only."
)
SCORE_INSTRUCTION = (
    "Rate the reply below on each listed service quality from 1 (poor) to 5 "
    "(excellent). Answer with a [[scores]] section holding one JSON object that maps "
    "every quality name to its integer score."
)
DEGRADE_INSTRUCTION = (
    "Rewrite the patient request below as an elderly speaker with impaired clarity "
    "would say it: disordered, halting, with sounds repeated, fillers inserted, and "
    "words lost, to the stated severity. Answer with a [[request]] section only."
)


def command_schema_text() -> str:
    return json.dumps(schema_document(), indent=2, sort_keys=True)


_EXAMPLE_COMMAND = (
    '{"kind":"single","steps":[{"action":"backrest_extend","extent":1.0,"speed_scale":1.0}]}'
)

_ONE_SHOT = f"""Worked example.
Patient: "Could you help me sit up? I'd like to read for a while."
You answer:
[[classification]]
single_action
[[/classification]]
[[command]]
{_EXAMPLE_COMMAND}
[[/command]]
[[response]]
Of course. I'm raising your backrest now so you can sit up and read. Say "stop" at any time and I'll stop right away.
[[/response]]"""


def default_prompt_bundle() -> PromptBundle:
    manual = (
        "Bed manual. The bed has four mechanisms: lift, backrest, left_leg, right_leg. "
        "Each moves between its two limit positions, so every command names one of eight "
        "actions: lift_extend, lift_retract, backrest_extend, backrest_retract, "
        "left_leg_extend, left_leg_retract, right_leg_extend, right_leg_retract. "
        "extent is the fraction of full stroke to move; speed_scale slows the motion. "
        "Commands must be a single JSON document matching this schema exactly:\n"
        + command_schema_text()
    )
    return PromptBundle(
        role_info=(
            "You are the care assistant for an elderly patient's adjustable nursing bed. "
            "You are patient, warm, and precise, and safety always comes first."
        ),
        task_description=(
            "Turn the patient's spoken request into a bed control command and a short "
            "reply. If the request cannot be understood, ask for clarification instead "
            "of acting. Format every answer with tagged sections as shown in the example."
        ),
        robot_manual=manual,
        one_shot_example=_ONE_SHOT,
    )


def render_prompt(
    bundle: PromptBundle,
    history: Sequence[ChatMessage],
    request: str,
) -> list[ChatMessage]:
    """Deterministic message list: system prompt, history in order, request last."""
    messages = [ChatMessage(Role.SYSTEM, bundle.system_text())]
    messages.extend(history)
    messages.append(ChatMessage(Role.USER, request))
    return messages
