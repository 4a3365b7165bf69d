"""Pub/sub wire contract.

Every message is a WireEnvelope on a topic of the form
aoecr/v1/{session}/{kind}. Sequence numbers increase per (session, topic);
delivery is at-least-once and consumers deduplicate on
(session_id, topic, seq), so redelivery is always harmless. The schemas
are documented field-for-field in docs/wire.md.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum

TOPIC_PREFIX = "aoecr/v1"


class TopicKind(str, Enum):
    REQUEST = "request"      # patient -> agent: {"text": str}
    DECISION = "decision"    # agent -> platform: execute/clarify/refuse payloads
    COMMAND = "command"      # platform -> bed: {"plan": canonical plan object}
    TELEMETRY = "telemetry"  # bed -> all: bed snapshot, 2 Hz
    INTERRUPT = "interrupt"  # any -> bed: {} hot path, never touches the model
    FEEDBACK = "feedback"    # patient -> agent: {"scores": {metric: 1..5}}


def topic_name(session_id: str, kind: TopicKind | str) -> str:
    kind_value = kind.value if isinstance(kind, TopicKind) else kind
    return f"{TOPIC_PREFIX}/{session_id}/{kind_value}"


def topic_contract() -> dict[str, dict]:
    """The fixed topic table: pattern, direction, and payload shape."""
    return {
        TopicKind.REQUEST.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/request",
            "direction": "patient -> agent",
            "payload": {"text": "patient request text"},
        },
        TopicKind.DECISION.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/decision",
            "direction": "agent -> platform",
            "payload": {
                "kind": "execute | clarify | refuse",
                "response": "reply text (execute)",
                "plan": "canonical command object (execute)",
                "question": "clarifying question (clarify)",
                "reason": "refusal reason (refuse)",
                "request_seq": "seq of the request this answers",
            },
        },
        TopicKind.COMMAND.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/command",
            "direction": "platform -> bed",
            "payload": {"plan": "canonical command object"},
        },
        TopicKind.TELEMETRY.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/telemetry",
            "direction": "bed -> all (2 Hz)",
            "payload": {"ts": "bed clock s", "mechanisms": "{name: {pos, moving}}", "active": "step descriptor or null"},
        },
        TopicKind.INTERRUPT.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/interrupt",
            "direction": "any -> bed (hot path)",
            "payload": {},
        },
        TopicKind.FEEDBACK.value: {
            "pattern": f"{TOPIC_PREFIX}/{{session}}/feedback",
            "direction": "patient -> agent",
            "payload": {"scores": "{metric: score 1..5}"},
        },
    }


@dataclass(frozen=True)
class WireEnvelope:
    topic: str
    session_id: str
    seq: int
    ts: int  # milliseconds since epoch
    payload: dict

    @property
    def kind(self) -> str:
        return self.topic.rsplit("/", 1)[-1]

    def dedupe_key(self) -> tuple[str, str, int]:
        return (self.session_id, self.topic, self.seq)

    def to_json(self) -> str:
        return json.dumps(
            {
                "topic": self.topic,
                "session_id": self.session_id,
                "seq": self.seq,
                "ts": self.ts,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "WireEnvelope":
        doc = json.loads(text)
        return cls(
            topic=doc["topic"],
            session_id=doc["session_id"],
            seq=int(doc["seq"]),
            ts=int(doc["ts"]),
            payload=doc["payload"],
        )


class EnvelopeFactory:
    """Stamps envelopes with per-(session, topic) monotone sequence numbers."""

    def __init__(self, session_id: str, clock=None):
        self.session_id = session_id
        self._clock = clock or (lambda: int(time.time() * 1000))
        self._seq: dict[str, int] = {}

    def make(self, kind: TopicKind | str, payload: dict) -> WireEnvelope:
        topic = topic_name(self.session_id, kind)
        seq = self._seq.get(topic, 0) + 1
        self._seq[topic] = seq
        return WireEnvelope(topic=topic, session_id=self.session_id, seq=seq, ts=self._clock(), payload=payload)


@dataclass
class Deduper:
    """At-least-once consumer guard: process each (session, topic, seq) once."""

    seen: set[tuple[str, str, int]] = field(default_factory=set)

    def accept(self, envelope: WireEnvelope) -> bool:
        key = envelope.dedupe_key()
        if key in self.seen:
            return False
        self.seen.add(key)
        return True
