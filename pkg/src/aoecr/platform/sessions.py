"""Session persistence.

One append-only JSONL event log per session plus a small equalizer-state
file. The log is the source of truth: replaying its feedback events from
uniform weights reconstructs the equalizer exactly, which is what the
crash-recovery path relies on.
"""

from __future__ import annotations

import json
import time
import uuid
from pathlib import Path

from ..equalizer import DEFAULT_LEARNING_RATE, EqualizerWeights, MetricVector, update_equalizer


class UnknownSession(KeyError):
    pass


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _log_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.events.jsonl"

    def _equalizer_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.equalizer.json"

    def create_session(self, session_id: str | None = None) -> str:
        session_id = session_id or uuid.uuid4().hex[:12]
        self._log_path(session_id).touch()
        self.save_equalizer(session_id, EqualizerWeights.uniform(), 0)
        return session_id

    def exists(self, session_id: str) -> bool:
        return self._log_path(session_id).exists()

    def session_ids(self) -> list[str]:
        return sorted(p.name.removesuffix(".events.jsonl") for p in self.root.glob("*.events.jsonl"))

    def append_event(self, session_id: str, event_type: str, payload: dict) -> dict:
        if not self.exists(session_id):
            raise UnknownSession(session_id)
        path = self._log_path(session_id)
        n = sum(1 for _ in path.open(encoding="utf-8"))
        event = {"n": n + 1, "ts": int(time.time() * 1000), "type": event_type, "payload": payload}
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        return event

    def events(self, session_id: str) -> list[dict]:
        if not self.exists(session_id):
            raise UnknownSession(session_id)
        out = []
        with self._log_path(session_id).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    # --- equalizer state ------------------------------------------------------

    def save_equalizer(self, session_id: str, weights: EqualizerWeights, update_count: int) -> None:
        doc = {
            "session_id": session_id,
            "weights": weights.as_dict(),
            "update_count": update_count,
        }
        self._equalizer_path(session_id).write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    def load_equalizer(self, session_id: str) -> tuple[EqualizerWeights, int]:
        path = self._equalizer_path(session_id)
        if not path.exists():
            return EqualizerWeights.uniform(), 0
        doc = json.loads(path.read_text(encoding="utf-8"))
        return EqualizerWeights.from_dict(doc["weights"]), int(doc["update_count"])

    def replay_equalizer(
        self, session_id: str, rate: float = DEFAULT_LEARNING_RATE
    ) -> tuple[EqualizerWeights, int]:
        """Rebuild the equalizer purely from logged feedback events."""
        weights = EqualizerWeights.uniform()
        count = 0
        for event in self.events(session_id):
            if event["type"] == "feedback":
                vector = MetricVector.from_dict(event["payload"]["scores"])
                weights = update_equalizer(weights, vector, rate)
                count += 1
        return weights, count
