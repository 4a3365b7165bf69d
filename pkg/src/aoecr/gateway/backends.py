"""Chat-completion backends.

Three kinds behind one `complete(messages) -> text` surface:

- remote: OpenAI-compatible chat-completion endpoint over HTTP. Bounded
  retries on transport errors, none on timeout, bearer token from the
  AOECR_LLM_TOKEN environment variable.
- scripted: transcript table keyed by a digest of the exact rendered
  messages. Any unpinned prompt path fails loudly, which is the point.
- oracle: deterministic ground-truth mock with seeded fault injection
  (see oracle.py).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .prompts import ChatMessage

TOKEN_ENV_VAR = "AOECR_LLM_TOKEN"


class BackendError(Exception):
    pass


class BackendTimeout(BackendError):
    pass


class BackendTransport(BackendError):
    pass


class NoTranscriptEntry(BackendError):
    """Scripted backend hit a prompt nobody pinned; a test path is unpinned."""

    def __init__(self, digest: str):
        self.digest = digest
        super().__init__(f"no transcript entry for digest {digest}")


class Backend(Protocol):
    def complete(self, messages: Sequence[ChatMessage]) -> str: ...


def messages_digest(messages: Sequence[ChatMessage]) -> str:
    """Stable digest of the exact prompt bytes; catches any prompt drift."""
    canon = json.dumps([m.to_dict() for m in messages], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class ScriptedBackend:
    """Replays pinned emissions keyed by prompt digest."""

    def __init__(self, transcript: dict[str, str] | None = None):
        self.transcript: dict[str, str] = dict(transcript or {})

    def pin(self, messages: Sequence[ChatMessage], emission: str) -> str:
        digest = messages_digest(messages)
        self.transcript[digest] = emission
        return digest

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        digest = messages_digest(messages)
        try:
            return self.transcript[digest]
        except KeyError:
            raise NoTranscriptEntry(digest) from None

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptedBackend":
        transcript: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                transcript[record["digest"]] = record["emission"]
        return cls(transcript)

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for digest in sorted(self.transcript):
                fh.write(json.dumps({"digest": digest, "emission": self.transcript[digest]}) + "\n")


class RemoteBackend:
    """OpenAI-compatible chat-completion client.

    Transport failures get 2 retries with exponential backoff; a timeout is
    surfaced immediately so the caller's latency stays bounded.
    """

    RETRIES = 2
    BACKOFF_BASE = 0.5  # seconds; doubles per retry

    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout: float = 30.0,
        temperature: float | None = None,
        token_env_var: str = TOKEN_ENV_VAR,
        _sleep=time.sleep,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.temperature = temperature
        self.token_env_var = token_env_var
        self._sleep = _sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env_var)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        body: dict = {
            "model": self.model,
            "messages": [m.to_dict() for m in messages],
        }
        if self.temperature is not None:
            body["temperature"] = self.temperature
        url = f"{self.endpoint}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.RETRIES + 1):
            try:
                response = httpx.post(url, json=body, headers=self._headers(), timeout=self.timeout)
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                raise BackendTimeout(str(exc)) from exc
            except (httpx.TransportError, httpx.HTTPStatusError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.RETRIES:
                    self._sleep(self.BACKOFF_BASE * (2**attempt))
        raise BackendTransport(str(last_error)) from last_error


@dataclass
class BackendConfig:
    """Declarative backend selection, loadable from the config file."""

    kind: str = "oracle"  # remote | scripted | oracle
    # remote
    endpoint: str = ""
    model: str = ""
    timeout: float = 30.0
    temperature: float | None = None
    # scripted
    transcript_path: str = ""
    # oracle
    corruption: float | dict[str, float] = 0.0
    detection: float = 1.0
    revision_corruption: float | dict[str, float] | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, value in (("detection", self.detection),):
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be a probability, got {value}")
        for rates in (self.corruption, self.revision_corruption):
            if rates is None:
                continue
            values = rates.values() if isinstance(rates, dict) else [rates]
            for v in values:
                if not (0.0 <= v <= 1.0):
                    raise ValueError(f"corruption rate must be a probability, got {v}")


def make_backend(cfg: BackendConfig) -> Backend:
    if cfg.kind == "remote":
        if not cfg.endpoint or not cfg.model:
            raise ValueError("remote backend needs endpoint and model")
        return RemoteBackend(cfg.endpoint, cfg.model, cfg.timeout, cfg.temperature)
    if cfg.kind == "scripted":
        if cfg.transcript_path:
            return ScriptedBackend.from_jsonl(cfg.transcript_path)
        return ScriptedBackend()
    if cfg.kind == "oracle":
        from .oracle import OracleBackend, OracleConfig

        return OracleBackend(
            OracleConfig(
                corruption=cfg.corruption,
                detection=cfg.detection,
                revision_corruption=cfg.revision_corruption,
                seed=cfg.seed,
            )
        )
    raise ValueError(f"unknown backend kind: {cfg.kind!r}")
