"""Chat-completion abstraction: prompt templating, tagged-section emissions,
and three interchangeable backends (remote HTTP, scripted transcript, oracle mock)."""

from .backends import (
    Backend,
    BackendConfig,
    BackendError,
    BackendTimeout,
    BackendTransport,
    NoTranscriptEntry,
    RemoteBackend,
    ScriptedBackend,
    make_backend,
    messages_digest,
)
from .oracle import ContextTag, OracleBackend, OracleConfig, format_context_tag, parse_context_tag
from .prompts import ChatMessage, PromptBundle, Role, default_prompt_bundle, render_prompt
from .sections import ExtractError, extract_sections, render_sections

__all__ = [
    "Backend",
    "BackendConfig",
    "BackendError",
    "BackendTimeout",
    "BackendTransport",
    "ChatMessage",
    "ContextTag",
    "ExtractError",
    "NoTranscriptEntry",
    "OracleBackend",
    "OracleConfig",
    "PromptBundle",
    "RemoteBackend",
    "Role",
    "ScriptedBackend",
    "default_prompt_bundle",
    "extract_sections",
    "format_context_tag",
    "make_backend",
    "messages_digest",
    "parse_context_tag",
    "render_prompt",
    "render_sections",
]
