"""Tagged-section emission format.

Model emissions carry one or more named sections, each fenced as

    [[tag]]
    ...content...
    [[/tag]]

Anything outside the fences is ignored, which keeps extraction stable when
a model wraps its answer in extra prose. The worked example in the agent
prompt pins this exact fencing.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping

_SECTION_RE = re.compile(r"\[\[([a-z_]+)\]\]\s*(.*?)\s*\[\[/\1\]\]", re.DOTALL)


class ExtractError(ValueError):
    """A mandatory section is missing from the emission."""

    def __init__(self, missing: str):
        self.missing = missing
        super().__init__(f"missing section: {missing}")


def extract_sections(text: str, required: Iterable[str] = ()) -> dict[str, str]:
    """Pull every tagged section out of an emission.

    Duplicate tags keep the first occurrence. Raises ExtractError naming
    the first required tag that is absent.
    """
    found: dict[str, str] = {}
    for match in _SECTION_RE.finditer(text):
        tag, body = match.group(1), match.group(2)
        found.setdefault(tag, body)
    for tag in required:
        if tag not in found:
            raise ExtractError(tag)
    return found


def render_sections(sections: Mapping[str, str]) -> str:
    """Build an emission in the canonical fenced form."""
    parts = [f"[[{tag}]]\n{body}\n[[/{tag}]]" for tag, body in sections.items()]
    return "\n".join(parts)
