"""Published docs stay in sync with the code they describe."""

from __future__ import annotations

import json
from pathlib import Path

from aoecr.commands import schema_document
from aoecr.platform.wire import topic_contract

DOCS = Path(__file__).parent.parent / "docs"


def test_command_schema_doc_matches_code():
    published = json.loads((DOCS / "command-schema.json").read_text(encoding="utf-8"))
    assert published == schema_document()


def test_wire_doc_names_every_topic():
    text = (DOCS / "wire.md").read_text(encoding="utf-8")
    for entry in topic_contract().values():
        assert entry["pattern"] in text
