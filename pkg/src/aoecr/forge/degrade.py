"""Rule-based clarity degradation.

Turns a clear patient request into medium / low / unclear variants with
seeded operators that mimic how speech degrades: stuttered words, filler
noises, dropped content words, and reordered clauses. Unclear additionally
deletes the nouns that name the adjustment target, which is what actually
makes a request unintelligible.

Operator counts per level: medium applies exactly one, low two or three,
unclear three or four plus target-noun deletion. Everything is a pure
function of (text, level, rng state).
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass

# Words whose loss does not hurt intelligibility; never deleted.
_FUNCTION_WORDS = frozenset(
    """a an the i me my you your it its this that these those of for to in on at so
    and or but is are am was were be been being do does did can could would should
    will shall may might must please again now here there some any much very really
    just too also more most up down out with from than then as if when while""".split()
)

_FILLERS = ("um,", "uh,", "erm,", "you know,", "I mean,", "that thing,", "whatsit,")

# Nouns that identify what should move; deleting them is what makes a
# request genuinely unclear.
_TARGET_NOUNS = frozenset(
    """bed backrest back leg legs knee knees ankle ankles foot feet head lift
    height rest leg-rest body hip hips shoulder shoulders neck chest calf""".split()
)


@dataclass(frozen=True)
class DegradationResult:
    text: str
    operators: tuple[str, ...]


def _words(text: str) -> list[str]:
    return text.split()


def _content_indices(words: list[str]) -> list[int]:
    return [
        i
        for i, w in enumerate(words)
        if _normalize_token(w) not in _FUNCTION_WORDS and len(_normalize_token(w)) > 2
    ]


def _normalize_token(word: str) -> str:
    return re.sub(r"[^a-z0-9-]", "", word.lower())


def op_stutter(text: str, rng: random.Random, strength: int = 1) -> str:
    """Duplicate leading letters of up to `strength` words: want -> w-w-want."""
    words = _words(text)
    candidates = [i for i, w in enumerate(words) if _normalize_token(w)[:1].isalpha() and len(_normalize_token(w)) >= 3]
    if not candidates:
        return text
    for i in rng.sample(candidates, min(strength, len(candidates))):
        word = words[i]
        first = _normalize_token(word)[0]
        words[i] = f"{first}-{first}-{word}"
    return " ".join(words)


def op_filler(text: str, rng: random.Random, strength: int = 1) -> str:
    """Insert `strength` filler noises at random word boundaries."""
    words = _words(text)
    for _ in range(strength):
        pos = rng.randint(0, len(words))
        words.insert(pos, rng.choice(_FILLERS))
    return " ".join(words)


def op_drop_words(text: str, rng: random.Random, fraction: float) -> str:
    """Delete a fraction of content words (at least one, never all words)."""
    words = _words(text)
    candidates = _content_indices(words)
    if not candidates:
        return text
    count = max(1, round(fraction * len(candidates)))
    count = min(count, len(candidates), len(words) - 1)
    doomed = set(rng.sample(candidates, count))
    return " ".join(w for i, w in enumerate(words) if i not in doomed)


def op_shuffle_clauses(text: str, rng: random.Random) -> str:
    """Reorder clauses; single-clause text gets its halves swapped."""
    clauses = [c.strip() for c in re.split(r"(?<=[,.;!?])\s+", text) if c.strip()]
    if len(clauses) >= 2:
        order = list(range(len(clauses)))
        while order == sorted(order):
            rng.shuffle(order)
        return " ".join(clauses[i] for i in order)
    words = _words(text)
    if len(words) < 4:
        return text
    cut = len(words) // 2
    return " ".join(words[cut:] + words[:cut])


def op_drop_target_nouns(text: str, rng: random.Random) -> str:
    """Delete the nouns naming the adjustment target (keeps >= 1 word)."""
    words = _words(text)
    doomed = [i for i, w in enumerate(words) if _normalize_token(w) in _TARGET_NOUNS]
    if len(doomed) >= len(words):
        doomed = doomed[: len(words) - 1]
    if not doomed:
        return text
    return " ".join(w for i, w in enumerate(words) if i not in set(doomed))


def apply_degradation(text: str, level: str, rng: random.Random) -> DegradationResult:
    """Degrade one request to the given clarity level (medium/low/unclear)."""
    if level == "medium":
        op = rng.choice(("stutter", "filler", "drop", "shuffle"))
        out = _APPLY[op](text, rng, "medium")
        return DegradationResult(out, (op,))
    if level == "low":
        ops = rng.sample(("stutter", "filler", "drop", "shuffle"), rng.randint(2, 3))
        out = text
        for op in ops:
            out = _APPLY[op](out, rng, "low")
        return DegradationResult(out, tuple(ops))
    if level == "unclear":
        ops = rng.sample(("stutter", "filler", "drop", "shuffle"), rng.randint(2, 3)) + ["drop"]
        out = text
        for op in ops:
            out = _APPLY[op](out, rng, "unclear")
        out = op_drop_target_nouns(out, rng)
        return DegradationResult(out or text.split()[0], tuple(ops) + ("drop_target_nouns",))
    raise ValueError(f"cannot degrade to level {level!r}")


_DROP_FRACTION = {"medium": 0.08, "low": 0.22, "unclear": 0.40}
_FILLER_STRENGTH = {"medium": 1, "low": 2, "unclear": 2}
_STUTTER_STRENGTH = {"medium": 1, "low": 1, "unclear": 2}

_APPLY = {
    "stutter": lambda t, rng, lvl: op_stutter(t, rng, _STUTTER_STRENGTH[lvl]),
    "filler": lambda t, rng, lvl: op_filler(t, rng, _FILLER_STRENGTH[lvl]),
    "drop": lambda t, rng, lvl: op_drop_words(t, rng, _DROP_FRACTION[lvl]),
    "shuffle": lambda t, rng, lvl: op_shuffle_clauses(t, rng),
}


def degrade_clarity(text: str, level: str, rng: random.Random) -> str:
    result = apply_degradation(text, level, rng)
    return result.text if result.text.strip() else text


def token_retention(original: str, degraded: str) -> float:
    """Fraction of the original's normalized tokens still present (multiset)."""
    orig = Counter(_normalize_token(w) for w in original.split())
    orig.pop("", None)
    if not orig:
        return 1.0
    kept = Counter(_normalize_token(w) for w in degraded.split())
    retained = sum(min(n, kept.get(tok, 0)) for tok, n in orig.items())
    return retained / sum(orig.values())
