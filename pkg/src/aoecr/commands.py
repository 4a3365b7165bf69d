"""Structured bed-control command language.

Defines the eight bed actions (four mechanisms x two directions), the plan
types (single / sequence / loop / stop), a canonical JSON wire form with a
strict parser, capability validation, and the label vocabulary that maps
ground-truth action labels to canonical plans.

Canonical form matters: two plans are equal exactly when their serialized
bytes are equal, which is what exact-match command evaluation relies on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence


class Mechanism(str, Enum):
    LIFT = "lift"
    BACKREST = "backrest"
    LEFT_LEG = "left_leg"
    RIGHT_LEG = "right_leg"


class Direction(str, Enum):
    EXTEND = "extend"
    RETRACT = "retract"


MECHANISMS: tuple[Mechanism, ...] = tuple(Mechanism)


@dataclass(frozen=True)
class BedAction:
    mechanism: Mechanism
    direction: Direction

    @property
    def name(self) -> str:
        return f"{self.mechanism.value}_{self.direction.value}"

    @classmethod
    def from_name(cls, name: str) -> "BedAction":
        for mech in Mechanism:
            for direction in Direction:
                if name == f"{mech.value}_{direction.value}":
                    return cls(mech, direction)
        raise ValueError(f"unknown action name: {name!r}")


ALL_ACTIONS: tuple[BedAction, ...] = tuple(
    BedAction(mech, direction) for mech in Mechanism for direction in Direction
)
ACTION_NAMES: tuple[str, ...] = tuple(a.name for a in ALL_ACTIONS)


class PlanKind(str, Enum):
    SINGLE = "single"
    SEQUENCE = "sequence"
    LOOP = "loop"
    STOP = "stop"


@dataclass(frozen=True)
class CommandStep:
    """One actuation: which action, how far (fraction of full stroke), how fast."""

    action: BedAction
    extent: float = 1.0
    speed_scale: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.extent <= 1.0):
            raise ValueError(f"extent must be in (0, 1], got {self.extent}")
        if not (0.0 < self.speed_scale <= 1.0):
            raise ValueError(f"speed_scale must be in (0, 1], got {self.speed_scale}")


@dataclass(frozen=True)
class CommandPlan:
    kind: PlanKind
    steps: tuple[CommandStep, ...] = ()
    repetitions: int | None = None

    def __post_init__(self) -> None:
        n = len(self.steps)
        if self.kind is PlanKind.SINGLE and n != 1:
            raise ValueError(f"single plan needs exactly 1 step, got {n}")
        if self.kind is PlanKind.SEQUENCE and n < 2:
            raise ValueError(f"sequence plan needs >= 2 steps, got {n}")
        if self.kind is PlanKind.LOOP and n < 1:
            raise ValueError("loop plan needs >= 1 step")
        if self.kind is PlanKind.STOP and n != 0:
            raise ValueError(f"stop plan must have 0 steps, got {n}")
        if self.kind is PlanKind.LOOP:
            if self.repetitions is None or self.repetitions < 1:
                raise ValueError(f"loop plan needs repetitions >= 1, got {self.repetitions}")
        elif self.repetitions is not None:
            raise ValueError(f"{self.kind.value} plan must not set repetitions")

    @property
    def is_stop(self) -> bool:
        return self.kind is PlanKind.STOP

    def expanded_steps(self) -> tuple[CommandStep, ...]:
        """Steps in execution order, with loop bodies repeated."""
        if self.kind is PlanKind.LOOP:
            assert self.repetitions is not None
            return self.steps * self.repetitions
        return self.steps


def single(action: BedAction, extent: float = 1.0, speed_scale: float = 1.0) -> CommandPlan:
    return CommandPlan(PlanKind.SINGLE, (CommandStep(action, extent, speed_scale),))


def sequence(steps: Iterable[CommandStep]) -> CommandPlan:
    return CommandPlan(PlanKind.SEQUENCE, tuple(steps))


def loop(steps: Iterable[CommandStep], repetitions: int) -> CommandPlan:
    return CommandPlan(PlanKind.LOOP, tuple(steps), repetitions)


def stop() -> CommandPlan:
    return CommandPlan(PlanKind.STOP)


# --- canonical serialization -------------------------------------------------

def plan_to_dict(plan: CommandPlan) -> dict:
    doc: dict = {
        "kind": plan.kind.value,
        "steps": [
            {"action": s.action.name, "extent": float(s.extent), "speed_scale": float(s.speed_scale)}
            for s in plan.steps
        ],
    }
    if plan.kind is PlanKind.LOOP:
        doc["repetitions"] = plan.repetitions
    return doc


def serialize_plan(plan: CommandPlan) -> str:
    """Canonical bytes: sorted keys, no whitespace, all fields explicit."""
    return json.dumps(plan_to_dict(plan), sort_keys=True, separators=(",", ":"))


class PlanParseError(ValueError):
    """Strict-parse failure; names the first offending field."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


def _require_number(value: object, path: str) -> float:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PlanParseError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _parse_step(doc: object, path: str) -> CommandStep:
    if not isinstance(doc, dict):
        raise PlanParseError(path, "step must be an object")
    unknown = set(doc) - {"action", "extent", "speed_scale"}
    if unknown:
        raise PlanParseError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    if "action" not in doc:
        raise PlanParseError(f"{path}.action", "missing required field")
    action_name = doc["action"]
    if not isinstance(action_name, str) or action_name not in ACTION_NAMES:
        raise PlanParseError(f"{path}.action", f"not one of the {len(ACTION_NAMES)} bed actions")
    if "extent" not in doc:
        raise PlanParseError(f"{path}.extent", "missing required field")
    extent = _require_number(doc["extent"], f"{path}.extent")
    if not (0.0 < extent <= 1.0):
        raise PlanParseError(f"{path}.extent", f"must be in (0, 1], got {extent}")
    speed_scale = 1.0
    if "speed_scale" in doc:
        speed_scale = _require_number(doc["speed_scale"], f"{path}.speed_scale")
        if not (0.0 < speed_scale <= 1.0):
            raise PlanParseError(f"{path}.speed_scale", f"must be in (0, 1], got {speed_scale}")
    return CommandStep(BedAction.from_name(action_name), extent, speed_scale)


def parse_plan(text: str) -> CommandPlan:
    """Parse a command JSON document, rejecting anything off-schema.

    Unknown fields, wrong types, and bound violations all raise
    PlanParseError naming the first offending field, so a malformed
    model emission surfaces as a crisp mismatch signal.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError("$", f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PlanParseError("$", "top level must be an object")

    unknown = set(doc) - {"kind", "steps", "repetitions"}
    if unknown:
        raise PlanParseError(sorted(unknown)[0], "unknown field")
    if "kind" not in doc:
        raise PlanParseError("kind", "missing required field")
    try:
        kind = PlanKind(doc["kind"])
    except (ValueError, TypeError):
        raise PlanParseError("kind", f"must be one of {[k.value for k in PlanKind]}") from None
    if "steps" not in doc:
        raise PlanParseError("steps", "missing required field")
    raw_steps = doc["steps"]
    if not isinstance(raw_steps, list):
        raise PlanParseError("steps", "must be an array")

    steps = tuple(_parse_step(s, f"steps[{i}]") for i, s in enumerate(raw_steps))

    repetitions: int | None = None
    if kind is PlanKind.LOOP:
        if "repetitions" not in doc:
            raise PlanParseError("repetitions", "missing required field for loop plans")
        reps = doc["repetitions"]
        if isinstance(reps, bool) or not isinstance(reps, int):
            raise PlanParseError("repetitions", "must be an integer")
        if reps < 1:
            raise PlanParseError("repetitions", f"must be >= 1, got {reps}")
        repetitions = reps
    elif "repetitions" in doc:
        raise PlanParseError("repetitions", f"only loop plans may set repetitions, kind is {kind.value}")

    n = len(steps)
    if kind is PlanKind.SINGLE and n != 1:
        raise PlanParseError("steps", f"single plan needs exactly 1 step, got {n}")
    if kind is PlanKind.SEQUENCE and n < 2:
        raise PlanParseError("steps", f"sequence plan needs >= 2 steps, got {n}")
    if kind is PlanKind.LOOP and n < 1:
        raise PlanParseError("steps", "loop plan needs >= 1 step")
    if kind is PlanKind.STOP and n != 0:
        raise PlanParseError("steps", f"stop plan must have 0 steps, got {n}")

    return CommandPlan(kind, steps, repetitions)


# --- capability validation ---------------------------------------------------

@dataclass(frozen=True)
class BedCapabilities:
    """What the target bed accepts; safety caps are configurable."""

    allowed_actions: frozenset[str] = frozenset(ACTION_NAMES)
    max_repetitions: int = 10
    max_steps: int = 12


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def validate_plan(plan: CommandPlan, caps: BedCapabilities | None = None) -> list[Violation]:
    """Check a structurally valid plan against bed capabilities.

    Returns every violation found (empty list means ok). Pure and total:
    never raises, never mutates.
    """
    caps = caps or BedCapabilities()
    violations: list[Violation] = []
    for i, step in enumerate(plan.steps):
        if step.action.name not in caps.allowed_actions:
            violations.append(
                Violation(f"steps[{i}].action", f"{step.action.name} not supported by this bed")
            )
    if plan.kind is PlanKind.LOOP and plan.repetitions is not None:
        if plan.repetitions > caps.max_repetitions:
            violations.append(
                Violation("repetitions", f"repetitions {plan.repetitions} exceeds cap {caps.max_repetitions}")
            )
    if len(plan.steps) > caps.max_steps:
        violations.append(
            Violation("steps", f"{len(plan.steps)} steps exceeds cap {caps.max_steps}")
        )
    return violations


# --- degree modifiers ---------------------------------------------------------

@dataclass(frozen=True)
class DegreeModifier:
    """A spoken intensity phrase and the extent fraction it maps to."""

    surface_form: str
    extent_fraction: float

    def __post_init__(self) -> None:
        if not (0.0 < self.extent_fraction <= 1.0):
            raise ValueError(f"extent_fraction must be in (0, 1], got {self.extent_fraction}")


DEFAULT_DEGREE_TABLE: tuple[DegreeModifier, ...] = (
    DegreeModifier("slightly", 0.25),
    DegreeModifier("a tiny bit", 0.25),
    DegreeModifier("a little", 0.25),
    DegreeModifier("a bit", 0.40),
    DegreeModifier("somewhat", 0.40),
    DegreeModifier("halfway", 0.50),
    DegreeModifier("half way", 0.50),
    DegreeModifier("mostly", 0.75),
    DegreeModifier("almost all the way", 0.75),
    DegreeModifier("fully", 1.00),
    DegreeModifier("all the way", 1.00),
    DegreeModifier("completely", 1.00),
)


def find_degree(text: str, table: Sequence[DegreeModifier] = DEFAULT_DEGREE_TABLE) -> DegreeModifier | None:
    """Longest whole-word degree phrase found in the text, or None."""
    lowered = text.lower()
    best: DegreeModifier | None = None
    for mod in table:
        pattern = r"\b" + re.escape(mod.surface_form.lower()) + r"\b"
        if re.search(pattern, lowered):
            if best is None or len(mod.surface_form) > len(best.surface_form):
                best = mod
    return best


def scale_extents(plan: CommandPlan, fraction: float) -> CommandPlan:
    """Scale every step's extent by a fraction in (0, 1]. Stop plans pass through."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if not plan.steps or fraction == 1.0:
        return plan
    steps = tuple(
        CommandStep(s.action, s.extent * fraction, s.speed_scale) for s in plan.steps
    )
    return CommandPlan(plan.kind, steps, plan.repetitions)


# --- label vocabulary ---------------------------------------------------------

class UnknownLabelError(KeyError):
    pass


def _step(name: str, extent: float = 1.0) -> CommandStep:
    return CommandStep(BedAction.from_name(name), extent)


def default_label_vocabulary(loop_repetitions: int = 3) -> dict[str, CommandPlan]:
    """Ground-truth label -> canonical plan.

    The eight per-mechanism actions, a few named composites used by the
    dialogue forge, a bounded exercise loop, and stop.
    """
    vocab: dict[str, CommandPlan] = {name: single(BedAction.from_name(name)) for name in ACTION_NAMES}
    vocab["sit_up"] = sequence([_step("backrest_extend"), _step("lift_extend", 0.5)])
    vocab["lie_flat"] = sequence(
        [_step("backrest_retract"), _step("left_leg_retract"), _step("right_leg_retract")]
    )
    vocab["raise_both_legs"] = sequence([_step("left_leg_extend"), _step("right_leg_extend")])
    vocab["lower_both_legs"] = sequence([_step("left_leg_retract"), _step("right_leg_retract")])
    vocab["leg_exercise"] = loop(
        [_step("left_leg_extend", 0.5), _step("left_leg_retract", 0.5),
         _step("right_leg_extend", 0.5), _step("right_leg_retract", 0.5)],
        loop_repetitions,
    )
    vocab["stop"] = stop()
    return vocab


def plan_from_label(
    label: str,
    degree: DegreeModifier | None = None,
    vocabulary: Mapping[str, CommandPlan] | None = None,
) -> CommandPlan:
    """Deterministic canonical plan for a ground-truth label.

    A degree modifier scales the extent of every step.
    """
    vocab = vocabulary if vocabulary is not None else default_label_vocabulary()
    try:
        plan = vocab[label]
    except KeyError:
        raise UnknownLabelError(label) from None
    if degree is not None:
        plan = scale_extents(plan, degree.extent_fraction)
    return plan


# --- schema document ----------------------------------------------------------

def schema_document() -> dict:
    """JSON Schema for the canonical command form, published in docs/ and
    embedded verbatim in the agent prompt's worked example."""
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "BedCommandPlan",
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "steps"],
        "properties": {
            "kind": {"enum": [k.value for k in PlanKind]},
            "steps": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["action", "extent"],
                    "properties": {
                        "action": {"enum": list(ACTION_NAMES)},
                        "extent": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                        "speed_scale": {"type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": 1.0},
                    },
                },
            },
            "repetitions": {"type": "integer", "minimum": 1},
        },
        "allOf": [
            {
                "if": {"properties": {"kind": {"const": "single"}}},
                "then": {"properties": {"steps": {"minItems": 1, "maxItems": 1}}, "not": {"required": ["repetitions"]}},
            },
            {
                "if": {"properties": {"kind": {"const": "sequence"}}},
                "then": {"properties": {"steps": {"minItems": 2}}, "not": {"required": ["repetitions"]}},
            },
            {
                "if": {"properties": {"kind": {"const": "loop"}}},
                "then": {"required": ["repetitions"], "properties": {"steps": {"minItems": 1}}},
            },
            {
                "if": {"properties": {"kind": {"const": "stop"}}},
                "then": {"properties": {"steps": {"maxItems": 0}}, "not": {"required": ["repetitions"]}},
            },
        ],
    }
