"""Digital twin of the four-mechanism nursing bed.

Each mechanism is a linear actuator with a normalized stroke position in
[0, 1] (the two mechanical limit states). A validated command plan executes
one step at a time; ticking integrates motion at a constant rate, carries
leftover tick time across step boundaries, and an interrupt freezes
everything immediately. All math is plain floats, so identical inputs give
bit-identical trajectories.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable, Mapping

from .commands import CommandPlan, CommandStep, Mechanism, PlanKind

DEFAULT_RATE = 0.1  # stroke fraction per second: full stroke in 10 s
DEFAULT_TICK = 0.1  # seconds

# Hook receives (bed, step) before a step starts; False halts the plan.
InterlockPredicate = Callable[["NursingBed", CommandStep], bool]


@dataclass
class ActuatorState:
    position: float = 0.0
    rate: float = DEFAULT_RATE
    target: float | None = None
    moving: bool = False


@dataclass(frozen=True)
class ActiveStepInfo:
    """Telemetry descriptor for the step currently executing."""

    action: str
    index: int
    count: int
    iteration: int
    repetitions: int

    def to_payload(self) -> dict:
        return {
            "action": self.action,
            "index": self.index,
            "count": self.count,
            "iteration": self.iteration,
            "repetitions": self.repetitions,
        }


@dataclass(frozen=True)
class Telemetry:
    """Point-in-time read of bed state; building one never mutates the bed."""

    ts: float
    mechanisms: dict[str, dict]
    active: ActiveStepInfo | None

    def to_payload(self) -> dict:
        return {
            "ts": self.ts,
            "mechanisms": self.mechanisms,
            "active": self.active.to_payload() if self.active else None,
        }


@dataclass
class _Cursor:
    plan: CommandPlan
    step_index: int = 0
    iteration: int = 0
    speed: float = 0.0  # effective stroke/s for the running step

    @property
    def repetitions(self) -> int:
        return self.plan.repetitions if self.plan.kind is PlanKind.LOOP else 1

    @property
    def step(self) -> CommandStep:
        return self.plan.steps[self.step_index]


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


class NursingBed:
    """Owns the four actuators and at most one executing plan.

    Not thread-safe by design: a single execution loop owns the instance
    and everything else talks to it through messages (see platform.bedservice).
    """

    def __init__(
        self,
        rates: Mapping[Mechanism, float] | float | None = None,
        interlock: InterlockPredicate | None = None,
    ):
        if rates is None:
            rates = DEFAULT_RATE
        if isinstance(rates, (int, float)):
            rates = {mech: float(rates) for mech in Mechanism}
        self._actuators: dict[Mechanism, ActuatorState] = {}
        for mech in Mechanism:
            rate = float(rates.get(mech, DEFAULT_RATE))
            if rate <= 0.0:
                raise ValueError(f"rate for {mech.value} must be > 0, got {rate}")
            self._actuators[mech] = ActuatorState(rate=rate)
        self._interlock = interlock
        self._cursor: _Cursor | None = None
        self._clock = 0.0

    # --- read side -----------------------------------------------------------

    @property
    def clock(self) -> float:
        return self._clock

    @property
    def idle(self) -> bool:
        return self._cursor is None

    @property
    def active_plan(self) -> CommandPlan | None:
        return self._cursor.plan if self._cursor else None

    def position(self, mech: Mechanism) -> float:
        return self._actuators[mech].position

    def positions(self) -> dict[Mechanism, float]:
        return {mech: act.position for mech, act in self._actuators.items()}

    def actuator(self, mech: Mechanism) -> ActuatorState:
        return copy.copy(self._actuators[mech])

    def active_step_info(self) -> ActiveStepInfo | None:
        cur = self._cursor
        if cur is None:
            return None
        return ActiveStepInfo(
            action=cur.step.action.name,
            index=cur.step_index,
            count=len(cur.plan.steps),
            iteration=cur.iteration,
            repetitions=cur.repetitions,
        )

    def snapshot(self) -> Telemetry:
        return Telemetry(
            ts=self._clock,
            mechanisms={
                mech.value: {"pos": act.position, "moving": act.moving}
                for mech, act in self._actuators.items()
            },
            active=self.active_step_info(),
        )

    # --- write side ------------------------------------------------------------

    def start_plan(self, plan: CommandPlan) -> None:
        """Begin executing a validated plan, preempting any active one.

        Callers must run validate_plan first; this method trusts its input.
        """
        self._halt_motion()
        if plan.is_stop:
            self._cursor = None
            return
        self._cursor = _Cursor(plan=plan)
        self._begin_step()

    def interrupt(self) -> None:
        """Freeze everything where it is. Idempotent; idle interrupt is a no-op."""
        self._halt_motion()
        self._cursor = None

    def tick(self, dt: float) -> None:
        """Advance time by dt seconds, consuming it across step boundaries."""
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self._clock += dt
        remaining = dt
        while remaining > 0.0 and self._cursor is not None:
            act = self._actuators[self._cursor.step.action.mechanism]
            if act.target is None:
                # step began already satisfied (clamped target == position)
                self._advance_cursor()
                continue
            distance = abs(act.target - act.position)
            speed = self._cursor.speed
            time_needed = distance / speed
            if time_needed <= remaining:
                act.position = act.target
                remaining -= time_needed
                self._finish_step(act)
            else:
                if act.target > act.position:
                    act.position = min(act.position + speed * remaining, act.target)
                else:
                    act.position = max(act.position - speed * remaining, act.target)
                remaining = 0.0

    def estimate_duration(self, plan: CommandPlan) -> float:
        """Predicted seconds to run the plan from current positions.

        Walks the expanded step list analytically; agrees with tick
        simulation to within one tick.
        """
        positions = {mech: act.position for mech, act in self._actuators.items()}
        total = 0.0
        for step in plan.expanded_steps():
            mech = step.action.mechanism
            act = self._actuators[mech]
            delta = step.extent if step.action.direction.value == "extend" else -step.extent
            target = _clamp(positions[mech] + delta)
            speed = act.rate * step.speed_scale
            total += abs(target - positions[mech]) / speed
            positions[mech] = target
        return total

    # --- internals ---------------------------------------------------------------

    def _halt_motion(self) -> None:
        for act in self._actuators.values():
            act.moving = False
            act.target = None

    def _begin_step(self) -> None:
        assert self._cursor is not None
        step = self._cursor.step
        if self._interlock is not None and not self._interlock(self, step):
            self.interrupt()
            return
        act = self._actuators[step.action.mechanism]
        delta = step.extent if step.action.direction.value == "extend" else -step.extent
        target = _clamp(act.position + delta)
        self._cursor.speed = act.rate * step.speed_scale
        if target == act.position:
            # already at the limit; the step is a no-op completed on the next tick
            act.target = None
            act.moving = False
        else:
            act.target = target
            act.moving = True

    def _finish_step(self, act: ActuatorState) -> None:
        act.target = None
        act.moving = False
        self._advance_cursor()

    def _advance_cursor(self) -> None:
        cur = self._cursor
        assert cur is not None
        cur.step_index += 1
        if cur.step_index >= len(cur.plan.steps):
            cur.step_index = 0
            cur.iteration += 1
            if cur.iteration >= cur.repetitions:
                self._cursor = None
                return
        self._begin_step()
