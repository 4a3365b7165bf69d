"""Bed execution loop.

The loop is the sole owner of its NursingBed. Each cycle it drains pending
control envelopes (interrupts before commands, duplicates dropped), applies
them, advances the simulation by one tick, and periodically publishes a
telemetry snapshot. Nothing else ever touches the bed state.
"""

from __future__ import annotations

import asyncio
import json
import logging

from ..bed import DEFAULT_TICK, NursingBed
from ..commands import BedCapabilities, PlanParseError, parse_plan, validate_plan
from .wire import Deduper, EnvelopeFactory, TopicKind, WireEnvelope, topic_name

log = logging.getLogger(__name__)

TELEMETRY_INTERVAL = 0.5  # seconds: 2 Hz


class BedService:
    def __init__(
        self,
        broker,
        session_id: str,
        bed: NursingBed | None = None,
        caps: BedCapabilities | None = None,
        tick_interval: float = DEFAULT_TICK,
        telemetry_interval: float = TELEMETRY_INTERVAL,
    ):
        self.broker = broker
        self.session_id = session_id
        self.bed = bed or NursingBed()
        self.caps = caps or BedCapabilities()
        self.tick_interval = tick_interval
        self.telemetry_every = max(1, round(telemetry_interval / tick_interval))
        self.ticks = 0
        self._factory = EnvelopeFactory(session_id)
        self._deduper = Deduper()
        self._sub = broker.subscribe(
            topic_name(session_id, TopicKind.COMMAND),
            topic_name(session_id, TopicKind.INTERRUPT),
        )

    async def run(self) -> None:
        """Tick forever; cancel the task to stop."""
        try:
            while True:
                await self.step()
                await asyncio.sleep(self.tick_interval)
        finally:
            self.broker.unsubscribe(self._sub)

    async def step(self) -> None:
        """One cycle: apply pending control messages, tick, maybe publish."""
        pending = [env for env in self._sub.drain() if self._deduper.accept(env)]
        # interrupts always win over queued commands
        for env in pending:
            if env.kind == TopicKind.INTERRUPT.value:
                self.bed.interrupt()
        for env in pending:
            if env.kind == TopicKind.COMMAND.value:
                self._apply_command(env)
        self.bed.tick(self.tick_interval)
        self.ticks += 1
        if self.ticks % self.telemetry_every == 0:
            await self.publish_telemetry()

    def _apply_command(self, env: WireEnvelope) -> None:
        try:
            plan = parse_plan(json.dumps(env.payload["plan"], sort_keys=True, separators=(",", ":")))
        except (KeyError, TypeError, PlanParseError) as exc:
            log.warning("session %s: dropping malformed command (%s)", self.session_id, exc)
            return
        violations = validate_plan(plan, self.caps)
        if violations:
            log.warning("session %s: dropping invalid command: %s", self.session_id, violations)
            return
        self.bed.start_plan(plan)

    async def publish_telemetry(self) -> None:
        snapshot = self.bed.snapshot().to_payload()
        await self.broker.publish(self._factory.make(TopicKind.TELEMETRY, snapshot))
