"""Composed local runtime: broker + sessions + agent + one bed per session."""

from __future__ import annotations

import asyncio
import contextlib
from dataclasses import dataclass, field
from pathlib import Path

from ..bed import DEFAULT_TICK, NursingBed
from ..commands import BedCapabilities
from ..gateway.backends import Backend, BackendConfig, make_backend
from ..pipeline import PipelineConfig
from .agent import AgentRuntimeConfig, AgentService
from .bedservice import TELEMETRY_INTERVAL, BedService
from .broker import InProcessBroker
from .sessions import SessionStore
from .wire import EnvelopeFactory, TopicKind


@dataclass
class StackConfig:
    data_dir: str = "./aoecr-data"
    tick_interval: float = DEFAULT_TICK
    telemetry_interval: float = TELEMETRY_INTERVAL
    backend: BackendConfig = field(default_factory=BackendConfig)
    expert_backend: BackendConfig | None = None
    decision_deadline: float = 30.0
    optimize_enabled: bool = True


class LocalStack:
    """Everything needed to serve sessions in one process."""

    def __init__(
        self,
        config: StackConfig | None = None,
        backend: Backend | None = None,
        expert_backend: Backend | None = None,
        pipeline_config: PipelineConfig | None = None,
        broker=None,
        spawn_agent: bool = True,
        spawn_beds: bool = True,
    ):
        self.config = config or StackConfig()
        self.spawn_agent = spawn_agent
        self.spawn_beds = spawn_beds
        Path(self.config.data_dir).mkdir(parents=True, exist_ok=True)
        self.broker = broker if broker is not None else InProcessBroker()
        self.store = SessionStore(self.config.data_dir)
        backend = backend or make_backend(self.config.backend)
        if expert_backend is None:
            expert_cfg = self.config.expert_backend or self.config.backend
            expert_backend = make_backend(expert_cfg)
        self.agent: AgentService | None = None
        if spawn_agent:
            self.agent = AgentService(
                self.broker,
                self.store,
                backend,
                expert_backend=expert_backend if self.config.optimize_enabled else None,
                pipeline_config=pipeline_config,
                runtime=AgentRuntimeConfig(
                    decision_deadline=self.config.decision_deadline,
                    optimize_enabled=self.config.optimize_enabled,
                ),
            )
        self.beds: dict[str, BedService] = {}
        self._tasks: list[asyncio.Task] = []
        self._publishers: dict[str, EnvelopeFactory] = {}

    async def start(self) -> None:
        if self.agent is not None:
            self._tasks.append(asyncio.ensure_future(self.agent.run()))

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
        self._tasks.clear()
        self.broker.close()

    def create_session(self, session_id: str | None = None) -> str:
        session_id = self.store.create_session(session_id)
        if self.spawn_beds:
            bed = BedService(
                self.broker,
                session_id,
                bed=NursingBed(),
                caps=BedCapabilities(),
                tick_interval=self.config.tick_interval,
                telemetry_interval=self.config.telemetry_interval,
            )
            self.beds[session_id] = bed
            self._tasks.append(asyncio.ensure_future(bed.run()))
        return session_id

    def publisher(self, session_id: str) -> EnvelopeFactory:
        """Envelope factory for platform-originated topics of this session."""
        if session_id not in self._publishers:
            self._publishers[session_id] = EnvelopeFactory(session_id)
        return self._publishers[session_id]

    async def publish(self, session_id: str, kind: TopicKind, payload: dict) -> int:
        envelope = self.publisher(session_id).make(kind, payload)
        await self.broker.publish(envelope)
        return envelope.seq
