"""Cloud-agent service.

Consumes patient requests per session in arrival order, runs the inference
chain, optimizes replies under the session's equalizer, publishes the
decision, and forwards executable plans to the bed. Feedback ballots update
the equalizer; every event is persisted append-only so a restarted agent
reconstructs its state from the log.

Interrupts never pass through here: the bed consumes them directly, so the
hot path cannot be delayed by a model call.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
from dataclasses import dataclass

from ..commands import plan_to_dict
from ..equalizer import DEFAULT_LEARNING_RATE, MetricVector, update_equalizer
from ..expert import optimize_response
from ..gateway.backends import Backend
from ..pipeline import AgentPipeline, Clarify, Execute, PipelineConfig, Refuse, SessionContext
from .sessions import SessionStore
from .wire import TOPIC_PREFIX, Deduper, EnvelopeFactory, TopicKind, WireEnvelope

log = logging.getLogger(__name__)


@dataclass
class AgentRuntimeConfig:
    decision_deadline: float = 30.0  # seconds; expiry publishes a refusal
    learning_rate: float = DEFAULT_LEARNING_RATE
    optimize_enabled: bool = True


class _SessionWorker:
    def __init__(self, service: "AgentService", session_id: str):
        self.service = service
        self.session_id = session_id
        self.queue: asyncio.Queue[WireEnvelope] = asyncio.Queue()
        self.ctx = SessionContext(session_id=session_id)
        self.factory = EnvelopeFactory(session_id)
        self.pipeline = AgentPipeline(service.backend, service.pipeline_config)
        self.update_count = 0
        self.last_telemetry: dict | None = None
        store = service.store
        if store.exists(session_id):
            self.ctx.weights, self.update_count = store.load_equalizer(session_id)
        self.task = asyncio.ensure_future(self.run())

    async def run(self) -> None:
        while True:
            envelope = await self.queue.get()
            try:
                await self.handle(envelope)
            except Exception:  # noqa: BLE001 - a poison message must not kill the session
                log.exception("session %s: failed to handle %s", self.session_id, envelope.topic)

    async def handle(self, envelope: WireEnvelope) -> None:
        kind = envelope.kind
        if kind == TopicKind.TELEMETRY.value:
            self.last_telemetry = envelope.payload
        elif kind == TopicKind.REQUEST.value:
            await self.handle_request(envelope)
        elif kind == TopicKind.FEEDBACK.value:
            await self.handle_feedback(envelope)

    async def handle_request(self, envelope: WireEnvelope) -> None:
        service = self.service
        text = str(envelope.payload.get("text", ""))
        service.store.append_event(self.session_id, "request", {"text": text, "seq": envelope.seq})
        deadline = service.runtime.decision_deadline
        try:
            decision = await asyncio.wait_for(
                asyncio.to_thread(self.pipeline.handle_request, self.ctx, text), deadline
            )
        except asyncio.TimeoutError:
            decision = Refuse(f"no decision within {deadline:.0f} s; please try again")

        if isinstance(decision, Execute):
            response = decision.response
            if service.runtime.optimize_enabled and service.expert_backend is not None:
                response = await asyncio.to_thread(
                    optimize_response, decision.response, text, self.ctx.weights, service.expert_backend
                )
            payload = {
                "kind": "execute",
                "response": response,
                "plan": plan_to_dict(decision.plan),
                "request_seq": envelope.seq,
            }
            await self.publish(TopicKind.DECISION, payload)
            await self.publish(TopicKind.COMMAND, {"plan": plan_to_dict(decision.plan)})
            service.store.append_event(
                self.session_id, "decision", {**payload, "telemetry": self.last_telemetry}
            )
            service.store.append_event(self.session_id, "command", {"plan": plan_to_dict(decision.plan)})
        elif isinstance(decision, Clarify):
            payload = {"kind": "clarify", "question": decision.question, "request_seq": envelope.seq}
            await self.publish(TopicKind.DECISION, payload)
            service.store.append_event(
                self.session_id, "decision", {**payload, "telemetry": self.last_telemetry}
            )
        else:
            payload = {"kind": "refuse", "reason": decision.reason, "request_seq": envelope.seq}
            await self.publish(TopicKind.DECISION, payload)
            service.store.append_event(
                self.session_id, "decision", {**payload, "telemetry": self.last_telemetry}
            )

    async def handle_feedback(self, envelope: WireEnvelope) -> None:
        service = self.service
        try:
            vector = MetricVector.from_dict(envelope.payload["scores"])
        except (KeyError, TypeError, ValueError) as exc:
            log.warning("session %s: ignoring malformed feedback (%s)", self.session_id, exc)
            return
        self.ctx.weights = update_equalizer(self.ctx.weights, vector, service.runtime.learning_rate)
        self.update_count += 1
        service.store.append_event(self.session_id, "feedback", {"scores": vector.as_dict()})
        service.store.save_equalizer(self.session_id, self.ctx.weights, self.update_count)

    async def publish(self, kind: TopicKind, payload: dict) -> None:
        await self.service.broker.publish(self.factory.make(kind, payload))


class AgentService:
    def __init__(
        self,
        broker,
        store: SessionStore,
        backend: Backend,
        expert_backend: Backend | None = None,
        pipeline_config: PipelineConfig | None = None,
        runtime: AgentRuntimeConfig | None = None,
    ):
        self.broker = broker
        self.store = store
        self.backend = backend
        self.expert_backend = expert_backend
        self.pipeline_config = pipeline_config or PipelineConfig()
        self.runtime = runtime or AgentRuntimeConfig()
        self.workers: dict[str, _SessionWorker] = {}
        self._deduper = Deduper()
        # subscribe at construction so no envelope published before run()
        # is scheduled can be missed
        self._sub = broker.subscribe(
            f"{TOPIC_PREFIX}/+/request",
            f"{TOPIC_PREFIX}/+/feedback",
            f"{TOPIC_PREFIX}/+/telemetry",
        )

    def worker(self, session_id: str) -> _SessionWorker:
        if session_id not in self.workers:
            self.workers[session_id] = _SessionWorker(self, session_id)
        return self.workers[session_id]

    async def run(self) -> None:
        """Dispatch loop: route envelopes to per-session workers, in order."""
        sub = self._sub
        try:
            async for envelope in sub:
                if not self._deduper.accept(envelope):
                    continue
                self.worker(envelope.session_id).queue.put_nowait(envelope)
        finally:
            for worker in self.workers.values():
                worker.task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await worker.task
            self.workers.clear()
