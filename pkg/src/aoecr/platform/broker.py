"""Brokers carrying the wire contract.

InProcessBroker is the hermetic asyncio implementation every test runs on.
BrokerServer/RemoteBroker speak the same contract over line-delimited JSON
on TCP so the agent, bed, and platform can also run as separate processes.
Subscriptions use MQTT-style patterns: `+` matches one level, a trailing
`#` matches the rest.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
from dataclasses import dataclass, field

from .wire import WireEnvelope

log = logging.getLogger(__name__)


class BrokerClosed(RuntimeError):
    pass


def topic_matches(pattern: str, topic: str) -> bool:
    p_parts = pattern.split("/")
    t_parts = topic.split("/")
    for i, p in enumerate(p_parts):
        if p == "#":
            return i == len(p_parts) - 1
        if i >= len(t_parts):
            return False
        if p != "+" and p != t_parts[i]:
            return False
    return len(p_parts) == len(t_parts)


@dataclass
class Subscription:
    patterns: tuple[str, ...]
    queue: asyncio.Queue = field(default_factory=asyncio.Queue)
    closed: bool = False

    def matches(self, topic: str) -> bool:
        return any(topic_matches(p, topic) for p in self.patterns)

    async def get(self) -> WireEnvelope:
        envelope = await self.queue.get()
        if envelope is None:
            raise BrokerClosed("subscription closed")
        return envelope

    def drain(self) -> list[WireEnvelope]:
        """Everything already delivered, without waiting."""
        items = []
        while True:
            try:
                envelope = self.queue.get_nowait()
            except asyncio.QueueEmpty:
                return items
            if envelope is not None:
                items.append(envelope)

    def __aiter__(self):
        return self

    async def __anext__(self) -> WireEnvelope:
        try:
            return await self.get()
        except BrokerClosed:
            raise StopAsyncIteration from None


class InProcessBroker:
    """Asynchronous fan-out to every matching subscription."""

    def __init__(self):
        self._subs: list[Subscription] = []
        self.closed = False

    def subscribe(self, *patterns: str) -> Subscription:
        if self.closed:
            raise BrokerClosed("broker is closed")
        sub = Subscription(patterns=tuple(patterns))
        self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        sub.closed = True
        if sub in self._subs:
            self._subs.remove(sub)
        sub.queue.put_nowait(None)

    async def publish(self, envelope: WireEnvelope) -> None:
        if self.closed:
            raise BrokerClosed("broker is closed")
        for sub in self._subs:
            if not sub.closed and sub.matches(envelope.topic):
                sub.queue.put_nowait(envelope)

    def close(self) -> None:
        self.closed = True
        for sub in self._subs:
            sub.closed = True
            sub.queue.put_nowait(None)
        self._subs.clear()


# --- TCP transport (same contract, separate processes) -------------------------

class BrokerServer:
    """Line-JSON TCP fan-out server wrapping an InProcessBroker.

    Client frames: {"op": "sub", "patterns": [...]} or
    {"op": "pub", "envelope": {...}}. Server frames: {"envelope": {...}}.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 8750):
        self.host = host
        self.port = port
        self.broker = InProcessBroker()
        self._server: asyncio.AbstractServer | None = None
        self._tasks: set[asyncio.Task] = set()

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle, self.host, self.port)

    async def stop(self) -> None:
        if self._server:
            self._server.close()
            await self._server.wait_closed()
        for task in list(self._tasks):
            task.cancel()
        self.broker.close()

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        sub: Subscription | None = None
        forward: asyncio.Task | None = None
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                frame = json.loads(line)
                if frame.get("op") == "sub":
                    if sub is not None:
                        self.broker.unsubscribe(sub)
                    if forward:
                        forward.cancel()
                    sub = self.broker.subscribe(*frame["patterns"])
                    forward = asyncio.ensure_future(self._forward(sub, writer))
                    self._tasks.add(forward)
                elif frame.get("op") == "pub":
                    await self.broker.publish(WireEnvelope.from_json(json.dumps(frame["envelope"])))
        except (ConnectionError, json.JSONDecodeError, asyncio.IncompleteReadError) as exc:
            log.debug("broker connection ended: %s", exc)
        finally:
            if sub is not None:
                self.broker.unsubscribe(sub)
            if forward:
                forward.cancel()
            with contextlib.suppress(Exception):
                writer.close()

    @staticmethod
    async def _forward(sub: Subscription, writer: asyncio.StreamWriter) -> None:
        with contextlib.suppress(BrokerClosed, ConnectionError, asyncio.CancelledError):
            async for envelope in sub:
                writer.write((json.dumps({"envelope": json.loads(envelope.to_json())}) + "\n").encode())
                await writer.drain()


class RemoteBroker:
    """Client side of BrokerServer; mirrors the in-process interface.

    Publishes share one connection; every subscription gets its own, so a
    service can hold as many as it needs.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 8750):
        self.host = host
        self.port = port
        self.closed = False
        self._writer: asyncio.StreamWriter | None = None
        self._sub_tasks: dict[int, asyncio.Task] = {}

    async def connect(self) -> None:
        _, self._writer = await asyncio.open_connection(self.host, self.port)

    def subscribe(self, *patterns: str) -> Subscription:
        if self.closed:
            raise BrokerClosed("broker client is closed")
        sub = Subscription(patterns=tuple(patterns))
        task = asyncio.ensure_future(self._run_subscription(sub))
        self._sub_tasks[id(sub)] = task
        return sub

    async def _run_subscription(self, sub: Subscription) -> None:
        try:
            reader, writer = await asyncio.open_connection(self.host, self.port)
            writer.write((json.dumps({"op": "sub", "patterns": list(sub.patterns)}) + "\n").encode())
            await writer.drain()
            while not sub.closed:
                line = await reader.readline()
                if not line:
                    break
                frame = json.loads(line)
                sub.queue.put_nowait(WireEnvelope.from_json(json.dumps(frame["envelope"])))
        except (ConnectionError, json.JSONDecodeError, asyncio.CancelledError) as exc:
            log.debug("subscription ended: %s", exc)
        finally:
            sub.closed = True
            sub.queue.put_nowait(None)

    def unsubscribe(self, sub: Subscription) -> None:
        sub.closed = True
        task = self._sub_tasks.pop(id(sub), None)
        if task:
            task.cancel()
        sub.queue.put_nowait(None)

    async def publish(self, envelope: WireEnvelope) -> None:
        if self._writer is None or self.closed:
            raise BrokerClosed("not connected")
        self._writer.write((json.dumps({"op": "pub", "envelope": json.loads(envelope.to_json())}) + "\n").encode())
        await self._writer.drain()

    def close(self) -> None:
        self.closed = True
        for task in self._sub_tasks.values():
            task.cancel()
        self._sub_tasks.clear()
        if self._writer:
            with contextlib.suppress(Exception):
                self._writer.close()
