"""HTTP/WS bridge for the console.

Stateless adapters between the REST surface and the pub/sub topics. The WS
stream multiplexes a session's decisions and telemetry into one socket as
{"kind", "seq", "ts", "payload"} frames.
"""

from __future__ import annotations

import contextlib
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .broker import BrokerClosed, BrokerServer
from .stack import LocalStack
from .wire import TopicKind, topic_name


class RequestBody(BaseModel):
    text: str = Field(min_length=1)


class FeedbackBody(BaseModel):
    scores: dict[str, float]


def create_app(
    stack: LocalStack,
    broker_server: BrokerServer | None = None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if broker_server is not None:
            await broker_server.start()
        await stack.start()
        yield
        await stack.stop()
        if broker_server is not None:
            await broker_server.stop()

    app = FastAPI(title="aoecr platform", lifespan=lifespan)
    app.state.stack = stack

    def _require_session(session_id: str) -> None:
        if not stack.store.exists(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    async def _publish(session_id: str, kind: TopicKind, payload: dict) -> int:
        try:
            return await stack.publish(session_id, kind, payload)
        except BrokerClosed as exc:
            raise HTTPException(status_code=503, detail="broker unavailable") from exc

    @app.post("/api/session")
    async def create_session() -> dict:
        try:
            session_id = stack.create_session()
        except BrokerClosed as exc:
            raise HTTPException(status_code=503, detail="broker unavailable") from exc
        return {"session_id": session_id}

    @app.post("/api/session/{session_id}/request")
    async def post_request(session_id: str, body: RequestBody) -> dict:
        _require_session(session_id)
        seq = await _publish(session_id, TopicKind.REQUEST, {"text": body.text})
        return {"accepted": True, "seq": seq}

    @app.post("/api/session/{session_id}/interrupt")
    async def post_interrupt(session_id: str) -> dict:
        _require_session(session_id)
        seq = await _publish(session_id, TopicKind.INTERRUPT, {})
        return {"accepted": True, "seq": seq}

    @app.post("/api/session/{session_id}/feedback")
    async def post_feedback(session_id: str, body: FeedbackBody) -> dict:
        _require_session(session_id)
        seq = await _publish(session_id, TopicKind.FEEDBACK, {"scores": body.scores})
        return {"accepted": True, "seq": seq}

    @app.get("/api/session/{session_id}/log")
    async def get_log(session_id: str) -> dict:
        _require_session(session_id)
        return {"session_id": session_id, "events": stack.store.events(session_id)}

    @app.get("/api/session/{session_id}/equalizer")
    async def get_equalizer(session_id: str) -> dict:
        _require_session(session_id)
        weights, count = stack.store.load_equalizer(session_id)
        return {"session_id": session_id, "weights": weights.as_dict(), "update_count": count}

    @app.websocket("/api/session/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        if not stack.store.exists(session_id):
            await websocket.close(code=4404)
            return
        await websocket.accept()
        sub = stack.broker.subscribe(
            topic_name(session_id, TopicKind.DECISION),
            topic_name(session_id, TopicKind.TELEMETRY),
        )
        try:
            while True:
                envelope = await sub.get()
                await websocket.send_json(
                    {
                        "kind": envelope.kind,
                        "seq": envelope.seq,
                        "ts": envelope.ts,
                        "payload": envelope.payload,
                    }
                )
        except (WebSocketDisconnect, BrokerClosed, RuntimeError):
            pass
        finally:
            with contextlib.suppress(Exception):
                stack.broker.unsubscribe(sub)
            with contextlib.suppress(Exception):
                await websocket.close()

    if console_dir is not None:
        console_dir = Path(console_dir)
        if not (console_dir / "index.html").exists():
            raise ValueError(f"console dir {console_dir} has no index.html (run `npm run build` first?)")
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
