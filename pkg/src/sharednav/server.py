"""Websocket front door: sessions exchange protocol envelopes with the
control loop and with each other.

One asyncio event loop owns everything, so no locks: inbound messages are
decoded, logged, and dispatched inline; outbound publishes go through
per-session queues which preserve order.  The map is latched (sent on
subscribe), as is the most recent plan.  A background task drives the
control loop at the configured period and fans its publishes out.
"""

from __future__ import annotations

import asyncio
import contextlib
import io
import socket
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from sharednav.bridge import (
    INBOUND_TOPICS,
    BridgeError,
    BridgeMessage,
    LogRecord,
    MessageLog,
    SubscriptionTable,
    decode_message,
    encode_message,
)
from sharednav.loop import ControlLoop, ServerConfig


@dataclass
class Session:
    id: int
    websocket: WebSocket
    outbox: asyncio.Queue = field(default_factory=asyncio.Queue)


class BridgeServer:
    """Shared state behind the websocket endpoint."""

    def __init__(self, config: ServerConfig, loop: ControlLoop, log: MessageLog):
        self.config = config
        self.loop = loop
        self.log = log
        self.table = SubscriptionTable()
        self.sessions: dict[int, Session] = {}
        self._next_session = 0

    def new_session(self, websocket: WebSocket) -> Session:
        self._next_session += 1
        session = Session(self._next_session, websocket)
        self.sessions[session.id] = session
        return session

    def drop_session(self, session: Session) -> None:
        self.table.drop_session(session.id)
        self.sessions.pop(session.id, None)

    def _log(self, direction: str, session: int, message: BridgeMessage) -> None:
        record = LogRecord(
            stamp_ms=self.loop.stamp_ms, dir=direction, session=session, msg=message
        )
        self.log.append(record)

    async def send(self, session: Session, message: BridgeMessage) -> None:
        await session.outbox.put(encode_message(message))
        self._log("out", session.id, message)

    async def handle_inbound(self, session: Session, text: str) -> None:
        try:
            message = decode_message(text)
        except BridgeError as exc:
            await self._send_status(session, exc)
            return
        self._log("in", session.id, message)

        if message.op == "subscribe":
            self.table.subscribe(session.id, message.topic)
            if message.topic == "/map":
                await self.send(
                    session, BridgeMessage("publish", "/map", self.loop.map_payload())
                )
            elif message.topic == "/plan" and self.loop.last_plan_payload is not None:
                await self.send(
                    session,
                    BridgeMessage("publish", "/plan", self.loop.last_plan_payload),
                )
        elif message.op == "unsubscribe":
            self.table.unsubscribe(session.id, message.topic)
        elif message.op == "publish":
            assert message.msg is not None
            if message.topic in INBOUND_TOPICS:
                self.loop.submit(message.topic, message.msg)
            await self.fan_out(message.topic, message.msg, exclude=None)
        # advertise is accepted as a declaration and needs no action

    async def _send_status(self, session: Session, exc: BridgeError) -> None:
        notice = BridgeMessage(
            "publish",
            "/status",
            {"error": str(exc), "kind": type(exc).__name__},
        )
        await self.send(session, notice)

    async def fan_out(
        self, topic: str, payload: dict[str, Any], exclude: int | None = None
    ) -> None:
        message = BridgeMessage("publish", topic, payload)
        for sid in self.table.route(message):
            if sid == exclude:
                continue
            receiver = self.sessions.get(sid)
            if receiver is not None:
                await self.send(receiver, message)

    async def drive(self) -> None:
        """Tick the control loop forever at the configured period."""
        try:
            while True:
                self.loop.tick()
                for topic, payload in self.loop.take_outbox():
                    await self.fan_out(topic, payload)
                await asyncio.sleep(self.config.dt)
        except asyncio.CancelledError:
            raise


async def _sender(session: Session) -> None:
    while True:
        text = await session.outbox.get()
        await session.websocket.send_text(text)


def build_app(config: ServerConfig, loop: ControlLoop | None = None) -> FastAPI:
    """Assemble the application: websocket endpoint, health route, static UI."""
    control = loop if loop is not None else ControlLoop(config)
    if config.log_path:
        sink = open(config.log_path, "a", encoding="utf-8")
    else:
        sink = io.StringIO()
    log = MessageLog(sink)
    server = BridgeServer(config, control, log)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(server.drive())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            log.close()

    app = FastAPI(lifespan=lifespan)
    app.state.bridge = server

    @app.get("/healthz")
    async def healthz() -> JSONResponse:
        return JSONResponse(
            {
                "sessions": len(server.sessions),
                "handled": log.records_written,
                "log_failed": log.failed,
                "tick": control.total_ticks,
            }
        )

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        session = server.new_session(websocket)
        sender = asyncio.create_task(_sender(session))
        try:
            while True:
                text = await websocket.receive_text()
                await server.handle_inbound(session, text)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
            server.drop_session(session)

    web_dir = Path(__file__).parent / "web"
    if (web_dir / "index.html").exists():
        app.mount("/", StaticFiles(directory=web_dir, html=True), name="ui")
    else:

        @app.get("/")
        async def root() -> JSONResponse:
            return JSONResponse({"service": "sharednav", "websocket": "/ws"})

    return app


def port_available(host: str, port: int) -> bool:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError:
        return False
    finally:
        probe.close()
    return True


def run_server(config: ServerConfig) -> int:
    """Serve until interrupted. Returns a process exit code."""
    import uvicorn

    if not port_available(config.host, config.port):
        print(f"cannot bind {config.host}:{config.port}", file=sys.stderr)
        return 2
    app = build_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    except KeyboardInterrupt:
        pass
    return 0
