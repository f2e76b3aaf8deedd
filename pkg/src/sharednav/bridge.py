"""Wire protocol: JSON envelopes over websockets, topic routing, and the
session log.

Envelopes carry an op (advertise, subscribe, unsubscribe, publish), a topic,
and for publishes a payload validated against the topic's schema.  Encoding
is canonical (sorted keys, no whitespace) so identical messages compare equal
as text.  The log writes one JSON record per line and flushes every 100
records or every second, whichever comes first.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, IO

OPS = ("advertise", "subscribe", "unsubscribe", "publish")

INBOUND_TOPICS = ("/cmd_vel", "/goal", "/cancel_goal", "/set_speed")
OUTBOUND_TOPICS = ("/map", "/robot_pose", "/plan", "/mode_state")

FLUSH_EVERY_RECORDS = 100
FLUSH_EVERY_SECONDS = 1.0


class BridgeError(ValueError):
    """Base class for protocol faults."""


class MalformedEnvelope(BridgeError):
    """Not valid JSON, or missing required envelope fields."""


class UnknownOp(BridgeError):
    """The envelope op is not one of the protocol's four."""


class SchemaViolation(BridgeError):
    """A publish payload does not match its topic's schema."""


class SinkFailure(RuntimeError):
    """The log sink stopped accepting writes."""


@dataclass(frozen=True)
class BridgeMessage:
    op: str
    topic: str
    msg: dict[str, Any] | None = None
    id: str | None = None


def _is_number(value: Any) -> bool:
    # bool is an int subclass; the wire treats them as distinct types
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check(condition: bool, topic: str, detail: str) -> None:
    if not condition:
        raise SchemaViolation(f"{topic}: {detail}")


def _validate_cmd_vel(topic: str, msg: dict[str, Any]) -> None:
    _check(_is_number(msg.get("v")), topic, "v must be a finite number")
    _check(_is_number(msg.get("omega")), topic, "omega must be a finite number")
    for opt in ("pull", "bearing"):
        if opt in msg:
            _check(_is_number(msg[opt]), topic, f"{opt} must be a finite number")
    if "pull" in msg:
        _check(0.0 <= msg["pull"] <= 1.0, topic, "pull must lie in [0, 1]")


def _validate_goal(topic: str, msg: dict[str, Any]) -> None:
    for key in ("x", "y", "theta"):
        _check(_is_number(msg.get(key)), topic, f"{key} must be a finite number")


def _validate_empty(topic: str, msg: dict[str, Any]) -> None:
    _check(msg == {}, topic, "payload must be empty")


def _validate_set_speed(topic: str, msg: dict[str, Any]) -> None:
    _check(msg.get("target") in ("linear", "angular"), topic, "target must be linear or angular")
    _check(msg.get("direction") in ("up", "down"), topic, "direction must be up or down")


def _validate_map(topic: str, msg: dict[str, Any]) -> None:
    _check(isinstance(msg.get("width"), int) and not isinstance(msg.get("width"), bool), topic, "width must be an int")
    _check(isinstance(msg.get("height"), int) and not isinstance(msg.get("height"), bool), topic, "height must be an int")
    _check(_is_number(msg.get("resolution")) and msg["resolution"] > 0, topic, "resolution must be positive")
    cells = msg.get("cells")
    _check(isinstance(cells, str), topic, "cells must be a string of 0/1")
    _check(set(cells) <= {"0", "1"}, topic, "cells must contain only 0 and 1")
    _check(len(cells) == msg["width"] * msg["height"], topic, "cells length must be width*height")


def _validate_robot_pose(topic: str, msg: dict[str, Any]) -> None:
    for key in ("x", "y", "theta"):
        _check(_is_number(msg.get(key)), topic, f"{key} must be a finite number")
    _check(isinstance(msg.get("tick"), int) and not isinstance(msg.get("tick"), bool) and msg["tick"] >= 0,
           topic, "tick must be a non-negative int")
    _check(isinstance(msg.get("collided"), bool), topic, "collided must be a bool")


def _validate_plan(topic: str, msg: dict[str, Any]) -> None:
    modes = msg.get("modes")
    _check(isinstance(modes, list), topic, "modes must be a list")
    for entry in modes:
        _check(isinstance(entry, dict), topic, "each mode must be an object")
        _check(isinstance(entry.get("id"), int) and not isinstance(entry.get("id"), bool), topic, "mode id must be an int")
        _check(isinstance(entry.get("label"), str), topic, "mode label must be a string")
        _check(_is_number(entry.get("cost")) and entry["cost"] >= 0, topic, "mode cost must be non-negative")
        waypoints = entry.get("waypoints")
        _check(isinstance(waypoints, list) and len(waypoints) >= 1, topic, "waypoints must be a non-empty list")
        for wp in waypoints:
            _check(
                isinstance(wp, list) and len(wp) == 2 and all(_is_number(c) for c in wp),
                topic,
                "each waypoint must be [x, y]",
            )
    chosen = msg.get("chosen_id")
    _check(chosen is None or (isinstance(chosen, int) and not isinstance(chosen, bool)), topic, "chosen_id must be an int or null")
    if isinstance(chosen, int) and modes:
        _check(any(entry["id"] == chosen for entry in modes), topic, "chosen_id must name a listed mode")


def _validate_mode_state(topic: str, msg: dict[str, Any]) -> None:
    probs = msg.get("alpha_probs")
    _check(isinstance(probs, list) and len(probs) == 5, topic, "alpha_probs must list 5 numbers")
    _check(all(_is_number(p) and 0.0 <= p <= 1.0 for p in probs), topic, "alpha_probs must lie in [0, 1]")
    _check(abs(sum(probs) - 1.0) <= 1e-6, topic, "alpha_probs must sum to 1")
    m_h = msg.get("m_h")
    _check(m_h is None or (isinstance(m_h, int) and not isinstance(m_h, bool)), topic, "m_h must be an int or null")
    m_r = msg.get("m_r")
    _check(m_r is None or (isinstance(m_r, int) and not isinstance(m_r, bool)), topic, "m_r must be an int or null")
    _check(isinstance(msg.get("state"), str), topic, "state must be a string")
    limits = msg.get("limits")
    _check(isinstance(limits, dict), topic, "limits must be an object")
    _check(_is_number(limits.get("v_max")) and _is_number(limits.get("omega_max")),
           topic, "limits must carry v_max and omega_max")


TOPIC_VALIDATORS: dict[str, Callable[[str, dict[str, Any]], None]] = {
    "/cmd_vel": _validate_cmd_vel,
    "/goal": _validate_goal,
    "/cancel_goal": _validate_empty,
    "/set_speed": _validate_set_speed,
    "/map": _validate_map,
    "/robot_pose": _validate_robot_pose,
    "/plan": _validate_plan,
    "/mode_state": _validate_mode_state,
}


def decode_message(text: str | bytes) -> BridgeMessage:
    """Parse and validate one wire envelope."""
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedEnvelope(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise MalformedEnvelope("envelope must be a JSON object")
    op = raw.get("op")
    if not isinstance(op, str):
        raise MalformedEnvelope("envelope must carry an op string")
    if op not in OPS:
        raise UnknownOp(op)
    topic = raw.get("topic")
    if not isinstance(topic, str) or not topic.startswith("/"):
        raise MalformedEnvelope("envelope must carry a /topic string")
    msg_id = raw.get("id")
    if msg_id is not None and not isinstance(msg_id, str):
        raise MalformedEnvelope("id must be a string when present")
    msg = raw.get("msg")
    if op == "publish":
        if not isinstance(msg, dict):
            raise MalformedEnvelope("publish requires a msg object")
        validator = TOPIC_VALIDATORS.get(topic)
        if validator is not None:
            validator(topic, msg)
    elif msg is not None:
        raise MalformedEnvelope(f"{op} must not carry a msg")
    return BridgeMessage(op=op, topic=topic, msg=msg, id=msg_id)


def encode_message(message: BridgeMessage) -> str:
    """Canonical JSON for one envelope (sorted keys, compact separators)."""
    if message.op not in OPS:
        raise UnknownOp(message.op)
    raw: dict[str, Any] = {"op": message.op, "topic": message.topic}
    if message.msg is not None:
        raw["msg"] = message.msg
    if message.id is not None:
        raw["id"] = message.id
    return json.dumps(raw, sort_keys=True, separators=(",", ":"))


class SubscriptionTable:
    """Which sessions receive which topics."""

    def __init__(self) -> None:
        self._subs: dict[str, set[int]] = {}

    def subscribe(self, session: int, topic: str) -> None:
        self._subs.setdefault(topic, set()).add(session)

    def unsubscribe(self, session: int, topic: str) -> None:
        self._subs.get(topic, set()).discard(session)

    def drop_session(self, session: int) -> None:
        for members in self._subs.values():
            members.discard(session)

    def subscribers(self, topic: str) -> tuple[int, ...]:
        return tuple(sorted(self._subs.get(topic, ())))

    def route(self, message: BridgeMessage) -> tuple[int, ...]:
        if message.op != "publish":
            return ()
        return self.subscribers(message.topic)


@dataclass(frozen=True)
class LogRecord:
    stamp_ms: int
    dir: str
    session: int
    msg: BridgeMessage

    def to_json(self) -> str:
        envelope = json.loads(encode_message(self.msg))
        return json.dumps(
            {"stamp_ms": self.stamp_ms, "dir": self.dir, "session": self.session, "msg": envelope},
            sort_keys=True,
            separators=(",", ":"),
        )


class MessageLog:
    """JSON-lines session log with bounded buffering.

    Records are flushed to the sink after FLUSH_EVERY_RECORDS appends or once
    FLUSH_EVERY_SECONDS has passed since the previous flush.  A sink that
    raises marks the log failed; later appends raise SinkFailure.
    """

    def __init__(self, sink: IO[str], clock: Callable[[], float] = time.monotonic):
        self._sink = sink
        self._clock = clock
        self._pending = 0
        self._last_flush = clock()
        self._records_written = 0
        self.failed = False

    @property
    def records_written(self) -> int:
        return self._records_written

    def append(self, record: LogRecord) -> None:
        if self.failed:
            raise SinkFailure("log sink already failed")
        try:
            self._sink.write(record.to_json() + "\n")
        except OSError as exc:
            self.failed = True
            raise SinkFailure(str(exc)) from exc
        self._records_written += 1
        self._pending += 1
        now = self._clock()
        if self._pending >= FLUSH_EVERY_RECORDS or now - self._last_flush >= FLUSH_EVERY_SECONDS:
            self.flush()

    def flush(self) -> None:
        if self.failed:
            return
        try:
            self._sink.flush()
        except OSError as exc:
            self.failed = True
            raise SinkFailure(str(exc)) from exc
        self._pending = 0
        self._last_flush = self._clock()

    def close(self) -> None:
        if not self.failed:
            self.flush()
