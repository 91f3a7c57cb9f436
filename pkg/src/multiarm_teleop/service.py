"""WebSocket service: streams operator commands in, state snapshots out.

All state mutation happens inside a single asyncio control-loop task;
connections only enqueue parsed messages. Snapshot broadcast uses per-client
drop-oldest queues so a stalled consumer never delays the loop.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time as wall

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .engine import TeleopEngine
from .protocol import (ProtocolError, dumps, envelope, parse_message)
from .runner import Recorder, apply_message
from .scenario import Scenario, _pose_to_dict


class _Client:
    _ids = 0

    def __init__(self, maxsize: int = 8):
        _Client._ids += 1
        self.id = _Client._ids
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=maxsize)

    def push(self, text: str):
        """Drop-oldest enqueue; never blocks the control loop."""
        while True:
            try:
                self.queue.put_nowait(text)
                return
            except asyncio.QueueFull:
                with contextlib.suppress(asyncio.QueueEmpty):
                    self.queue.get_nowait()


class TeleopService:
    def __init__(self, scenario: Scenario, snapshot_rate: float = 60.0,
                 record_path: str | None = None, realtime: bool = True):
        self.scenario = scenario
        self.engine = TeleopEngine(scenario)
        self.clients: dict[int, _Client] = {}
        self.commands: asyncio.Queue = asyncio.Queue()
        self.decimation = max(1, round(1.0 / (snapshot_rate * scenario.dt)))
        self.recorder = Recorder(record_path) if record_path else None
        self.realtime = realtime
        self._seq = 0
        self._stop = asyncio.Event()

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def hello(self) -> dict:
        arms = []
        for arm in self.scenario.arms:
            arms.append({
                "id": arm.robot_id,
                "dh": [{"a": r.a, "d": r.d, "alpha": r.alpha, "theta0": r.theta0}
                       for r in arm.model.dh],
                "flange": _pose_to_dict(arm.model.flange),
                "base": _pose_to_dict(arm.model.base_pose),
                "q0": [float(v) for v in arm.q0],
            })
        return envelope("hello", self._next_seq(), self.engine.time, {
            "scenario": self.scenario.name,
            "arms": arms,
            "snapshot_rate": 1.0 / (self.decimation * self.scenario.dt),
        })

    def broadcast(self, text: str):
        for client in self.clients.values():
            client.push(text)

    async def control_loop(self):
        """Fixed-rate engine loop; commands are applied between ticks."""
        dt = self.scenario.dt
        next_deadline = wall.monotonic()
        while not self._stop.is_set():
            while True:
                try:
                    raw, msg = self.commands.get_nowait()
                except asyncio.QueueEmpty:
                    break
                # stamp with loop time so a recorded log replays identically
                msg.t = self.engine.time
                raw["t"] = self.engine.time
                if self.recorder is not None:
                    self.recorder.record(raw)
                apply_message(self.engine, msg)
            self.engine.tick()
            if self.engine.tick_index % self.decimation == 0:
                snap = envelope("snapshot", self._next_seq(), self.engine.time,
                                self.engine.snapshot())
                self.broadcast(dumps(snap))
            if self.realtime:
                next_deadline += dt
                delay = next_deadline - wall.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_deadline = wall.monotonic()  # fell behind; resync
                    await asyncio.sleep(0)
            else:
                await asyncio.sleep(0)

    def stop(self):
        self._stop.set()
        if self.recorder is not None:
            self.recorder.close()


def create_app(scenario: Scenario, snapshot_rate: float = 60.0,
               record_path: str | None = None, realtime: bool = True) -> FastAPI:
    app = FastAPI(title="multiarm-teleop")
    service = TeleopService(scenario, snapshot_rate=snapshot_rate,
                            record_path=record_path, realtime=realtime)
    app.state.service = service

    @app.on_event("startup")
    async def _start():
        app.state.loop_task = asyncio.create_task(service.control_loop())

    @app.on_event("shutdown")
    async def _shutdown():
        service.stop()
        task = getattr(app.state, "loop_task", None)
        if task is not None:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "tick": service.engine.tick_index}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        client = _Client()
        service.clients[client.id] = client
        await ws.send_text(dumps(service.hello()))

        async def sender():
            while True:
                await ws.send_text(await client.queue.get())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw_text = await ws.receive_text()
                try:
                    try:
                        raw = json.loads(raw_text)
                    except json.JSONDecodeError as exc:
                        raise ProtocolError(f"invalid JSON: {exc}") from exc
                    msg = parse_message(raw)
                except ProtocolError as exc:
                    client.push(dumps(envelope(
                        "error", service._next_seq(), service.engine.time,
                        {"message": str(exc)})))
                    continue
                await service.commands.put((raw, msg))
                if getattr(msg, "button", None) is not None:
                    # acknowledge session commands with the resulting panels,
                    # after the loop has applied everything queued so far
                    tick0 = service.engine.tick_index
                    while (not service.commands.empty()
                           or service.engine.tick_index <= tick0):
                        await asyncio.sleep(0.001 if service.realtime else 0)
                    client.push(dumps(envelope(
                        "ack", service._next_seq(), service.engine.time,
                        {"seq_ack": msg.seq,
                         "session": service.engine.session.gui_projection().to_dict()})))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            service.clients.pop(client.id, None)

    return app
