"""Offline execution: run a scenario against a scripted or recorded command
stream at logical timestamps, producing a deterministic telemetry log."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .engine import TeleopEngine
from .protocol import ButtonMsg, HandPoseMsg, ProtocolError, dumps, parse_message
from .scenario import Scenario


@dataclass
class ReplayResult:
    ticks: int
    messages_consumed: int
    truncated: bool
    faults: list[str]


def apply_message(engine: TeleopEngine, msg: HandPoseMsg | ButtonMsg):
    if isinstance(msg, HandPoseMsg):
        engine.ingest_hand(msg.hand, msg.pose, msg.s_a, timestamp=msg.t)
    else:
        engine.ingest_button(msg.hand, msg.button, msg.edge, msg.robot)


def run_stream(engine: TeleopEngine,
               messages: Iterable[HandPoseMsg | ButtonMsg],
               duration: float | None = None,
               on_tick: Callable[[TeleopEngine], None] | None = None) -> int:
    """Drive the engine with timestamped messages.

    Each message is applied once the loop clock reaches its timestamp;
    within a tick boundary messages keep their arrival order. Runs until
    ``duration`` (or the last message time) is reached; returns tick count.
    """
    queue = list(messages)
    end = duration
    if end is None:
        end = max((m.t for m in queue), default=0.0) + engine.scenario.dt
    idx = 0
    while engine.time < end - 1e-12:
        while idx < len(queue) and queue[idx].t <= engine.time + 1e-12:
            apply_message(engine, queue[idx])
            idx += 1
        engine.tick()
        if on_tick is not None:
            on_tick(engine)
    while idx < len(queue):
        apply_message(engine, queue[idx])
        idx += 1
    return engine.tick_index


def read_log(path: str | Path) -> tuple[list[HandPoseMsg | ButtonMsg], bool]:
    """Parse a recorded JSONL command log.

    Returns (messages, truncated); a malformed or cut-off trailing line stops
    parsing and marks the log truncated.
    """
    messages: list[HandPoseMsg | ButtonMsg] = []
    truncated = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                messages.append(parse_message(line))
            except ProtocolError:
                truncated = True
                break
    return messages, truncated


def replay(scenario: Scenario, log_path: str | Path,
           out_path: str | Path | None = None,
           duration: float | None = None) -> ReplayResult:
    """Re-run a recorded session through the live code path.

    Telemetry is written as JSON-lines (one object per tick per arm, plus
    one per carried object) when ``out_path`` is given.
    """
    messages, truncated = read_log(log_path)
    engine = TeleopEngine(scenario)
    sink = open(out_path, "w") if out_path is not None else None
    try:
        def emit(eng: TeleopEngine):
            if sink is not None:
                for rec in eng.telemetry_records():
                    sink.write(dumps(rec) + "\n")

        ticks = run_stream(engine, messages, duration=duration, on_tick=emit)
    finally:
        if sink is not None:
            sink.close()
    return ReplayResult(ticks=ticks, messages_consumed=len(messages),
                        truncated=truncated, faults=list(engine.warnings))


class Recorder:
    """Appends every inbound wire message to a JSONL file as it arrives."""

    def __init__(self, path: str | Path):
        self._fh = open(path, "w")

    def record(self, raw: dict):
        self._fh.write(dumps(raw) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


def collect_telemetry(engine: TeleopEngine,
                      messages: Iterable[HandPoseMsg | ButtonMsg],
                      duration: float | None = None) -> list[dict]:
    """Convenience wrapper: run and return all telemetry records in memory."""
    records: list[dict] = []
    run_stream(engine, messages, duration=duration,
               on_tick=lambda eng: records.extend(eng.telemetry_records()))
    return records


def write_jsonl(records: Iterable[dict], path: str | Path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
