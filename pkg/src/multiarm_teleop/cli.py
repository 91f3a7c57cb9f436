"""Command line entry point.

Exit codes: 0 ok, 1 configuration error, 2 runtime fault.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
import yaml

from .scenario import (ConfigError, default_scenario_dict, load_scenario)


@click.group()
def main():
    """Reconfigurable multi-arm telemanipulation engine."""


def _load(scenario_path: str | None):
    try:
        if scenario_path is None:
            from .scenario import default_scenario
            return default_scenario()
        return load_scenario(scenario_path)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None, help="Scenario YAML (default: built-in four-arm).")
@click.option("--port", default=8720, show_default=True,
              help="TCP port (env MULTIARM_TELEOP_PORT overrides).")
@click.option("--rate", default=60.0, show_default=True,
              help="Snapshot broadcast rate [Hz].")
@click.option("--record", "record_path", type=click.Path(), default=None,
              help="Record inbound commands to this JSONL file.")
def serve(scenario_path, port, rate, record_path):
    """Run the live WebSocket service."""
    scenario = _load(scenario_path)
    port = int(os.environ.get("MULTIARM_TELEOP_PORT", port))
    try:
        import uvicorn

        from .service import create_app
        app = create_app(scenario, snapshot_rate=rate, record_path=record_path)
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    except Exception as exc:  # surfaced as a runtime fault
        click.echo(f"runtime fault: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None)
@click.option("--log", "log_path", type=click.Path(exists=True), required=True,
              help="Recorded command log (JSONL).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Telemetry output (JSONL).")
@click.option("--duration", type=float, default=None,
              help="Simulated seconds to run (default: until last message).")
def replay(scenario_path, log_path, out_path, duration):
    """Replay a recorded session deterministically."""
    scenario = _load(scenario_path)
    from .runner import replay as run_replay
    try:
        result = run_replay(scenario, log_path, out_path, duration=duration)
    except Exception as exc:
        click.echo(f"runtime fault: {exc}", err=True)
        sys.exit(2)
    click.echo(f"replayed {result.messages_consumed} messages over "
               f"{result.ticks} ticks"
               + (" (log truncated)" if result.truncated else ""))
    sys.exit(2 if result.truncated else 0)


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None)
def check(scenario_path):
    """Validate a scenario file."""
    scenario = _load(scenario_path)
    click.echo(f"ok: {scenario.name}: {len(scenario.arms)} arms, "
               f"dt={scenario.dt} s, {len(scenario.objects)} objects")


@main.command()
@click.option("--telemetry", type=click.Path(exists=True), required=True,
              help="Telemetry JSONL produced by replay.")
@click.option("--out", "out_dir", type=click.Path(), default="report",
              show_default=True)
def report(telemetry, out_dir):
    """Render figures and a CSV summary from a telemetry log."""
    from .report import generate_report
    try:
        written = generate_report(telemetry, out_dir)
    except Exception as exc:
        click.echo(f"runtime fault: {exc}", err=True)
        sys.exit(2)
    for p in written:
        click.echo(str(p))


@main.command("init-scenario")
@click.argument("path", type=click.Path())
def init_scenario(path):
    """Write the default four-arm scenario to PATH."""
    with open(path, "w") as fh:
        yaml.safe_dump(default_scenario_dict(), fh, sort_keys=False)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
