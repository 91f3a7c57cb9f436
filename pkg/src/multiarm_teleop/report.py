"""Telemetry reporting: render figures and a delimited summary from a
telemetry JSON-lines log."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .runner import read_jsonl  # noqa: E402


def _group_by_arm(records: list[dict]) -> dict[int, list[dict]]:
    by_arm: dict[int, list[dict]] = defaultdict(list)
    for rec in records:
        if rec.get("type") == "arm":
            by_arm[rec["arm"]].append(rec)
    return dict(sorted(by_arm.items()))


def write_summary_csv(records: list[dict], path: Path):
    """Per-arm per-tick summary rows (delimited output for downstream tools)."""
    by_arm = _group_by_arm(records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "arm", "x", "y", "z", "des_x", "des_y", "des_z",
                        "err_norm", "k_l", "k_w", "modality", "frozen", "alpha",
                         "gripper", "saturated"])
        for arm, recs in by_arm.items():
            for r in recs:
                err = np.linalg.norm(r["err"][:3])
                writer.writerow([
                    r["time"], arm,
                    *[f"{v:.6f}" for v in r["ee"]["pos"]],
                    *[f"{v:.6f}" for v in r["desired"]["pos"]],
                    f"{err:.6e}", r["k_l"], r["k_w"],
                    r["modality"] or "", int(bool(r["frozen"])), r["alpha"],
                    int(bool(r["gripper"])), int(bool(r["saturated"]))])


def plot_trajectories(records: list[dict], path: Path):
    by_arm = _group_by_arm(records)
    fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
    labels = ["x [m]", "y [m]", "z [m]"]
    for arm, recs in by_arm.items():
        t = [r["time"] for r in recs]
        ee = np.array([r["ee"]["pos"] for r in recs])
        des = np.array([r["desired"]["pos"] for r in recs])
        for i, ax in enumerate(axes):
            line, = ax.plot(t, ee[:, i], label=f"arm {arm}")
            ax.plot(t, des[:, i], "--", color=line.get_color(), alpha=0.6)
    for i, ax in enumerate(axes):
        ax.set_ylabel(labels[i])
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="upper right", ncol=4, fontsize=8)
    axes[0].set_title("End-effector positions (solid: actual, dashed: reference)")
    axes[-1].set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_stiffness(records: list[dict], path: Path):
    by_arm = _group_by_arm(records)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
    for arm, recs in by_arm.items():
        t = [r["time"] for r in recs]
        ax1.plot(t, [r["k_l"] for r in recs], label=f"arm {arm}")
        ax2.plot(t, [r["k_w"] for r in recs])
    ax1.set_ylabel("k_l [N/m]")
    ax2.set_ylabel("k_w [Nm/rad]")
    ax2.set_xlabel("time [s]")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    ax1.legend(loc="upper right", ncol=4, fontsize=8)
    ax1.set_title("Commanded stiffness")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_tracking_error(records: list[dict], path: Path):
    by_arm = _group_by_arm(records)
    fig, ax = plt.subplots(figsize=(9, 4))
    for arm, recs in by_arm.items():
        t = [r["time"] for r in recs]
        ax.plot(t, [float(np.linalg.norm(r["err"][:3])) for r in recs],
                label=f"arm {arm}")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("position error norm [m]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", ncol=4, fontsize=8)
    ax.set_title("Cartesian tracking error")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def generate_report(telemetry_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render all figures plus the CSV summary; returns the written paths."""
    records = read_jsonl(telemetry_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out / "summary.csv"
    write_summary_csv(records, csv_path)
    written.append(csv_path)
    for name, fn in (("trajectories.png", plot_trajectories),
                     ("stiffness.png", plot_stiffness),
                     ("tracking_error.png", plot_tracking_error)):
        p = out / name
        fn(records, p)
        written.append(p)
    return written
