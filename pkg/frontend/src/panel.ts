/**
 * Server-authoritative session model for the cockpit.
 *
 * Everything rendered in the assignment panels comes from the latest
 * server snapshot (or a button ack); the model never echoes local input.
 */
import type { HandSide, SessionPanels, Snapshot } from "./protocol";

export interface RobotChip {
  robot: number;
  modality: string;
  frozen: boolean;
}

export type ConnectionState = "connecting" | "live" | "stale" | "closed";

export interface UiSessionModel {
  tick: number;
  time: number;
  panels: { left: RobotChip[]; right: RobotChip[] };
  connection: ConnectionState;
  inputMode: "mouse" | "gamepad";
}

export const STALE_AFTER_MS = 500;

export class SessionModelStore {
  private model: UiSessionModel = {
    tick: -1,
    time: 0,
    panels: { left: [], right: [] },
    connection: "connecting",
    inputMode: "mouse",
  };
  private lastSnapshotAt = 0;

  get(): UiSessionModel {
    return this.model;
  }

  panel(hand: HandSide): RobotChip[] {
    return this.model.panels[hand];
  }

  applySnapshot(snapshot: Snapshot, nowMs: number): void {
    this.lastSnapshotAt = nowMs;
    this.model = {
      ...this.model,
      tick: snapshot.tick,
      time: snapshot.time,
      panels: panelsFromWire(snapshot.session),
      connection: "live",
    };
  }

  /** Acks arrive between snapshots; panels update, the clock does not. */
  applyPanels(panels: SessionPanels): void {
    this.model = { ...this.model, panels: panelsFromWire(panels) };
  }

  /** Call from the render loop; flips the stale banner after a gap. */
  refresh(nowMs: number): void {
    if (this.model.connection === "closed") return;
    if (
      this.model.connection === "live" &&
      nowMs - this.lastSnapshotAt > STALE_AFTER_MS
    ) {
      this.model = { ...this.model, connection: "stale" };
    }
  }

  markClosed(): void {
    this.model = { ...this.model, connection: "closed" };
  }

  setInputMode(mode: "mouse" | "gamepad"): void {
    this.model = { ...this.model, inputMode: mode };
  }
}

function panelsFromWire(session: SessionPanels): {
  left: RobotChip[];
  right: RobotChip[];
} {
  const convert = (entries: SessionPanels["left"]): RobotChip[] =>
    entries.map((e) => ({
      robot: e.robot,
      modality: e.modality,
      frozen: e.frozen,
    }));
  return { left: convert(session.left), right: convert(session.right) };
}

/** Stable text form used by tests and the debug overlay. */
export function describePanels(panels: {
  left: RobotChip[];
  right: RobotChip[];
}): string {
  const side = (chips: RobotChip[]) =>
    chips
      .map((c) => `R${c.robot}:${c.modality}${c.frozen ? ":frozen" : ""}`)
      .join(",");
  return `L[${side(panels.left)}] R[${side(panels.right)}]`;
}
