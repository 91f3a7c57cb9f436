import { describe, expect, it } from "vitest";

import {
  buttonMessage,
  handPoseMessage,
  parseServerMessage,
  PROTOCOL_VERSION,
} from "../src/protocol";

const pose = { pos: [0.1, 0.2, 0.3], quat: [1, 0, 0, 0] };

function snapshotFrame(overrides: Record<string, unknown> = {}) {
  return JSON.stringify({
    v: 1,
    type: "snapshot",
    seq: 5,
    t: 0.25,
    tick: 250,
    time: 0.25,
    robots: [
      {
        id: 1,
        q: [0, 0.7, 0, 1.4, 0, 0.7, 0],
        ee: pose,
        desired: pose,
        k_l: 350,
        k_w: 35,
        gripper: false,
        modality: "ic",
        owner: "left",
        frozen: false,
        alpha: 1.0,
        vframe: null,
      },
    ],
    session: { left: [{ robot: 1, modality: "ic", frozen: false }], right: [] },
    objects: [],
    ...overrides,
  });
}

describe("server message parsing", () => {
  it("accepts a well-formed snapshot", () => {
    const msg = parseServerMessage(snapshotFrame());
    expect(msg.type).toBe("snapshot");
    if (msg.type === "snapshot") {
      expect(msg.robots[0].modality).toBe("ic");
      expect(msg.session.left[0].robot).toBe(1);
    }
  });

  it("accepts hello, ack and error frames", () => {
    const hello = parseServerMessage(
      JSON.stringify({
        v: 1,
        type: "hello",
        seq: 1,
        t: 0,
        scenario: "test",
        snapshot_rate: 60,
        arms: [
          {
            id: 1,
            dh: [{ a: 0, d: 0.3, alpha: 0, theta0: 0 }],
            base: { xyz: [0, 0, 0], quat: [1, 0, 0, 0] },
            flange: { xyz: [0, 0, 0.1], quat: [1, 0, 0, 0] },
            q0: [0],
          },
        ],
      }),
    );
    expect(hello.type).toBe("hello");

    const ack = parseServerMessage(
      JSON.stringify({
        v: 1,
        type: "ack",
        seq: 2,
        t: 0.1,
        seq_ack: 7,
        session: { left: [], right: [] },
      }),
    );
    expect(ack.type).toBe("ack");

    const err = parseServerMessage(
      JSON.stringify({ v: 1, type: "error", seq: 3, t: 0.1, message: "bad" }),
    );
    expect(err.type).toBe("error");
  });

  it("rejects wrong version, unknown type and missing fields", () => {
    expect(() => parseServerMessage(snapshotFrame({ v: 2 }))).toThrow();
    expect(() =>
      parseServerMessage(JSON.stringify({ v: 1, type: "mystery", seq: 1, t: 0 })),
    ).toThrow();
    expect(() => parseServerMessage(snapshotFrame({ session: undefined }))).toThrow();
    expect(() => parseServerMessage("not json")).toThrow();
  });
});

describe("outbound builders", () => {
  it("builds hand_pose frames the server schema accepts", () => {
    const msg = handPoseMessage(3, 1.5, "right", [0.1, 0.2, 0.3], [1, 0, 0, 0], 0.8);
    expect(msg).toEqual({
      v: PROTOCOL_VERSION,
      type: "hand_pose",
      seq: 3,
      t: 1.5,
      hand: "right",
      position: [0.1, 0.2, 0.3],
      orientation: [1, 0, 0, 0],
      s_a: 0.8,
    });
  });

  it("builds button frames with edges", () => {
    const msg = buttonMessage(9, 0.2, "left", "rb3", "press");
    expect(msg.button).toBe("rb3");
    expect(msg.edge).toBe("press");
  });
});
