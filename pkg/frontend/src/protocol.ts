/**
 * Wire protocol schemas (zod) and message builders.
 *
 * Mirrors the server protocol: every message carries a `{v, type, seq, t}`
 * envelope. The cockpit sends `hand_pose` and `button`; it receives
 * `hello`, `snapshot`, `ack` and `error`.
 */
import { z } from "zod";

export const PROTOCOL_VERSION = 1;

export type HandSide = "left" | "right";

const vec3 = z.tuple([z.number(), z.number(), z.number()]);
const quatWxyz = z.tuple([z.number(), z.number(), z.number(), z.number()]);

export const poseSchema = z.object({
  pos: vec3,
  quat: quatWxyz,
});
export type WirePose = z.infer<typeof poseSchema>;

const envelopeFields = {
  v: z.literal(PROTOCOL_VERSION),
  seq: z.number().int(),
  t: z.number(),
};

export const helloSchema = z.object({
  ...envelopeFields,
  type: z.literal("hello"),
  scenario: z.string(),
  snapshot_rate: z.number(),
  arms: z.array(
    z.object({
      id: z.number().int(),
      dh: z.array(
        z.object({
          a: z.number(),
          d: z.number(),
          alpha: z.number(),
          theta0: z.number(),
        }),
      ),
      base: z.object({ xyz: vec3, quat: quatWxyz }),
      flange: z.object({ xyz: vec3, quat: quatWxyz }),
      q0: z.array(z.number()),
    }),
  ),
});
export type Hello = z.infer<typeof helloSchema>;

export const panelEntrySchema = z.object({
  robot: z.number().int(),
  modality: z.string(),
  frozen: z.boolean(),
});
export type PanelEntry = z.infer<typeof panelEntrySchema>;

export const sessionPanelsSchema = z.object({
  left: z.array(panelEntrySchema),
  right: z.array(panelEntrySchema),
});
export type SessionPanels = z.infer<typeof sessionPanelsSchema>;

export const snapshotSchema = z.object({
  ...envelopeFields,
  type: z.literal("snapshot"),
  tick: z.number().int(),
  time: z.number(),
  robots: z.array(
    z.object({
      id: z.number().int(),
      q: z.array(z.number()),
      ee: poseSchema,
      desired: poseSchema,
      k_l: z.number(),
      k_w: z.number(),
      gripper: z.boolean(),
      modality: z.string().nullable(),
      owner: z.string().nullable(),
      frozen: z.boolean(),
      alpha: z.number(),
      vframe: poseSchema.nullable(),
    }),
  ),
  session: sessionPanelsSchema,
  objects: z.array(
    z.object({ id: z.string(), pose: poseSchema, attached: z.boolean() }),
  ),
});
export type Snapshot = z.infer<typeof snapshotSchema>;

export const ackSchema = z.object({
  ...envelopeFields,
  type: z.literal("ack"),
  seq_ack: z.number().int(),
  session: sessionPanelsSchema,
});
export type Ack = z.infer<typeof ackSchema>;

export const errorSchema = z.object({
  ...envelopeFields,
  type: z.literal("error"),
  message: z.string(),
});
export type ErrorMsg = z.infer<typeof errorSchema>;

export const serverMessageSchema = z.discriminatedUnion("type", [
  helloSchema,
  snapshotSchema,
  ackSchema,
  errorSchema,
]);
export type ServerMessage = z.infer<typeof serverMessageSchema>;

export function parseServerMessage(text: string): ServerMessage {
  return serverMessageSchema.parse(JSON.parse(text));
}

export interface HandPoseOut {
  v: number;
  type: "hand_pose";
  seq: number;
  t: number;
  hand: HandSide;
  position: [number, number, number];
  orientation: [number, number, number, number]; // (w, x, y, z)
  s_a: number;
}

export function handPoseMessage(
  seq: number,
  t: number,
  hand: HandSide,
  position: [number, number, number],
  orientation: [number, number, number, number],
  sA: number,
): HandPoseOut {
  return {
    v: PROTOCOL_VERSION,
    type: "hand_pose",
    seq,
    t,
    hand,
    position,
    orientation,
    s_a: sA,
  };
}

export type ButtonName =
  | "s"
  | "f"
  | "trigger"
  | "close_inc"
  | "close_dec"
  | `rb${number}`;

export interface ButtonOut {
  v: number;
  type: "button";
  seq: number;
  t: number;
  hand: HandSide;
  button: string;
  edge: "press" | "release";
}

export function buttonMessage(
  seq: number,
  t: number,
  hand: HandSide,
  button: ButtonName,
  edge: "press" | "release",
): ButtonOut {
  return { v: PROTOCOL_VERSION, type: "button", seq, t, hand, button, edge };
}
