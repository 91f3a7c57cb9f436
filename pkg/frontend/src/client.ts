/**
 * WebSocket client for the teleop service.
 *
 * Works in the browser (global WebSocket) and under Node tests (an injected
 * constructor, e.g. the `ws` package). All incoming frames are validated
 * against the protocol schemas before anything touches UI state.
 */
import type { HandPoseOut, ButtonOut, Hello, ServerMessage, Snapshot } from "./protocol";
import { parseServerMessage } from "./protocol";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(
    type: "open" | "close" | "message" | "error",
    listener: (event: { data?: unknown }) => void,
  ): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface CockpitHandlers {
  onHello?: (hello: Hello) => void;
  onSnapshot?: (snapshot: Snapshot) => void;
  onAck?: (msg: Extract<ServerMessage, { type: "ack" }>) => void;
  onError?: (message: string) => void;
  onClose?: () => void;
  onProtocolViolation?: (detail: string) => void;
}

export class CockpitClient {
  private socket: SocketLike | null = null;
  hello: Hello | null = null;
  lastSnapshot: Snapshot | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: CockpitHandlers,
    private readonly socketFactory: SocketFactory = (u) =>
      new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): Promise<Hello> {
    return new Promise((resolve, reject) => {
      const socket = this.socketFactory(this.url);
      this.socket = socket;
      socket.addEventListener("error", () =>
        reject(new Error(`connection to ${this.url} failed`)),
      );
      socket.addEventListener("close", () => this.handlers.onClose?.());
      socket.addEventListener("message", (event) => {
        let msg: ServerMessage;
        try {
          msg = parseServerMessage(String(event.data));
        } catch (err) {
          this.handlers.onProtocolViolation?.(String(err));
          return;
        }
        switch (msg.type) {
          case "hello":
            this.hello = msg;
            this.handlers.onHello?.(msg);
            resolve(msg);
            break;
          case "snapshot":
            this.lastSnapshot = msg;
            this.handlers.onSnapshot?.(msg);
            break;
          case "ack":
            this.handlers.onAck?.(msg);
            break;
          case "error":
            this.handlers.onError?.(msg.message);
            break;
        }
      });
    });
  }

  send(msg: HandPoseOut | ButtonOut): void {
    if (!this.socket) throw new Error("not connected");
    this.socket.send(JSON.stringify(msg));
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }
}
