/**
 * Joystick-button panel: on-screen buttons and keyboard chords that emit
 * press/release edges. The panel is deliberately dumb — selection grammar
 * (S-hold, toggles, transfers) lives on the server; the cockpit only
 * guarantees faithful edges, including held keys.
 */
import {
  buttonMessage,
  type ButtonName,
  type ButtonOut,
  type HandSide,
} from "./protocol";

export interface KeyBinding {
  hand: HandSide;
  button: ButtonName;
}

/** Default keyboard layout: left hand on QWER.., right hand on UIOP.. */
export const DEFAULT_KEYMAP: Record<string, KeyBinding> = {
  q: { hand: "left", button: "s" },
  w: { hand: "left", button: "f" },
  e: { hand: "left", button: "trigger" },
  r: { hand: "left", button: "close_inc" },
  t: { hand: "left", button: "close_dec" },
  u: { hand: "right", button: "s" },
  i: { hand: "right", button: "f" },
  o: { hand: "right", button: "trigger" },
  p: { hand: "right", button: "close_inc" },
  "[": { hand: "right", button: "close_dec" },
  "1": { hand: "left", button: "rb1" },
  "2": { hand: "left", button: "rb2" },
  "3": { hand: "left", button: "rb3" },
  "4": { hand: "left", button: "rb4" },
  "7": { hand: "right", button: "rb1" },
  "8": { hand: "right", button: "rb2" },
  "9": { hand: "right", button: "rb3" },
  "0": { hand: "right", button: "rb4" },
};

export class ButtonPanel {
  private seq = 0;
  private held = new Set<string>();

  constructor(
    private readonly send: (msg: ButtonOut) => void,
    private readonly clock: () => number = () => Date.now() / 1000,
    private readonly keymap: Record<string, KeyBinding> = DEFAULT_KEYMAP,
  ) {}

  private emit(hand: HandSide, button: ButtonName, edge: "press" | "release") {
    this.seq += 1;
    this.send(buttonMessage(this.seq, this.clock(), hand, button, edge));
  }

  press(hand: HandSide, button: ButtonName): void {
    const key = `${hand}:${button}`;
    if (this.held.has(key)) return; // key auto-repeat must not re-press
    this.held.add(key);
    this.emit(hand, button, "press");
  }

  release(hand: HandSide, button: ButtonName): void {
    const key = `${hand}:${button}`;
    if (!this.held.has(key)) return;
    this.held.delete(key);
    this.emit(hand, button, "release");
  }

  /** A plain click: press immediately followed by release. */
  click(hand: HandSide, button: ButtonName): void {
    this.press(hand, button);
    this.release(hand, button);
  }

  isHeld(hand: HandSide, button: ButtonName): boolean {
    return this.held.has(`${hand}:${button}`);
  }

  keyDown(key: string): void {
    const binding = this.keymap[key.toLowerCase()];
    if (binding) this.press(binding.hand, binding.button);
  }

  keyUp(key: string): void {
    const binding = this.keymap[key.toLowerCase()];
    if (binding) this.release(binding.hand, binding.button);
  }

  /** Releases everything (window blur / disconnect) so no key stays stuck. */
  releaseAll(): void {
    for (const key of [...this.held]) {
      const [hand, button] = key.split(":") as [HandSide, ButtonName];
      this.release(hand, button);
    }
  }
}
