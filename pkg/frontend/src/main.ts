/**
 * Browser entry point: wires the socket client, scene, panels and inputs
 * together. Everything stateful about the session lives on the server; this
 * file is plumbing and rendering only.
 */
import {
  AmbientLight,
  DirectionalLight,
  GridHelper,
  PerspectiveCamera,
  WebGLRenderer,
} from "three";

import { ButtonPanel } from "./buttons";
import { CockpitClient } from "./client";
import { HandInputSynthesizer } from "./input";
import { armsFromHello } from "./kinematics";
import { describePanels, SessionModelStore } from "./panel";
import { CockpitScene } from "./scene";

const params = new URLSearchParams(location.search);
const url =
  params.get("server") ?? `ws://${location.hostname}:8720/ws`;

const store = new SessionModelStore();
const cockpit = new CockpitScene();
const hands = {
  left: new HandInputSynthesizer("left"),
  right: new HandInputSynthesizer("right"),
};

const client = new CockpitClient(url, {
  onHello: (hello) => cockpit.buildArms(armsFromHello(hello)),
  onSnapshot: (snapshot) => {
    store.applySnapshot(snapshot, performance.now());
    cockpit.applySnapshot(snapshot);
  },
  onAck: (ack) => store.applyPanels(ack.session),
  onError: (message) => console.warn("server rejected a message:", message),
  onClose: () => store.markClosed(),
});

const buttons = new ButtonPanel((msg) => client.send(msg));
window.addEventListener("keydown", (e) => {
  if (!e.repeat) buttons.keyDown(e.key);
});
window.addEventListener("keyup", (e) => buttons.keyUp(e.key));
window.addEventListener("blur", () => buttons.releaseAll());

// Arrow keys / PageUp-PageDown drag the left gizmo; hold Shift for the right.
const STEP = 0.01;
window.addEventListener("keydown", (e) => {
  const hand = e.shiftKey ? hands.right : hands.left;
  const moves: Record<string, [number, number, number]> = {
    ArrowUp: [0, STEP, 0],
    ArrowDown: [0, -STEP, 0],
    ArrowLeft: [-STEP, 0, 0],
    ArrowRight: [STEP, 0, 0],
    PageUp: [0, 0, STEP],
    PageDown: [0, 0, -STEP],
  };
  const delta = moves[e.key];
  if (delta) hand.translate(delta);
});

const sliders = document.querySelectorAll<HTMLInputElement>("input[data-hand]");
sliders.forEach((slider) =>
  slider.addEventListener("input", () => {
    const hand = slider.dataset.hand as "left" | "right";
    hands[hand].setStiffnessIndex(Number(slider.value));
  }),
);

const renderer = new WebGLRenderer({ antialias: true });
renderer.setSize(innerWidth, innerHeight);
document.body.appendChild(renderer.domElement);
const camera = new PerspectiveCamera(50, innerWidth / innerHeight, 0.01, 50);
camera.position.set(1.8, -1.8, 1.4);
camera.up.set(0, 0, 1);
camera.lookAt(0, 0, 0.4);
cockpit.scene.add(new AmbientLight(0xffffff, 0.6));
const sun = new DirectionalLight(0xffffff, 1.2);
sun.position.set(2, -1, 3);
cockpit.scene.add(sun);
cockpit.scene.add(new GridHelper(4, 40));

const hud = document.getElementById("hud")!;

function frame(now: number) {
  store.refresh(now);
  for (const hand of [hands.left, hands.right]) {
    const msg = hand.poll(now);
    if (msg) {
      try {
        client.send(msg);
      } catch {
        /* not connected yet */
      }
    }
  }
  const model = store.get();
  hud.textContent =
    `${model.connection.toUpperCase()}  tick ${model.tick}\n` +
    describePanels(model.panels);
  renderer.render(cockpit.scene, camera);
  requestAnimationFrame(frame);
}

client
  .connect()
  .then(() => requestAnimationFrame(frame))
  .catch((err) => {
    hud.textContent = String(err);
  });
