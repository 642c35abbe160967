/** Wires the playground UI: prompt composer with keyword chips, generation
 * cards with animated point-cloud playback, what-if comparisons, and
 * describe-back badges. All motion data comes from the backend API. */

import { ApiClient, decodeVertexFrames, type FramesPayload, type Lexicon } from "./api.js";
import { describeBackBadges } from "./badges.js";
import {
  addCard,
  addComparison,
  newSession,
  whatIfRequest,
  withDescribeBack,
  type Card,
  type Session,
} from "./cards.js";
import { detectChips, replaceKeyword, wordDiff, type Chip } from "./keywords.js";
import {
  frameAt,
  newClock,
  pause,
  play,
  scrubToFrame,
  tick,
  type ClockState,
} from "./playback.js";
import { defaultCamera, drawFrame, type Camera } from "./render.js";

const api = new ApiClient();
let session: Session = newSession();
let lexicon: Lexicon | null = null;

const promptEl = document.getElementById("prompt") as HTMLTextAreaElement;
const seedEl = document.getElementById("seed") as HTMLInputElement;
const temperatureEl = document.getElementById("temperature") as HTMLInputElement;
const generateBtn = document.getElementById("generate") as HTMLButtonElement;
const composerError = document.getElementById("composer-error") as HTMLSpanElement;
const chipsEl = document.getElementById("chips") as HTMLDivElement;
const cardsEl = document.getElementById("cards") as HTMLElement;
const healthEl = document.getElementById("health") as HTMLSpanElement;
const cardTemplate = document.getElementById("card-template") as HTMLTemplateElement;

interface CardView {
  card: Card;
  frames: Float32Array[];
  clock: ClockState;
  camera: Camera;
  canvas: HTMLCanvasElement;
  scrub: HTMLInputElement;
  frameLabel: HTMLSpanElement;
  playBtn: HTMLButtonElement;
  root: HTMLElement;
  peer: CardView | null; // shared-timeline partner in a what-if pair
}

const views: CardView[] = [];

function tokenColor(token: number, k: number): string {
  const hue = Math.round((360 * token) / k);
  return `hsl(${hue} 55% 45%)`;
}

function renderChips(): void {
  chipsEl.textContent = "";
  if (!lexicon) return;
  for (const chip of detectChips(lexicon, promptEl.value)) {
    const el = document.createElement("span");
    el.className = "chip";
    const field = document.createElement("span");
    field.className = "field";
    field.textContent = chip.field;
    el.appendChild(field);
    el.appendChild(document.createTextNode(chip.word + " "));
    const select = document.createElement("select");
    const head = document.createElement("option");
    head.value = "";
    head.textContent = "what-if…";
    select.appendChild(head);
    for (const alt of chip.alternatives) {
      const opt = document.createElement("option");
      opt.value = alt;
      opt.textContent = alt;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => {
      if (select.value) void runWhatIf(chip, select.value);
      select.value = "";
    });
    el.appendChild(select);
    chipsEl.appendChild(el);
  }
}

function updateComposerState(): void {
  const empty = promptEl.value.trim().length === 0;
  generateBtn.disabled = empty || !lexicon;
  composerError.textContent = empty ? "enter a prompt to generate" : "";
  renderChips();
}

function makeCardView(card: Card, diffIndices: number[]): CardView {
  const fragment = cardTemplate.content.cloneNode(true) as DocumentFragment;
  const root = fragment.querySelector(".card") as HTMLElement;
  const payload = card.payload;
  const frames = decodeVertexFrames(payload.vertices_b64, payload.n_frames, payload.n_vertices);

  const promptSpan = root.querySelector(".card-prompt") as HTMLSpanElement;
  const words = card.request.prompt.split(/\s+/);
  words.forEach((w, i) => {
    const span = document.createElement("span");
    span.textContent = (i ? " " : "") + w;
    if (diffIndices.includes(i)) span.className = "diff";
    promptSpan.appendChild(span);
  });
  (root.querySelector(".card-meta") as HTMLSpanElement).textContent =
    `#${card.id} · seed ${card.request.seed ?? 0} · ${payload.n_frames} frames · ` +
    `${payload.duration_s.toFixed(2)}s`;

  const strip = root.querySelector(".token-strip") as HTMLDivElement;
  for (const t of payload.tokens) {
    const cell = document.createElement("span");
    cell.style.background = tokenColor(t, lexicon?.k_geometry ?? 512);
    cell.title = `token ${t}`;
    strip.appendChild(cell);
  }

  const canvas = root.querySelector("canvas") as HTMLCanvasElement;
  const scrub = root.querySelector(".scrub") as HTMLInputElement;
  scrub.max = String(payload.n_frames - 1);
  const view: CardView = {
    card,
    frames,
    clock: play(newClock(), performance.now()),
    camera: defaultCamera(),
    canvas,
    scrub,
    frameLabel: root.querySelector(".frame-label") as HTMLSpanElement,
    playBtn: root.querySelector(".playpause") as HTMLButtonElement,
    root,
    peer: null,
  };

  view.playBtn.addEventListener("click", () => {
    view.clock = view.clock.playing ? pause(view.clock) : play(view.clock, performance.now());
    view.playBtn.textContent = view.clock.playing ? "⏸" : "▶";
    if (view.peer) {
      view.peer.clock = view.clock.playing
        ? play(view.peer.clock, performance.now())
        : pause(view.peer.clock);
      view.peer.playBtn.textContent = view.playBtn.textContent;
    }
  });
  scrub.addEventListener("input", () => {
    const f = Number(scrub.value);
    view.clock = pause(scrubToFrame(view.clock, f, payload.n_frames));
    view.playBtn.textContent = "▶";
    if (view.peer) {
      view.peer.clock = pause(scrubToFrame(view.peer.clock, f, view.peer.card.payload.n_frames));
      view.peer.playBtn.textContent = "▶";
    }
  });

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    view.camera.azimuth += (e.clientX - lastX) * 0.01;
    view.camera.elevation += (e.clientY - lastY) * 0.01;
    lastX = e.clientX;
    lastY = e.clientY;
  });
  canvas.addEventListener("pointerup", () => (dragging = false));

  const describeBtn = root.querySelector(".describe") as HTMLButtonElement;
  const badgesEl = root.querySelector(".badges") as HTMLSpanElement;
  const descriptionEl = root.querySelector(".description") as HTMLDivElement;
  const errorEl = root.querySelector(".card-error") as HTMLDivElement;
  describeBtn.addEventListener("click", async () => {
    describeBtn.disabled = true;
    errorEl.textContent = "";
    try {
      const question = lexicon?.questions[0];
      const res = await api.describe(card.payload.tokens, question);
      session = withDescribeBack(session, card.id, res.question, res.description);
      descriptionEl.textContent = res.description;
      badgesEl.textContent = "";
      if (lexicon) {
        for (const b of describeBackBadges(lexicon, card.request.prompt, res.description)) {
          const badge = document.createElement("span");
          badge.className = `badge ${b.kind}`;
          badge.textContent =
            b.kind === "missing" ? `${b.field}: ?` : `${b.field}: ${b.describedLabel}`;
          badge.title = `prompt ${b.field} = ${b.promptLabel}`;
          badgesEl.appendChild(badge);
        }
      }
    } catch (e) {
      errorEl.textContent = e instanceof Error ? e.message : String(e);
    } finally {
      describeBtn.disabled = false;
    }
  });

  cardsEl.prepend(root);
  views.push(view);
  return view;
}

async function generateCard(
  prompt: string,
  seed: number,
  temperature: number,
): Promise<{ card: Card; payload: FramesPayload }> {
  const request = { prompt, seed, temperature };
  const payload = await api.generate(request);
  const added = addCard(session, request, payload);
  session = added.session;
  return { card: added.card, payload };
}

async function runGenerate(): Promise<void> {
  generateBtn.disabled = true;
  composerError.textContent = "";
  try {
    const { card } = await generateCard(
      promptEl.value.trim(),
      Number(seedEl.value) || 0,
      Number(temperatureEl.value) || 0,
    );
    makeCardView(card, []);
  } catch (e) {
    composerError.textContent = e instanceof Error ? e.message : String(e);
  } finally {
    updateComposerState();
  }
}

async function runWhatIf(chip: Chip, replacement: string): Promise<void> {
  composerError.textContent = "";
  try {
    const basePrompt = promptEl.value.trim();
    const editedPrompt = replaceKeyword(basePrompt, chip, replacement);
    const seed = Number(seedEl.value) || 0;
    const temperature = Number(temperatureEl.value) || 0;
    const base = await generateCard(basePrompt, seed, temperature);
    // identical params and seed; only the edited keyword differs
    const editedReq = whatIfRequest(base.card, editedPrompt);
    const editedPayload = await api.generate(editedReq);
    const added = addCard(session, editedReq, editedPayload);
    session = added.session;
    const diff = wordDiff(basePrompt, editedPrompt);
    session = addComparison(session, base.card.id, added.card.id, diff[0] ?? chip.index);
    const baseView = makeCardView(base.card, diff);
    const editedView = makeCardView(added.card, diff);
    editedView.root.classList.add("compare-edited");
    baseView.peer = editedView;
    editedView.peer = baseView;
  } catch (e) {
    composerError.textContent = e instanceof Error ? e.message : String(e);
  }
}

function animate(timestamp: number): void {
  for (const view of views) {
    view.clock = tick(view.clock, timestamp, view.card.payload.n_frames);
    const frame = frameAt(view.clock.position, view.card.payload.n_frames);
    view.scrub.value = String(frame);
    view.frameLabel.textContent = `${frame + 1}/${view.card.payload.n_frames}`;
    const ctx = view.canvas.getContext("2d");
    if (ctx) drawFrame(ctx, view.frames[frame], view.camera);
  }
  requestAnimationFrame(animate);
}

async function init(): Promise<void> {
  promptEl.addEventListener("input", updateComposerState);
  generateBtn.addEventListener("click", () => void runGenerate());
  try {
    const health = await api.health();
    healthEl.textContent = `backend ${health.status}`;
    healthEl.className = `health ${health.status === "ok" ? "ok" : "bad"}`;
    lexicon = await api.lexicon();
  } catch (e) {
    healthEl.textContent = "backend unreachable";
    healthEl.className = "health bad";
    console.error(e);
  }
  updateComposerState();
  requestAnimationFrame(animate);
}

void init();
