// Browser bootstrap: fetch the participant's questionnaire, preload
// stimuli, run the session screen by screen, capture behavior, deliver
// the result. All state transitions funnel through the Session engine;
// the DOM here only renders the active screen and forwards interactions.

import { answerFromJson, continuous } from "./answers.js";
import { createSession, Session } from "./engine.js";
import { attachMediaTelemetry } from "./media.js";
import { preloadAssets } from "./preload.js";
import { clickToValue } from "./scales.js";
import type { ItemSpec, QuestionnaireEnvelope, ScreenSpec } from "./spec.js";
import { findAsset } from "./spec.js";
import { StrokeRecorder } from "./strokes.js";
import { SyncClient, decodeMessage, encodeMessage } from "./sync.js";
import { finalizeAndDeliver } from "./transport.js";

const root = () => document.getElementById("screen")!;
const statusBar = () => document.getElementById("status")!;

interface AppContext {
  session: Session;
  envelope: QuestionnaireEnvelope;
  assets: Map<string, Blob>;
  sync: SyncClient | null;
  socket: WebSocket | null;
  startedAt: number;
}

function now(ctx: AppContext): number {
  return Math.round(performance.now() - ctx.startedAt);
}

function setStatus(text: string): void {
  statusBar().textContent = text;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const participant = params.get("participant");
  if (!participant) {
    root().innerHTML = "<p class='error'>Missing ?participant=… in the URL.</p>";
    return;
  }
  setStatus("Fetching questionnaire…");
  const response = await fetch(
    `/questionnaire?participant=${encodeURIComponent(participant)}`);
  if (response.status === 409) {
    root().innerHTML = "<p>This study is complete. Thank you!</p>";
    setStatus("");
    return;
  }
  if (!response.ok) {
    root().innerHTML = `<p class='error'>Cannot load questionnaire
      (${response.status}). Please contact the researchers.</p>`;
    return;
  }
  const envelope = (await response.json()) as QuestionnaireEnvelope;

  setStatus("Preloading stimuli…");
  const assets = await preloadAssets(
    envelope.preload,
    (uri) => fetch(`/assets/${uri}`),
    (s) => setStatus(s.total === 0 ? "" :
      `Preloading stimuli ${Math.min(s.done + 1, s.total)}/${s.total}` +
      (s.retrying ? " (retrying…)" : "")),
  );

  const session = createSession(envelope.spec, participant, 0);
  const ctx: AppContext = {
    session, envelope, assets,
    sync: null, socket: null,
    startedAt: performance.now(),
  };

  const group = params.get("group");
  const device = params.get("device");
  if (group && device) connectSync(ctx, group, device);

  window.addEventListener("blur", () => {
    if (session.status === "in_progress") session.recordEvent("focus-lost", now(ctx));
  });
  window.addEventListener("focus", () => {
    if (session.status === "in_progress") session.recordEvent("focus-gained", now(ctx));
  });

  setStatus("");
  renderActive(ctx);
}

function connectSync(ctx: AppContext, group: string, device: string): void {
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  const client = new SyncClient(group, device);
  ctx.sync = client;
  let saidHello = false;

  const open = () => {
    const socket = new WebSocket(`${scheme}://${window.location.host}/sync/${group}`);
    ctx.socket = socket;
    socket.addEventListener("open", () => {
      if (!saidHello) {
        saidHello = true;
        socket.send(encodeMessage(client.hello()));
      } else {
        // reconnect: fetch a snapshot, then replay whatever went unacked
        socket.send(encodeMessage(client.resumeRequest()));
        for (const m of client.pending()) socket.send(encodeMessage(m));
      }
    });
    socket.addEventListener("message", (event) => {
      client.onMessage(decodeMessage(String(event.data)));
    });
    socket.addEventListener("close", () => {
      setTimeout(open, 1000);
    });
  };
  open();

  setInterval(() => {
    if (ctx.socket && ctx.socket.readyState === WebSocket.OPEN) {
      for (const m of client.pending()) ctx.socket.send(encodeMessage(m));
    }
  }, 2000);
}

function syncSend(ctx: AppContext, build: (c: SyncClient) => unknown): void {
  if (ctx.sync && ctx.socket && ctx.socket.readyState === WebSocket.OPEN) {
    ctx.socket.send(encodeMessage(build(ctx.sync) as never));
  }
}

function renderActive(ctx: AppContext): void {
  const { session } = ctx;
  if (session.status !== "in_progress") {
    return;
  }
  const screen = session.activeScreen();
  syncSend(ctx, (c) => c.reportProgress(screen.screen_id, "shown"));
  const container = root();
  container.innerHTML = "";
  const heading = document.createElement("h1");
  heading.textContent = ctx.envelope.spec.title;
  container.appendChild(heading);

  switch (screen.kind) {
    case "items":
      renderItems(ctx, screen, container);
      break;
    case "wait":
      renderWait(ctx, screen, container);
      break;
    case "media":
      renderMedia(ctx, screen, container);
      break;
    case "remote_command":
      syncSend(ctx, (c) => c.sendCommand("*", screen.command ?? ""));
      advance(ctx);
      return;
    case "export":
      renderExport(ctx, screen, container);
      return;
  }
  const next = document.createElement("button");
  next.id = "next";
  next.textContent = "Next";
  next.addEventListener("click", () => advance(ctx));
  container.appendChild(next);
  refreshGate(ctx);
}

function refreshGate(ctx: AppContext): void {
  const next = document.getElementById("next") as HTMLButtonElement | null;
  if (next === null) return;
  const ready = ctx.session.screenReady(now(ctx));
  next.disabled = !ready;
  if (!ready && ctx.session.activeScreen().kind !== "items") {
    setTimeout(() => refreshGate(ctx), 250);
  }
}

function advance(ctx: AppContext): void {
  const at = now(ctx);
  if (!ctx.session.screenReady(at)) {
    refreshGate(ctx);
    return;
  }
  syncSend(ctx, (c) => c.reportProgress(
    ctx.session.activeScreen().screen_id, "completed"));
  ctx.session.advance(at);
  renderActive(ctx);
  if (ctx.session.status === "completed") {
    root().innerHTML = "<p>All done. Thank you for taking part!</p>";
  }
}

function renderItems(ctx: AppContext, screen: ScreenSpec, container: HTMLElement): void {
  for (const item of screen.items ?? []) {
    const block = document.createElement("div");
    block.className = "item";
    const question = document.createElement("p");
    question.className = "question";
    question.textContent = item.question + (item.required ? " *" : "");
    block.appendChild(question);
    renderScale(ctx, screen, item, block);
    container.appendChild(block);
  }
}

function submit(ctx: AppContext, item: ItemSpec, value: unknown): void {
  ctx.session.submitAnswer(item.item_id, answerFromJson(
    value as Record<string, unknown>), now(ctx));
  refreshGate(ctx);
}

function renderScale(ctx: AppContext, screen: ScreenSpec, item: ItemSpec,
                     block: HTMLElement): void {
  const scale = item.scale;
  if (scale.variant === "category_rating") {
    for (const [index, label] of (scale.labels ?? []).entries()) {
      const wrap = document.createElement("label");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = item.item_id;
      input.addEventListener("change", () =>
        submit(ctx, item, { type: "category", index }));
      wrap.appendChild(input);
      wrap.appendChild(document.createTextNode(label));
      block.appendChild(wrap);
    }
  } else if (scale.variant === "free_text") {
    const area = document.createElement("textarea");
    area.maxLength = scale.max_length ?? 1000;
    area.addEventListener("input", () =>
      submit(ctx, item, { type: "text", text: area.value }));
    block.appendChild(area);
  } else if (scale.variant === "free_hand") {
    renderFreehand(ctx, item, block);
  } else {
    void renderGraphicalScale(ctx, item, block);
  }
}

async function renderGraphicalScale(ctx: AppContext, item: ItemSpec,
                                    block: HTMLElement): Promise<void> {
  const scale = item.scale;
  let url: string;
  if (scale.variant === "custom_svg") {
    const asset = findAsset(ctx.envelope.spec, scale.svg_asset_id ?? "");
    url = `/assets/${asset?.uri ?? ""}`;
  } else {
    const params = new URLSearchParams();
    if (scale.min_label) params.set("min_label", scale.min_label);
    if (scale.max_label) params.set("max_label", scale.max_label);
    if (scale.dimension) params.set("dimension", scale.dimension);
    url = `/scales/${scale.variant}.svg?${params.toString()}`;
  }
  const response = await fetch(url);
  if (!response.ok) {
    // The exact drawing is methodologically required: block, never degrade.
    root().innerHTML = `<p class='error'>A rating scale failed to load
      (${url}). Please contact the researchers.</p>`;
    throw new Error(`scale asset unavailable: ${url}`);
  }
  const svgText = await response.text();
  const holder = document.createElement("div");
  holder.className = "scale";
  holder.innerHTML = svgText;
  const marker = document.createElement("div");
  marker.className = "marker";
  holder.appendChild(marker);
  holder.addEventListener("click", (event) => {
    const rect = holder.querySelector("svg")!.getBoundingClientRect();
    const value = clickToValue(event.clientX, rect, svgText);
    marker.style.left = `${event.clientX - rect.left}px`;
    marker.style.display = "block";
    submit(ctx, item, { type: "continuous", value });
  });
  block.appendChild(holder);
}

function renderFreehand(ctx: AppContext, item: ItemSpec, block: HTMLElement): void {
  const scale = item.scale;
  const canvas = document.createElement("canvas");
  canvas.width = scale.width_px ?? 300;
  canvas.height = scale.height_px ?? 150;
  canvas.className = "freehand";
  const context = canvas.getContext("2d")!;
  context.fillStyle = "#fff";
  context.fillRect(0, 0, canvas.width, canvas.height);
  context.strokeStyle = "#000";
  context.lineWidth = 2;
  context.lineCap = "round";
  context.lineJoin = "round";
  const recorder = new StrokeRecorder(canvas.width, canvas.height);
  let drawing = false;
  const position = (event: PointerEvent) => {
    const rect = canvas.getBoundingClientRect();
    return { x: event.clientX - rect.left, y: event.clientY - rect.top };
  };
  canvas.addEventListener("pointerdown", (event) => {
    drawing = true;
    canvas.setPointerCapture(event.pointerId);
    const { x, y } = position(event);
    recorder.begin(x, y, now(ctx));
    context.beginPath();
    context.moveTo(x, y);
  });
  canvas.addEventListener("pointermove", (event) => {
    if (!drawing) return;
    const { x, y } = position(event);
    recorder.move(x, y, now(ctx));
    context.lineTo(x, y);
    context.stroke();
  });
  canvas.addEventListener("pointerup", (event) => {
    if (!drawing) return;
    drawing = false;
    const { x, y } = position(event);
    recorder.end(x, y, now(ctx));
    submit(ctx, item, { type: "image", data_uri: canvas.toDataURL("image/png") });
  });
  block.appendChild(canvas);
}

function renderWait(ctx: AppContext, screen: ScreenSpec, container: HTMLElement): void {
  const note = document.createElement("p");
  note.className = "placeholder";
  note.textContent = "Please wait…";
  container.appendChild(note);
}

function renderMedia(ctx: AppContext, screen: ScreenSpec, container: HTMLElement): void {
  const asset = findAsset(ctx.envelope.spec, screen.asset_id ?? "");
  if (asset === undefined) return;
  const blob = ctx.assets.get(asset.asset_id);
  const url = blob !== undefined ? URL.createObjectURL(blob) : `/assets/${asset.uri}`;
  let element: HTMLMediaElement | HTMLImageElement;
  if (asset.media_type.startsWith("video/")) {
    element = document.createElement("video");
  } else if (asset.media_type.startsWith("audio/")) {
    element = document.createElement("audio");
  } else {
    element = document.createElement("img");
  }
  element.setAttribute("src", url);
  if (element instanceof HTMLMediaElement) {
    element.controls = !(screen.autoplay ?? true);
    attachMediaTelemetry(element, asset.asset_id,
                         (kind, payload) => {
                           ctx.session.recordEvent(kind, now(ctx), payload);
                           refreshGate(ctx);
                         });
    if (screen.autoplay ?? true) void element.play();
  }
  container.appendChild(element);
}

function renderExport(ctx: AppContext, screen: ScreenSpec,
                      container: HTMLElement): void {
  // Leaving the export screen first (usually completing the session)
  // makes the exported status read "completed"; guarded so that a retry
  // after an upload error does not advance twice.
  if (ctx.session.status === "in_progress"
      && ctx.session.activeScreen().screen_id === screen.screen_id) {
    ctx.session.advance(now(ctx));
  }
  const note = document.createElement("p");
  note.textContent = "Delivering your answers…";
  container.appendChild(note);
  const participant = ctx.session.participantId;
  const digest = ctx.envelope.spec_digest;
  void finalizeAndDeliver(ctx.session, screen.target ?? "upload-then-download-fallback", {
    upload: async (bytes) => {
      const response = await fetch(
        `/results?participant=${encodeURIComponent(participant)}&spec=${digest}`,
        { method: "POST", body: bytes as unknown as BodyInit,
          headers: { "content-type": "text/csv" } });
      return { ok: response.ok, status: response.status };
    },
    download: (bytes, filename) => {
      const blob = new Blob([bytes as unknown as BlobPart], { type: "text/csv" });
      const anchor = document.createElement("a");
      anchor.href = URL.createObjectURL(blob);
      anchor.download = filename;
      anchor.click();
    },
    notify: (message) => {
      setStatus(message);
    },
  }).then((outcome) => {
    if (ctx.session.status === "in_progress") {
      renderActive(ctx); // mid-questionnaire export: keep going
      return;
    }
    container.innerHTML = outcome.mode === "uploaded"
      ? "<p>Your answers were uploaded. Thank you for taking part!</p>"
      : "<p>Your answers were saved to a file on this device. Please send "
        + "it to the researchers per email. Thank you for taking part!</p>";
  }).catch(() => {
    const retry = document.createElement("button");
    retry.textContent = "Retry upload";
    retry.addEventListener("click", () => renderExport(ctx, screen, container));
    container.innerHTML = "<p class='error'>Upload failed.</p>";
    container.appendChild(retry);
  });
}

window.addEventListener("DOMContentLoaded", () => {
  void boot();
});
