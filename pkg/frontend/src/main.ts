// Browser entry point: wires the command input and keeps panels in sync with
// the service (poll + render after every command).

import { ApiClient } from "./api.js";
import { ConsoleApp } from "./app.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8765";
const POLL_MS = 2000;

const api = new ApiClient(SERVICE_URL);
const app = new ConsoleApp(api);

const root = document.getElementById("console")!;
const input = document.getElementById("command-input") as HTMLInputElement;
const sendBtn = document.getElementById("send-btn") as HTMLButtonElement;
const silentBtn = document.getElementById("silent-btn") as HTMLButtonElement;
const resetBtn = document.getElementById("reset-btn") as HTMLButtonElement;

function paint(): void {
  root.innerHTML = app.render();
  const scrubber = document.getElementById("timeline-scrubber") as HTMLInputElement | null;
  const frameLabel = document.getElementById("scrubber-frame");
  if (scrubber && frameLabel) {
    scrubber.addEventListener("input", () => {
      frameLabel.textContent = scrubber.value;
    });
  }
}

async function submit(text: string | null): Promise<void> {
  sendBtn.disabled = true;
  try {
    await app.submit(text);
  } catch (err) {
    root.innerHTML = `<div class="banner-invalid">service error: ${String(err)}</div>`;
    return;
  } finally {
    sendBtn.disabled = false;
  }
  paint();
}

sendBtn.addEventListener("click", () => {
  const text = input.value.trim();
  if (text) {
    input.value = "";
    void submit(text);
  }
});
input.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") sendBtn.click();
});
silentBtn.addEventListener("click", () => void submit(null));
resetBtn.addEventListener("click", () => {
  void app.reset().then(paint);
});

// Optional browser speech capture: transcripts post to the same endpoint.
const speech = (window as unknown as Record<string, unknown>).webkitSpeechRecognition as
  | (new () => { onresult: (ev: { results: { 0: { 0: { transcript: string } } } }) => void; start: () => void })
  | undefined;
const speakBtn = document.getElementById("speak-btn") as HTMLButtonElement | null;
if (speakBtn && speech) {
  speakBtn.addEventListener("click", () => {
    const recog = new speech();
    recog.onresult = (ev) => void submit(ev.results[0][0].transcript);
    recog.start();
  });
} else if (speakBtn) {
  speakBtn.disabled = true;
  speakBtn.title = "speech capture unavailable in this browser";
}

void app
  .start()
  .then(() => {
    paint();
    setInterval(() => {
      void app.refresh().then(paint);
    }, POLL_MS);
  })
  .catch((err) => {
    root.innerHTML = `<div class="banner-invalid">cannot reach service at ${SERVICE_URL}: ${String(
      err,
    )}</div>`;
  });
