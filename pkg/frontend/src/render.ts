// Pure renderers: service payloads in, HTML strings out. Keeping these free
// of DOM and fetch makes every panel testable in node.

import type {
  CommandResult,
  SessionSnapshot,
  Timeline,
  Trace,
  TraceStep,
} from "./model.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const INVALID_STATUS = "Last command invalid, need new input";

export function renderStatusBar(snap: SessionSnapshot, lastResult: CommandResult | null): string {
  const ic = lastResult ? lastResult.ic : snap.invalid_cycles;
  const status = lastResult ? lastResult.status : snap.status;
  return `<div class="status-bar">
  <span class="session">session <code>${esc(snap.id)}</code></span>
  <span class="clip">clip ${snap.clip}</span>
  <span class="status">${esc(status)}</span>
  <span class="ic" id="ic-count" data-ic="${ic}">IC: ${ic}</span>
</div>`;
}

export function renderCommandFeedback(result: CommandResult | null): string {
  if (!result) {
    return `<div class="feedback muted">submit a command to begin</div>`;
  }
  if (result.valid === false || result.status === INVALID_STATUS) {
    const revised = result.revised ? `revised: &quot;${esc(result.revised)}&quot; — ` : "";
    return `<div class="feedback banner-invalid" id="validity-banner">${revised}command invalid, speak again</div>`;
  }
  const agent = result.agent ? ` → ${esc(result.agent)}` : "";
  return `<div class="feedback banner-valid" id="validity-banner">revised: &quot;${esc(
    result.revised ?? "",
  )}&quot; (valid)${agent}</div>`;
}

export function renderMemoryPanel(snap: SessionSnapshot): string {
  if (snap.memory_window.length === 0) {
    return `<section class="panel memory"><h3>Memory</h3><p class="muted">(empty)</p></section>`;
  }
  const items = snap.memory_window
    .map((e) => `<li>&quot;${esc(e.revised)}&quot; <span class="agent">${esc(e.agent)}</span></li>`)
    .join("\n");
  return `<section class="panel memory"><h3>Memory</h3><ol>${items}</ol></section>`;
}

function proposalTitle(step: TraceStep): string {
  const probs = Object.entries(step.proposal.probs)
    .filter(([, p]) => p > 0)
    .sort((a, b) => b[1] - a[1])
    .map(([name, p]) => `${name}=${p.toFixed(2)}`)
    .join(", ");
  return probs || "(all zero)";
}

export function renderTracePanel(trace: Trace | null): string {
  if (!trace) {
    return `<section class="panel trace"><h3>Trace</h3><p class="muted">(no clip run yet)</p></section>`;
  }
  const rows = trace.steps
    .map((s) => {
      const returned = s.executed === "real_time_audio" && s.status_before === INVALID_STATUS;
      const cls = returned ? "step return-edge" : "step";
      const mark = s.overridden ? " *" : "";
      return `<li class="${cls}" title="${esc(proposalTitle(s))}">${s.step}. ${esc(
        s.executed,
      )}${mark} <span class="muted">(${esc(s.status_before)})</span></li>`;
    })
    .join("\n");
  const failed = trace.failed
    ? `<p class="banner-invalid">workflow failed: ${esc(trace.failure_reason ?? "")}</p>`
    : "";
  return `<section class="panel trace"><h3>Trace (clip ${trace.clip})</h3><ol>${rows}</ol>${failed}</section>`;
}

export function renderIrPanel(snap: SessionSnapshot): string {
  const s = snap.agent_states.ir_agent.s;
  const body = s
    ? `<pre class="overlay-preview">${esc(s)}</pre>`
    : `<p class="muted">(no overlay)</p>`;
  return `<section class="panel ir"><h3>Patient info overlay <span class="muted">top-right</span></h3>${body}</section>`;
}

export function renderIvPanel(snap: SessionSnapshot, sliceUrl: (plane: string) => string): string {
  const iv = snap.agent_states.iv_agent;
  const planes = ["axial", "coronal", "sagittal"] as const;
  const cells = planes
    .map(
      (plane) => `<figure class="plane${plane === iv.main_view ? " main" : ""}">
  <img src="${esc(sliceUrl(plane))}" alt="${plane} slice" width="128" height="128">
  <figcaption>${plane} <b id="${plane}-index">${iv.positions[plane]}</b></figcaption>
</figure>`,
    )
    .join("\n");
  return `<section class="panel iv"><h3>CT viewer <span class="muted">${esc(
    iv.display,
  )}, main ${esc(iv.main_view)}</span></h3><div class="planes">${cells}</div></section>`;
}

export function renderArPanel(snap: SessionSnapshot, timeline: Timeline | null): string {
  const ar = snap.agent_states.ar_agent;
  const visible = ar.visible.length
    ? ar.visible.map((v) => `<span class="chip">${esc(v)}</span>`).join(" ")
    : `<span class="muted">(none)</span>`;
  const frames = timeline ? timeline.keyframes.length : 0;
  const scrubber =
    frames > 0
      ? `<label class="scrubber">timeline <input type="range" id="timeline-scrubber" min="0" max="${
          frames - 1
        }" value="0"> <span id="scrubber-frame">0</span>/${frames - 1}</label>`
      : `<p class="muted">(no timeline this clip)</p>`;
  return `<section class="panel ar"><h3>3D anatomy</h3>
  <p>structures: ${visible}</p>
  <p>view <b>${esc(ar.view)}</b> · zoom ×<b id="zoom-scale">${ar.zoom.scale}</b> · depth ${
    ar.zoom.level
  } · stack ${ar.zoom_stack_depth}</p>
  ${scrubber}
</section>`;
}

export function renderConsole(
  snap: SessionSnapshot,
  lastResult: CommandResult | null,
  sliceUrl: (plane: string) => string,
): string {
  return [
    renderStatusBar(snap, lastResult),
    renderCommandFeedback(lastResult),
    renderMemoryPanel(snap),
    renderTracePanel(lastResult ? lastResult.trace : null),
    renderIrPanel(snap),
    renderIvPanel(snap, sliceUrl),
    renderArPanel(snap, lastResult ? lastResult.timeline : null),
  ].join("\n");
}
