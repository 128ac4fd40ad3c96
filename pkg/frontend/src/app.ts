// Console controller: owns the latest service snapshot and the last command
// result, and renders from those alone.

import { ApiClient } from "./api.js";
import type { CommandResult, SessionSnapshot } from "./model.js";
import { renderConsole } from "./render.js";

export class ConsoleApp {
  sessionId: string | null = null;
  snapshot: SessionSnapshot | null = null;
  lastResult: CommandResult | null = null;
  private sliceVersion = 0;

  constructor(private api: ApiClient) {}

  async start(backend: string = "mock"): Promise<void> {
    this.sessionId = await this.api.createSession(backend);
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    this.snapshot = await this.api.getState(this.sessionId);
  }

  async submit(text: string | null): Promise<CommandResult> {
    if (!this.sessionId) throw new Error("no session");
    const result = await this.api.submitCommand(this.sessionId, text);
    this.lastResult = result;
    this.snapshot = result.state;
    this.sliceVersion += 1;
    return result;
  }

  async reset(): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    await this.api.reset(this.sessionId);
    this.lastResult = null;
    await this.refresh();
  }

  displayedIc(): number {
    return this.lastResult ? this.lastResult.ic : (this.snapshot?.invalid_cycles ?? 0);
  }

  render(): string {
    if (!this.snapshot) {
      return `<div class="muted">connecting…</div>`;
    }
    const id = this.sessionId ?? "";
    return renderConsole(this.snapshot, this.lastResult, (plane) =>
      this.api.sliceUrl(id, plane, this.sliceVersion),
    );
  }
}
