// Wire types for the session service. Everything shown in the console comes
// from these payloads; the client never simulates state on its own.

export interface MemoryEntry {
  revised: string;
  agent: string;
}

export interface IrAgentState {
  y: number[];
  s: string;
}

export interface IvAgentState {
  positions: { axial: number; coronal: number; sagittal: number };
  display: string;
  main_view: string;
}

export interface ArZoom {
  center: number[];
  scale: number;
  level: number;
}

export interface ArAgentState {
  visible: string[];
  view: string;
  rotation: string;
  target: string | null;
  zoom: ArZoom;
  zoom_stack_depth: number;
}

export interface SessionSnapshot {
  id: string;
  clip: number;
  status: string;
  invalid_cycles: number;
  current_function: string | null;
  memory_window: MemoryEntry[];
  agent_states: {
    ir_agent: IrAgentState;
    iv_agent: IvAgentState;
    ar_agent: ArAgentState;
  };
}

export interface TraceStep {
  step: number;
  status_before: string;
  proposal: { probs: Record<string, number>; source: string };
  chosen: string;
  executed: string;
  overridden: boolean;
}

export interface Trace {
  clip: number;
  steps: TraceStep[];
  ic_events: number[];
  failed: boolean;
  failure_reason: string | null;
}

export interface TimelineDirective {
  kind: string;
  anchor: string;
  payload: Record<string, unknown>;
  span: [number, number];
}

export interface Timeline {
  fps: number;
  truncated: boolean;
  directives: TimelineDirective[];
  keyframes: { t: number; values: Record<string, unknown> }[];
}

export interface CommandResult {
  trace: Trace;
  revised: string | null;
  valid: boolean | null;
  agent: string | null;
  timeline: Timeline | null;
  clip: number;
  ic: number;
  status: string;
  state: SessionSnapshot;
}
