// Pure view state: every update takes payloads and returns a new state, so
// replaying the same service responses always reproduces the same view.

import type {
  EnabledEntry,
  OpResponse,
  SessionCreated,
  TracePayload,
  TraceStatePayload,
  TraceEventPayload,
} from "./api.js";

export type TypeState = "pending" | "enabled" | "disabled";

export interface SelectorEntry {
  state: TypeState;
  ms?: number;
}

export interface ViewState {
  sessionId: string | null;
  revision: number;
  bound: number;
  trace: TracePayload | null;
  focus: number;
  selector: Record<string, SelectorEntry>;
  toast: string | null;
  pendingOp: boolean;
}

export function initialView(): ViewState {
  return {
    sessionId: null,
    revision: -1,
    bound: 0,
    trace: null,
    focus: 0,
    selector: {},
    toast: null,
    pendingOp: false,
  };
}

export function withSession(view: ViewState, payload: SessionCreated): ViewState {
  return {
    ...view,
    sessionId: payload.session.id,
    bound: payload.session.bound,
    revision: payload.revision,
    trace: payload.trace,
    focus: payload.trace.focus,
    selector: {},
    toast: null,
  };
}

export function withOpResponse(view: ViewState, response: OpResponse): ViewState {
  if (response.noAlternative) {
    return { ...view, toast: "no alternative within the bound" };
  }
  const next: ViewState = {
    ...view,
    revision: response.revision,
    focus: response.focus,
    toast: null,
  };
  if (response.trace) {
    next.trace = response.trace;
  }
  // a new revision invalidates every resolved probe
  if (response.revision !== view.revision) {
    next.selector = mapValues(view.selector, () => ({ state: "pending" as TypeState }));
  }
  return next;
}

export function withTypeProbe(
  view: ViewState,
  name: string,
  entry: EnabledEntry,
): ViewState {
  return {
    ...view,
    selector: {
      ...view.selector,
      [name]: { state: entry.enabled ? "enabled" : "disabled", ms: entry.ms },
    },
  };
}

export function withToast(view: ViewState, toast: string | null): ViewState {
  return { ...view, toast };
}

export function withPendingOp(view: ViewState, pending: boolean): ViewState {
  return { ...view, pendingOp: pending };
}

function mapValues<T, U>(
  record: Record<string, T>,
  fn: (value: T) => U,
): Record<string, U> {
  const out: Record<string, U> = {};
  for (const [key, value] of Object.entries(record)) {
    out[key] = fn(value);
  }
  return out;
}

/** Stored index for an unrolled position: positions past the end wrap into the loop. */
export function canonicalIndex(trace: TracePayload, j: number): number {
  const n = trace.states.length;
  if (j < n) return j;
  const loopLen = n - trace.loopStart;
  return trace.loopStart + ((j - trace.loopStart) % loopLen);
}

export interface TransitionView {
  leftIndex: number;
  rightIndex: number;
  left: TraceStatePayload;
  right: TraceStatePayload;
  event: TraceEventPayload;
  wraps: boolean;
  changed: string[];
}

/** The two side-by-side states at the focused transition, loop-aware. */
export function transitionView(trace: TracePayload, focus: number): TransitionView {
  const leftIndex = canonicalIndex(trace, focus);
  const rightIndex = canonicalIndex(trace, leftIndex + 1);
  const left = trace.states[leftIndex];
  const right = trace.states[rightIndex];
  const changed = Object.keys(left.props)
    .filter((key) => left.props[key] !== right.props[key])
    .sort();
  return {
    leftIndex,
    rightIndex,
    left,
    right,
    event: trace.events[leftIndex],
    wraps: rightIndex !== leftIndex + 1,
    changed,
  };
}

export function eventLabel(event: TraceEventPayload): string {
  return `${event.name}[${event.args.join(",")}]`;
}
