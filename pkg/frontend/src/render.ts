// DOM rendering: the view is rebuilt from ViewState on every change.
// No state lives in the DOM; handlers receive intents only for controls
// that are actually active, so disabled selector buttons stay inert.

import { canonicalIndex, eventLabel, transitionView } from "./store.js";
import type { ViewState } from "./store.js";
import type { TraceStatePayload } from "./api.js";

export interface Handlers {
  onForward(): void;
  onBackward(): void;
  onAltState(side: "left" | "right"): void;
  onAltEvent(): void;
  onSelectType(name: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderStrip(doc: Document, view: ViewState): HTMLElement {
  const strip = el(doc, "div", "trace-strip");
  const trace = view.trace!;
  const focusIndex = canonicalIndex(trace, view.focus);
  trace.states.forEach((state, idx) => {
    const dot = el(doc, "span", "dot", `s${state.id}`);
    dot.dataset.index = String(idx);
    if (idx >= trace.loopStart) dot.classList.add("loop");
    if (idx === focusIndex) dot.classList.add("focused");
    strip.appendChild(dot);
    const label = el(doc, "span", "strip-event", eventLabel(trace.events[idx]));
    label.dataset.index = String(idx);
    if (idx === focusIndex) label.classList.add("focused");
    if (idx >= trace.loopStart) label.classList.add("loop");
    strip.appendChild(label);
  });
  const back = el(doc, "span", "loop-arc", "↺");
  back.title = `loops back to position ${trace.loopStart}`;
  strip.appendChild(back);
  return strip;
}

function renderProps(
  doc: Document,
  state: TraceStatePayload,
  changed: Set<string>,
): HTMLElement {
  const table = el(doc, "table", "props");
  for (const [name, value] of Object.entries(state.props)) {
    const row = el(doc, "tr");
    if (changed.has(name)) row.classList.add("changed");
    row.appendChild(el(doc, "td", "prop-name", name));
    row.appendChild(el(doc, "td", "prop-value", String(value)));
    table.appendChild(row);
  }
  return table;
}

function renderPanes(doc: Document, view: ViewState, handlers: Handlers): HTMLElement {
  const trace = view.trace!;
  const t = transitionView(trace, view.focus);
  const changed = new Set(t.changed);
  const panes = el(doc, "div", "panes");

  const left = el(doc, "div", "pane pane-left");
  left.appendChild(el(doc, "h3", "pane-title", `s${t.left.id}`));
  left.appendChild(renderProps(doc, t.left, changed));
  const leftReload = el(doc, "button", "reload-state", "⟳");
  leftReload.id = "alt-state-left";
  leftReload.title = "different state here";
  leftReload.addEventListener("click", () => handlers.onAltState("left"));
  left.appendChild(leftReload);

  const centre = el(doc, "div", "pane-centre");
  const label = el(doc, "div", "event-label", eventLabel(t.event));
  label.id = "event-label";
  centre.appendChild(label);
  centre.appendChild(el(doc, "div", "event-type", `:${t.event.type}`));
  const eventReload = el(doc, "button", "reload-event", "⟳");
  eventReload.id = "alt-event";
  eventReload.title = "different event of this type";
  eventReload.addEventListener("click", () => handlers.onAltEvent());
  centre.appendChild(eventReload);
  if (t.wraps) {
    const badge = el(doc, "span", "loop-badge", "loop");
    badge.title = "successor comes from the loop";
    centre.appendChild(badge);
  }

  const right = el(doc, "div", "pane pane-right");
  right.appendChild(el(doc, "h3", "pane-title", `s${t.right.id}`));
  right.appendChild(renderProps(doc, t.right, changed));
  const rightReload = el(doc, "button", "reload-state", "⟳");
  rightReload.id = "alt-state-right";
  rightReload.title = "different state there";
  rightReload.addEventListener("click", () => handlers.onAltState("right"));
  right.appendChild(rightReload);

  panes.appendChild(left);
  panes.appendChild(centre);
  panes.appendChild(right);
  return panes;
}

function renderSelector(doc: Document, view: ViewState, handlers: Handlers): HTMLElement {
  const bar = el(doc, "div", "selector");
  for (const [name, entry] of Object.entries(view.selector)) {
    const button = el(doc, "button", `type type-${entry.state}`, name);
    button.dataset.type = name;
    if (entry.ms !== undefined) button.title = `${entry.ms.toFixed(1)} ms`;
    if (entry.state === "enabled") {
      button.addEventListener("click", () => handlers.onSelectType(name));
    } else {
      button.disabled = true;
    }
    bar.appendChild(button);
  }
  return bar;
}

export function render(root: HTMLElement, view: ViewState, handlers: Handlers): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (!view.trace) {
    root.appendChild(el(doc, "div", "placeholder", "no session"));
    if (view.toast) {
      root.appendChild(el(doc, "div", "toast", view.toast));
    }
    return;
  }
  root.appendChild(renderStrip(doc, view));
  root.appendChild(renderPanes(doc, view, handlers));

  const nav = el(doc, "div", "nav");
  const backward = el(doc, "button", "nav-button", "◀");
  backward.id = "backward";
  backward.disabled = view.focus === 0;
  if (view.focus > 0) backward.addEventListener("click", () => handlers.onBackward());
  const focusLabel = el(doc, "span", "focus-label", `transition ${view.focus}`);
  const forward = el(doc, "button", "nav-button", "▶");
  forward.id = "forward";
  forward.addEventListener("click", () => handlers.onForward());
  nav.appendChild(backward);
  nav.appendChild(focusLabel);
  nav.appendChild(forward);
  root.appendChild(nav);

  root.appendChild(renderSelector(doc, view, handlers));

  if (view.toast) {
    root.appendChild(el(doc, "div", "toast", view.toast));
  }
  if (view.pendingOp) {
    root.appendChild(el(doc, "div", "busy", "…"));
  }
}
