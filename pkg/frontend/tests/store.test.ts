import { describe, expect, it } from "vitest";

import {
  canonicalIndex,
  eventLabel,
  initialView,
  transitionView,
  withOpResponse,
  withSession,
  withTypeProbe,
} from "../src/store.js";
import { toggleSession, toggleTrace } from "./fixtures.js";

describe("canonicalIndex", () => {
  it("keeps stored positions", () => {
    expect(canonicalIndex(toggleTrace, 0)).toBe(0);
    expect(canonicalIndex(toggleTrace, 1)).toBe(1);
  });

  it("wraps past the end into the loop", () => {
    expect(canonicalIndex(toggleTrace, 2)).toBe(1);
    expect(canonicalIndex(toggleTrace, 7)).toBe(1);
  });

  it("wraps modulo longer loops", () => {
    const trace = {
      ...toggleTrace,
      states: [
        { id: 0, props: {} },
        { id: 1, props: {} },
        { id: 2, props: {} },
      ],
      events: [
        { name: "a", args: [], type: "T" },
        { name: "b", args: [], type: "T" },
        { name: "c", args: [], type: "T" },
      ],
      loopStart: 1,
    };
    expect(canonicalIndex(trace, 3)).toBe(1);
    expect(canonicalIndex(trace, 4)).toBe(2);
  });
});

describe("transitionView", () => {
  it("shows the focused transition side by side", () => {
    const t = transitionView(toggleTrace, 0);
    expect(t.left.props).toEqual({ p: false });
    expect(t.right.props).toEqual({ p: true });
    expect(eventLabel(t.event)).toBe("Set[a]");
    expect(t.wraps).toBe(false);
    expect(t.changed).toEqual(["p"]);
  });

  it("marks the loop successor at the last position", () => {
    const t = transitionView(toggleTrace, 1);
    expect(t.left.id).toBe(1);
    expect(t.right.id).toBe(1);
    expect(t.wraps).toBe(true);
    expect(t.changed).toEqual([]);
  });
});

describe("view updates", () => {
  it("is a pure function of the payloads", () => {
    const a = withSession(initialView(), toggleSession);
    const b = withSession(initialView(), toggleSession);
    expect(a).toEqual(b);
  });

  it("records probes per type", () => {
    let view = withSession(initialView(), toggleSession);
    view = withTypeProbe(view, "Set", { enabled: true, ms: 1.5 });
    view = withTypeProbe(view, "Stay", { enabled: false, ms: 0.4 });
    expect(view.selector.Set.state).toBe("enabled");
    expect(view.selector.Stay.state).toBe("disabled");
  });

  it("keeps the view on no-alternative and shows a toast", () => {
    const view = withSession(initialView(), toggleSession);
    const after = withOpResponse(view, {
      revision: view.revision,
      focus: 0,
      noAlternative: true,
    });
    expect(after.trace).toEqual(view.trace);
    expect(after.revision).toBe(view.revision);
    expect(after.toast).toContain("no alternative");
  });

  it("invalidates probes when the revision moves", () => {
    let view = withSession(initialView(), toggleSession);
    view = withTypeProbe(view, "Set", { enabled: true, ms: 1 });
    const after = withOpResponse(view, { revision: 1, focus: 1 });
    expect(after.selector.Set.state).toBe("pending");
    expect(after.focus).toBe(1);
  });

  it("replaying the same responses reproduces the same view", () => {
    const script = [
      { revision: 1, focus: 1 },
      { revision: 2, focus: 0, trace: toggleTrace },
    ];
    const play = () =>
      script.reduce((v, r) => withOpResponse(v, r), withSession(initialView(), toggleSession));
    expect(play()).toEqual(play());
  });
});
