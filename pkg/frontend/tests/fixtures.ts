// Recorded payloads for the two-state toggle session (property "G !p").

import type { SessionCreated, TracePayload } from "../src/api.js";

export const toggleTrace: TracePayload = {
  states: [
    { id: 0, props: { p: false } },
    { id: 1, props: { p: true } },
  ],
  events: [
    { name: "Set", args: ["a"], type: "Set" },
    { name: "Stay", args: [], type: "Stay" },
  ],
  loopStart: 1,
  focus: 0,
};

export const toggleSession: SessionCreated = {
  session: {
    id: "fixture",
    model: "toggle",
    property: "G !p",
    bound: 4,
    mode: "counterexample",
  },
  revision: 0,
  trace: toggleTrace,
};
