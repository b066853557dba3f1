// Application wiring: one session, one in-flight mutating operation.
// Further operation clicks are queued until the current one settles, and
// selector clicks are dropped unless the type is currently enabled.

import { ServiceClient } from "./api.js";
import type { OpRequest, SessionCreated } from "./api.js";
import { render } from "./render.js";
import type { Handlers } from "./render.js";
import {
  initialView,
  withOpResponse,
  withPendingOp,
  withSession,
  withToast,
  withTypeProbe,
} from "./store.js";
import type { ViewState } from "./store.js";

export class App {
  view: ViewState = initialView();
  private queue: OpRequest[] = [];
  private cancelStream: (() => void) | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly root: HTMLElement,
  ) {}

  private repaint(): void {
    render(this.root, this.view, this.handlers());
  }

  private handlers(): Handlers {
    return {
      onForward: () => this.submit({ op: "forward" }),
      onBackward: () => this.submit({ op: "backward" }),
      onAltState: (side) =>
        side === "left"
          ? this.submit({ op: "alt_state" })
          : this.submitSequence([{ op: "forward" }, { op: "alt_state" }, { op: "backward" }]),
      onAltEvent: () => this.submit({ op: "alt_event" }),
      onSelectType: (name) => {
        if (this.view.selector[name]?.state !== "enabled") {
          return; // never issue an op for a type not currently enabled
        }
        this.submit({ op: "set_type", type: name });
      },
    };
  }

  async start(body: {
    model: string;
    property: string;
    bound?: number;
    mode?: string;
    add_idle?: boolean;
  }): Promise<"session" | "holds"> {
    const created = await this.client.createSession(body);
    if ("propertyHolds" in created) {
      this.view = withToast(this.view, `holds within bound ${created.propertyHolds.bound}`);
      this.repaint();
      return "holds";
    }
    this.view = withSession(this.view, created as SessionCreated);
    this.repaint();
    this.refreshEnabled();
    return "session";
  }

  submit(op: OpRequest): void {
    this.queue.push(op);
    void this.drain();
  }

  submitSequence(ops: OpRequest[]): void {
    this.queue.push(...ops);
    void this.drain();
  }

  private draining = false;

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    try {
      while (this.queue.length > 0) {
        const op = this.queue.shift()!;
        await this.runOne(op);
      }
    } finally {
      this.draining = false;
    }
  }

  private async runOne(op: OpRequest): Promise<void> {
    const sid = this.view.sessionId;
    if (!sid) return;
    this.view = withPendingOp(this.view, true);
    this.repaint();
    const before = this.view.revision;
    try {
      const response = await this.client.applyOp(sid, op);
      this.view = withOpResponse(this.view, response);
      if (response.revision !== before && !response.noAlternative) {
        this.refreshEnabled();
      }
    } catch (err) {
      this.view = withToast(this.view, err instanceof Error ? err.message : String(err));
    } finally {
      this.view = withPendingOp(this.view, false);
      this.repaint();
    }
  }

  refreshEnabled(): void {
    const sid = this.view.sessionId;
    if (!sid) return;
    this.cancelStream?.();
    const expected = this.view.revision;
    this.cancelStream = this.client.streamEnabled(
      sid,
      (name, entry, revision) => {
        if (revision !== this.view.revision || revision !== expected) return;
        this.view = withTypeProbe(this.view, name, entry);
        this.repaint();
      },
      () => {},
    );
  }
}

export function boot(doc: Document): void {
  const root = doc.getElementById("app");
  const form = doc.getElementById("session-form") as HTMLFormElement | null;
  if (!root || !form) return;
  const base = (doc.getElementById("service-url") as HTMLInputElement).value;
  const app = new App(new ServiceClient(base), root);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const model = (doc.getElementById("model-source") as HTMLTextAreaElement).value;
    const property = (doc.getElementById("property-text") as HTMLInputElement).value;
    const bound = Number((doc.getElementById("bound") as HTMLInputElement).value) || 10;
    const mode = (doc.getElementById("mode") as HTMLSelectElement).value;
    void app.start({ model, property, bound, mode });
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document);
}
