// Typed client for the exploration session service.
//
// All methods resolve with parsed payloads and reject with ServiceError for
// protocol-level failures. The fetch implementation is injectable so tests
// can count or stub network traffic.

export interface TraceStatePayload {
  id: number;
  props: Record<string, boolean | string>;
}

export interface TraceEventPayload {
  name: string;
  args: string[];
  type: string;
}

export interface TracePayload {
  states: TraceStatePayload[];
  events: TraceEventPayload[];
  loopStart: number;
  focus: number;
}

export interface SessionInfo {
  id: string;
  model: string;
  property: string;
  bound: number;
  mode: string;
}

export interface SessionCreated {
  session: SessionInfo;
  revision: number;
  trace: TracePayload;
}

export interface PropertyHolds {
  propertyHolds: { bound: number };
}

export interface EnabledEntry {
  enabled: boolean;
  ms: number;
}

export interface EnabledPayload {
  revision: number;
  types: Record<string, EnabledEntry>;
}

export interface OpResponse {
  revision: number;
  focus: number;
  trace?: TracePayload;
  noAlternative?: boolean;
}

export type OpRequest =
  | { op: "forward" | "backward" | "alt_state" | "alt_event" }
  | { op: "set_type"; type: string };

export interface ErrorPayload {
  code: string;
  message: string;
  location?: { line: number; col: number };
}

export class ServiceError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, payload: ErrorPayload) {
    super(`${payload.code}: ${payload.message}`);
    this.code = payload.code;
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await res.json();
    if (!res.ok) {
      throw new ServiceError(res.status, body as ErrorPayload);
    }
    return body as T;
  }

  createSession(body: {
    model: string;
    property: string;
    bound?: number;
    mode?: string;
    add_idle?: boolean;
  }): Promise<SessionCreated | PropertyHolds> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  applyOp(sessionId: string, op: OpRequest): Promise<OpResponse> {
    return this.request(`/sessions/${sessionId}/op`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(op),
    });
  }

  getTrace(sessionId: string): Promise<{ revision: number; trace: TracePayload }> {
    return this.request(`/sessions/${sessionId}/trace`);
  }

  getEnabled(sessionId: string): Promise<EnabledPayload> {
    return this.request(`/sessions/${sessionId}/enabled`);
  }

  /**
   * Incrementally deliver per-type probe results.
   *
   * Uses the server-push channel when the environment provides EventSource;
   * otherwise falls back to one plain GET delivering all entries at once.
   * Returns a cancel function: once called, no further callbacks fire.
   */
  streamEnabled(
    sessionId: string,
    onEntry: (name: string, entry: EnabledEntry, revision: number) => void,
    onDone: (revision: number) => void,
  ): () => void {
    let cancelled = false;
    const EventSourceCtor = (globalThis as { EventSource?: new (url: string) => EventSource })
      .EventSource;
    if (EventSourceCtor) {
      const source = new EventSourceCtor(
        `${this.baseUrl}/sessions/${sessionId}/enabled/stream`,
      );
      source.onmessage = (msg) => {
        if (cancelled) return;
        const data = JSON.parse(msg.data);
        if (data.done) {
          source.close();
          onDone(data.revision);
        } else {
          onEntry(data.type, { enabled: data.enabled, ms: data.ms }, data.revision);
        }
      };
      source.onerror = () => {
        source.close();
      };
      return () => {
        cancelled = true;
        source.close();
      };
    }
    this.getEnabled(sessionId)
      .then((payload) => {
        if (cancelled) return;
        for (const [name, entry] of Object.entries(payload.types)) {
          onEntry(name, entry, payload.revision);
        }
        onDone(payload.revision);
      })
      .catch(() => {
        /* surfaced on the next explicit poll */
      });
    return () => {
      cancelled = true;
    };
  }
}
