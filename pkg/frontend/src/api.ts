// Typed client for the session service. The event stream uses fetch +
// ReadableStream rather than EventSource so the same code runs in the
// browser and in node-based tests.

export interface TurnInfo {
  turn: number;
  executable: boolean;
  queries: number;
  seeds: number[];
  errors: string[];
  transport_error: string | null;
  canceled: boolean;
  has_code: boolean;
  diagnostics: string;
  scenes: number[];
}

export interface SessionInfo {
  id: string;
  description?: string;
  state: string;
  turn: number;
  max_turns?: number;
  map?: string;
  turns: TurnInfo[];
  event_seq: number;
  busy?: boolean;
}

export interface SessionEvent {
  seq: number;
  event: string;
  data: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

export class SessionApi {
  constructor(public base: string = "") {}

  async createSession(description: string): Promise<string> {
    const response = await expectOk(await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ description }),
    }));
    const body = await response.json();
    return body.id as string;
  }

  async getSession(id: string): Promise<SessionInfo> {
    const response = await expectOk(await fetch(`${this.base}/sessions/${id}`));
    return (await response.json()) as SessionInfo;
  }

  async getCode(id: string, turn: number): Promise<string> {
    const response = await expectOk(
      await fetch(`${this.base}/sessions/${id}/turns/${turn}/code`));
    return response.text();
  }

  async getTrace(id: string, turn: number, scene: number): Promise<string> {
    const response = await expectOk(
      await fetch(`${this.base}/sessions/${id}/turns/${turn}/scenes/${scene}/trace`));
    return response.text();
  }

  async getMapText(): Promise<string> {
    const response = await expectOk(await fetch(`${this.base}/map`));
    return response.text();
  }

  async comment(id: string, text: string): Promise<void> {
    await expectOk(await fetch(`${this.base}/sessions/${id}/comment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    }));
  }

  async accept(id: string): Promise<void> {
    await expectOk(await fetch(`${this.base}/sessions/${id}/accept`, {
      method: "POST",
    }));
  }

  async cancel(id: string): Promise<void> {
    await expectOk(await fetch(`${this.base}/sessions/${id}/cancel`, {
      method: "POST",
    }));
  }

  /**
   * Subscribe to the session's server-sent events. Resumes after
   * `afterSeq`; reconnects automatically with the last seen sequence
   * number until `stop()` is called.
   */
  subscribe(
    id: string,
    afterSeq: number,
    onEvent: (event: SessionEvent) => void,
    onError?: (err: unknown) => void,
  ): { stop: () => void } {
    let stopped = false;
    let lastSeq = afterSeq;
    const controller = { current: new AbortController() };

    const loop = async () => {
      while (!stopped) {
        try {
          controller.current = new AbortController();
          const response = await fetch(
            `${this.base}/sessions/${id}/events?after=${lastSeq}`,
            { signal: controller.current.signal },
          );
          if (!response.ok || !response.body) throw new ApiError(response.status, "stream failed");
          for await (const event of parseSseStream(response.body)) {
            if (stopped) break;
            lastSeq = event.seq;
            onEvent(event);
          }
        } catch (err) {
          if (stopped) return;
          if (onError) onError(err);
        }
        if (!stopped) await new Promise((r) => setTimeout(r, 300));
      }
    };
    void loop();
    return {
      stop: () => {
        stopped = true;
        controller.current.abort();
      },
    };
  }
}

/** Parse a text/event-stream body into session events. */
export async function* parseSseStream(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<SessionEvent> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { value, done } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let split;
    while ((split = buffer.indexOf("\n\n")) >= 0) {
      const chunk = buffer.slice(0, split);
      buffer = buffer.slice(split + 2);
      const event = parseSseChunk(chunk);
      if (event) yield event;
    }
  }
}

export function parseSseChunk(chunk: string): SessionEvent | null {
  let seq = -1;
  let kind = "";
  let data: Record<string, unknown> = {};
  for (const line of chunk.split("\n")) {
    if (line.startsWith("id: ")) seq = parseInt(line.slice(4), 10);
    else if (line.startsWith("event: ")) kind = line.slice(7).trim();
    else if (line.startsWith("data: ")) {
      try {
        data = JSON.parse(line.slice(6));
      } catch {
        data = {};
      }
    }
  }
  if (seq < 0 || !kind) return null;
  return { seq, event: kind, data };
}
