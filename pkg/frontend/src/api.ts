/** Thin fetch client for the annotation server. No retries: a failed call
 * surfaces as an error the UI must show (never a silent loop). */

import type { EditRequest, PeaksDoc, RrDoc, SessionInfo, SignalDoc } from "./types.js";

export class VersionConflictError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "VersionConflictError";
  }
}

export class ServerError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ServerError";
  }
}

async function parseError(resp: Response): Promise<never> {
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    /* non-JSON error body */
  }
  if (resp.status === 409) throw new VersionConflictError(message);
  throw new ServerError(resp.status, message);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as T;
  }

  sessions(): Promise<{ sessions: SessionInfo[] }> {
    return this.get("/api/sessions");
  }

  peaks(sessionId: string): Promise<PeaksDoc> {
    return this.get(`/api/session/${sessionId}/peaks`);
  }

  rr(sessionId: string): Promise<RrDoc> {
    return this.get(`/api/session/${sessionId}/rr`);
  }

  signal(sessionId: string, from: number, to: number, maxPoints: number): Promise<SignalDoc> {
    const q = `from=${from}&to=${to}&max_points=${maxPoints}`;
    return this.get(`/api/session/${sessionId}/signal?${q}`);
  }

  edit(sessionId: string, request: EditRequest): Promise<PeaksDoc> {
    return this.post(`/api/session/${sessionId}/edit`, request);
  }

  export(sessionId: string): Promise<unknown> {
    return this.post(`/api/session/${sessionId}/export`, {});
  }
}
