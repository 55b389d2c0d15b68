/** Typed client for the roomsynth session service HTTP API. */

export interface BindingRecord {
  name: string;
  type: string;
  digest: string;
  file: string;
  url: string;
}

export interface StepRecord {
  index: number;
  instruction: string;
  program: string;
  status: "ok" | "failed";
  bindings: BindingRecord[];
  error: string | null;
  created: number;
}

export interface SessionRecord {
  id: string;
  steps: StepRecord[];
  bindings: Record<string, { type: string; digest: string; url: string }>;
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ServiceError";
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ServiceError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(): Promise<SessionRecord> {
    return asJson(await fetch(this.url("/sessions"), { method: "POST" }));
  }

  /** Fork `sessionId` at `step` into a fresh, independent session. */
  async forkSession(sessionId: string, step: number): Promise<SessionRecord> {
    const q = encodeURIComponent(`${sessionId},${step}`);
    return asJson(
      await fetch(this.url(`/sessions?from=${q}`), { method: "POST" }),
    );
  }

  async getSession(sessionId: string): Promise<SessionRecord> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}`)));
  }

  async getStep(sessionId: string, n: number): Promise<StepRecord> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}/steps/${n}`)));
  }

  async submitInstruction(
    sessionId: string,
    instruction: string,
  ): Promise<StepRecord> {
    return asJson(
      await fetch(this.url(`/sessions/${sessionId}/instructions`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ instruction }),
      }),
    );
  }

  artifactUrl(digest: string): string {
    return this.url(`/artifacts/${digest}`);
  }

  async fetchArtifactBytes(digest: string): Promise<Uint8Array> {
    const resp = await fetch(this.artifactUrl(digest));
    if (!resp.ok) throw new ServiceError(resp.status, "artifact fetch failed");
    return new Uint8Array(await resp.arrayBuffer());
  }

  async fetchArtifactJson<T>(digest: string): Promise<T> {
    return asJson(await fetch(this.artifactUrl(digest)));
  }
}
