/**
 * Thin client for the recolorization session service.
 *
 * Endpoints: POST /sessions, GET /sessions/{id},
 * PUT /sessions/{id}/segments/{j}, POST /sessions/{id}/undo,
 * GET /sessions/{id}/result?revision=n, GET /sessions/{id}/reference,
 * GET /sessions/{id}/candidates/{cid}/thumb.
 * Errors arrive as {"error": {"code", "message"}}.
 */

export interface AssignmentEntry {
  j: number;
  candidate?: string;
  patch?: true;
}

export interface SessionSummary {
  id: string;
  revision: number;
  segments: number;
  width: number;
  height: number;
  segment_rle: number[];
  candidates: string[];
  assignment: AssignmentEntry[];
  result_url: string;
}

export interface CreateSessionResponse {
  id: string;
  segments: number;
  revision: number;
}

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async createSession(body: {
    gray_png: string;
    candidates_dir?: string;
    config?: Record<string, unknown>;
  }): Promise<CreateSessionResponse> {
    return this.requestJson("POST", "/sessions", body);
  }

  async getSession(id: string): Promise<SessionSummary> {
    return this.requestJson("GET", `/sessions/${id}`);
  }

  async swapSegment(
    id: string,
    j: number,
    candidate: string
  ): Promise<{ revision: number }> {
    return this.requestJson("PUT", `/sessions/${id}/segments/${j}`, {
      candidate,
    });
  }

  async undo(id: string): Promise<{ revision: number }> {
    return this.requestJson("POST", `/sessions/${id}/undo`);
  }

  async fetchResult(id: string, revision?: number): Promise<Blob> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    return this.requestBlob(`/sessions/${id}/result${query}`);
  }

  async fetchReference(id: string, revision?: number): Promise<Blob> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    return this.requestBlob(`/sessions/${id}/reference${query}`);
  }

  thumbUrl(id: string, cid: string): string {
    return `${this.baseUrl}/sessions/${id}/candidates/${cid}/thumb`;
  }

  private async requestJson<T>(
    method: string,
    path: string,
    body?: unknown
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      throw await this.toError(resp);
    }
    return (await resp.json()) as T;
  }

  private async requestBlob(path: string): Promise<Blob> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) {
      throw await this.toError(resp);
    }
    return resp.blob();
  }

  private async toError(resp: Response): Promise<ApiRequestError> {
    let code = "unknown";
    let message = `HTTP ${resp.status}`;
    try {
      const payload = (await resp.json()) as {
        error?: { code?: string; message?: string };
      };
      if (payload.error) {
        code = payload.error.code ?? code;
        message = payload.error.message ?? message;
      }
    } catch {
      // non-JSON error body; keep the status-line message
    }
    return new ApiRequestError(resp.status, code, message);
  }
}
