/**
 * Typed client for the pipeline service. Every UI action funnels through
 * exactly one of these methods, and every request is appended to `log`,
 * which doubles as the audit trail asserted by the purity tests.
 */

import type { AdvanceParams, EditOp, Session, Template } from "./types.js";

export interface NetworkLogEntry {
  method: string;
  path: string;
  status: number;
}

export interface ErrorBody {
  error: string;
  detail: string;
  violations?: { path: string; rule: string; message: string }[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ErrorBody,
  ) {
    super(`${body.error}: ${body.detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly log: NetworkLogEntry[] = [];
  private readonly fetchFn: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    const bound = fetchFn ?? (globalThis.fetch as FetchLike | undefined);
    if (!bound) {
      throw new Error("no fetch implementation available");
    }
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    this.log.push({ method, path, status: response.status });
    if (!response.ok) {
      let parsed: ErrorBody;
      try {
        parsed = (await response.json()) as ErrorBody;
      } catch {
        parsed = { error: "HttpError", detail: `status ${response.status}` };
      }
      throw new ApiError(response.status, parsed);
    }
    return response;
  }

  async createSession(inputText: string, style?: unknown): Promise<Session> {
    const body: Record<string, unknown> = { input_text: inputText };
    if (style !== undefined) {
      body.style = style;
    }
    const response = await this.request("POST", "/sessions", body);
    return (await response.json()) as Session;
  }

  async getSession(id: string): Promise<Session> {
    const response = await this.request("GET", `/sessions/${id}`);
    return (await response.json()) as Session;
  }

  async advance(id: string, params?: AdvanceParams): Promise<Session> {
    const body = params ? { params } : {};
    const response = await this.request("POST", `/sessions/${id}/advance`, body);
    return (await response.json()) as Session;
  }

  async iterate(id: string, edits: EditOp[], expand?: unknown): Promise<Session> {
    const body: Record<string, unknown> = { edits };
    if (expand !== undefined) {
      body.expand = expand;
    }
    const response = await this.request("POST", `/sessions/${id}/iterate`, body);
    return (await response.json()) as Session;
  }

  async iterationSvg(id: string, n: number): Promise<string> {
    const response = await this.request("GET", `/sessions/${id}/iterations/${n}/svg`);
    return response.text();
  }

  async iterationPrompt(id: string, n: number): Promise<string> {
    const response = await this.request("GET", `/sessions/${id}/iterations/${n}/prompt`);
    return response.text();
  }

  async templates(): Promise<Template[]> {
    const response = await this.request("GET", "/templates");
    return (await response.json()) as Template[];
  }
}

/** Documented endpoint shapes; the purity test checks the log against these. */
export const DOCUMENTED_ENDPOINTS: { method: string; pattern: RegExp }[] = [
  { method: "POST", pattern: /^\/sessions$/ },
  { method: "GET", pattern: /^\/sessions\/[^/]+$/ },
  { method: "POST", pattern: /^\/sessions\/[^/]+\/advance$/ },
  { method: "POST", pattern: /^\/sessions\/[^/]+\/iterate$/ },
  { method: "GET", pattern: /^\/sessions\/[^/]+\/iterations\/\d+\/svg$/ },
  { method: "GET", pattern: /^\/sessions\/[^/]+\/iterations\/\d+\/prompt$/ },
  { method: "GET", pattern: /^\/templates$/ },
];

export function isDocumentedCall(entry: NetworkLogEntry): boolean {
  return DOCUMENTED_ENDPOINTS.some(
    (e) => e.method === entry.method && e.pattern.test(entry.path),
  );
}
