/** Shared fixtures: payload builders, a scriptable fetch stub, and an
 * in-memory Storage, so every test runs without a server or a browser
 * session behind it. */

import type { DetectResult, Reference } from "../src/api";

export function makeReference(number: number, extra: Partial<Reference> = {}): Reference {
  return {
    number,
    title: `Reference ${number}`,
    source_name: "Health Desk",
    url: `https://example.org/articles/${number}`,
    published_date: "2024-05-0" + number,
    ...extra,
  };
}

export interface ResultOptions {
  label?: string | null;
  valid?: boolean;
  analysis?: string;
  references?: Reference[];
  citations?: number[];
  warnings?: string[];
  raw_completion?: string;
  used_references?: boolean;
  degraded?: string[];
}

export function makeResult(options: ResultOptions = {}): DetectResult {
  const references = options.references ?? [makeReference(1)];
  return {
    verdict: {
      label: options.label === undefined ? "Rumor" : options.label,
      valid: options.valid ?? true,
      analysis: options.analysis ?? "Refuted directly by [1].",
      references,
      citations: options.citations ?? references.map((r) => r.number),
      warnings: options.warnings ?? [],
      raw_completion: options.raw_completion ?? "[Conclusion] Rumor\n[Analysis] Refuted directly by [1].",
    },
    used_references: options.used_references ?? true,
    timings_ms: { recall_ms: 1.2, hypothesis_ms: 3.4, rerank_ms: 0.5, generation_ms: 8.9 },
    degraded: options.degraded ?? [],
  };
}

export interface CapturedRequest {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
  signal: AbortSignal | null;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

type Responder = (req: CapturedRequest) => Response | Promise<Response>;

/**
 * A fetch replacement that records every request and answers from a
 * FIFO of scripted responders, falling back to `defaultResponder`.
 * `hang()` scripts a request that never settles until its signal aborts.
 */
export class FetchStub {
  requests: CapturedRequest[] = [];
  private queue: Responder[] = [];
  private defaultResponder: Responder;

  constructor(defaultResponder?: Responder) {
    this.defaultResponder = defaultResponder ?? (() => jsonResponse(makeResult()));
  }

  respondJson(payload: unknown, status = 200): void {
    this.queue.push(() => jsonResponse(payload, status));
  }

  respondWith(responder: Responder): void {
    this.queue.push(responder);
  }

  hang(): void {
    this.queue.push(
      (req) =>
        new Promise<Response>((_, reject) => {
          req.signal?.addEventListener("abort", () =>
            reject(new DOMException("The operation was aborted.", "AbortError")),
          );
        }),
    );
  }

  fetchFn: typeof fetch = async (input, init) => {
    const url = typeof input === "string" ? input : input instanceof URL ? input.href : input.url;
    const headers: Record<string, string> = {};
    const rawHeaders = init?.headers;
    if (rawHeaders && !(rawHeaders instanceof Headers) && !Array.isArray(rawHeaders)) {
      Object.assign(headers, rawHeaders);
    }
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    const req: CapturedRequest = {
      url,
      method: init?.method ?? "GET",
      headers,
      body,
      signal: init?.signal ?? null,
    };
    this.requests.push(req);
    const responder = this.queue.shift() ?? this.defaultResponder;
    return responder(req);
  };
}

/** Minimal Storage so history tests never touch real session storage. */
export class MemoryStorage implements Storage {
  private map = new Map<string, string>();

  get length(): number {
    return this.map.size;
  }

  clear(): void {
    this.map.clear();
  }

  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }

  key(index: number): string | null {
    return Array.from(this.map.keys())[index] ?? null;
  }

  removeItem(key: string): void {
    this.map.delete(key);
  }

  setItem(key: string, value: string): void {
    this.map.set(key, String(value));
  }
}
