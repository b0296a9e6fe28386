/**
 * Typed client for the verification service's /v1 HTTP API.
 *
 * The interfaces here mirror the JSON the service actually emits; nothing
 * is renamed or reshaped on the way in, so a payload field and its
 * TypeScript property always spell the same.
 */

export interface Reference {
  number: number;
  title: string;
  source_name: string;
  url: string | null;
  published_date: string | null;
}

export interface Verdict {
  label: string | null;
  valid: boolean;
  analysis: string;
  references: Reference[];
  citations: number[];
  warnings: string[];
  raw_completion: string;
}

export interface StageTimings {
  recall_ms: number;
  hypothesis_ms: number;
  rerank_ms: number;
  generation_ms: number;
}

export interface DetectResult {
  verdict: Verdict;
  used_references: boolean;
  timings_ms: StageTimings;
  degraded: string[];
}

/** Optional per-request retrieval knobs; omitted fields keep server defaults. */
export interface RetrievalOverrides {
  top_k?: number;
  similarity_threshold?: number;
  n_keyword_docs?: number;
  n_vector_chunks?: number;
}

export interface CorpusStats {
  documents: number;
  chunks: number;
  vector_entries: number;
  embedding_dimension: number | null;
  kernel_backend: string;
}

export interface HealthStatus {
  status: string;
  version: string;
  documents: number;
  chunks: number;
}

/**
 * A failed API call. `code` is the machine-readable error code from the
 * service's {code, message, detail} envelope, or "network_error" /
 * "bad_response" when the failure happened before an envelope arrived.
 */
export class ApiError extends Error {
  code: string;
  status: number | null;
  detail: unknown;

  constructor(code: string, message: string, status: number | null = null, detail: unknown = null) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.detail = detail;
  }
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

async function errorFromResponse(res: Response): Promise<ApiError> {
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    // non-JSON error body; fall through to the generic error below
  }
  if (body && typeof body === "object" && "code" in body && "message" in body) {
    const envelope = body as { code: unknown; message: unknown; detail?: unknown };
    return new ApiError(
      String(envelope.code),
      String(envelope.message),
      res.status,
      envelope.detail ?? null,
    );
  }
  return new ApiError("bad_response", `HTTP ${res.status}`, res.status, null);
}

export class ApiClient {
  private baseUrl: string;
  private fetchFn: typeof fetch;

  /** `fetchFn` is injectable so tests can stub the transport. */
  constructor(baseUrl: string, fetchFn: typeof fetch = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request(path: string, init: RequestInit): Promise<unknown> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      if (isAbort(err)) throw err; // cancellation is not a failure
      const message = err instanceof Error ? err.message : String(err);
      throw new ApiError("network_error", message);
    }
    if (!res.ok) throw await errorFromResponse(res);
    try {
      return await res.json();
    } catch {
      throw new ApiError("bad_response", "response body is not JSON", res.status);
    }
  }

  /**
   * POST /v1/detect. Overrides ride under the request's "config" key and
   * are sent only when at least one knob is set, so the server's own
   * defaults stay authoritative.
   */
  async detect(
    claim: string,
    overrides?: RetrievalOverrides,
    signal?: AbortSignal,
  ): Promise<DetectResult> {
    const body: { claim: string; config?: RetrievalOverrides } = { claim };
    if (overrides && Object.keys(overrides).length > 0) {
      body.config = overrides;
    }
    const payload = await this.request("/v1/detect", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal: signal ?? null,
    });
    return payload as DetectResult;
  }

  /** GET /v1/corpus/stats. */
  async stats(signal?: AbortSignal): Promise<CorpusStats> {
    const payload = await this.request("/v1/corpus/stats", {
      method: "GET",
      signal: signal ?? null,
    });
    return payload as CorpusStats;
  }

  /** GET /healthz. */
  async health(signal?: AbortSignal): Promise<HealthStatus> {
    const payload = await this.request("/healthz", {
      method: "GET",
      signal: signal ?? null,
    });
    return payload as HealthStatus;
  }
}
