import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { FetchStub, jsonResponse, makeResult } from "./helpers";

describe("ApiClient.detect", () => {
  it("posts the claim as JSON to /v1/detect", async () => {
    const stub = new FetchStub();
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const result = await client.detect("red wine prevents heart disease");

    expect(stub.requests).toHaveLength(1);
    const req = stub.requests[0]!;
    expect(req.url).toBe("http://api.test/v1/detect");
    expect(req.method).toBe("POST");
    expect(req.headers["content-type"]).toBe("application/json");
    expect(req.body).toEqual({ claim: "red wine prevents heart disease" });
    expect(result.verdict.label).toBe("Rumor");
  });

  it("omits the config key when no overrides are set", async () => {
    const stub = new FetchStub();
    const client = new ApiClient("http://api.test", stub.fetchFn);

    await client.detect("claim one");
    await client.detect("claim two", {});

    expect(stub.requests[0]!.body).not.toHaveProperty("config");
    expect(stub.requests[1]!.body).not.toHaveProperty("config");
  });

  it("carries overrides under the config key", async () => {
    const stub = new FetchStub();
    const client = new ApiClient("http://api.test", stub.fetchFn);

    await client.detect("claim", { similarity_threshold: 0.7, top_k: 3 });

    expect(stub.requests[0]!.body).toEqual({
      claim: "claim",
      config: { similarity_threshold: 0.7, top_k: 3 },
    });
  });

  it("trims trailing slashes off the base URL", async () => {
    const stub = new FetchStub();
    const client = new ApiClient("http://api.test///", stub.fetchFn);

    await client.detect("claim");

    expect(stub.requests[0]!.url).toBe("http://api.test/v1/detect");
  });

  it("turns an error envelope into an ApiError", async () => {
    const stub = new FetchStub();
    stub.respondJson(
      { code: "query_too_long", message: "query is about 9000 tokens, over the limit of 4000", detail: null },
      400,
    );
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const err = await client.detect("claim").catch((e: unknown) => e);

    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.code).toBe("query_too_long");
    expect(apiErr.status).toBe(400);
    expect(apiErr.message).toContain("9000 tokens");
  });

  it("keeps the upstream failure code from a 502", async () => {
    const stub = new FetchStub();
    stub.respondJson({ code: "upstream_status", message: "chat backend returned 503", detail: null }, 502);
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const err = (await client.detect("claim").catch((e: unknown) => e)) as ApiError;

    expect(err.code).toBe("upstream_status");
    expect(err.status).toBe(502);
  });

  it("labels a non-envelope error body bad_response", async () => {
    const stub = new FetchStub();
    stub.respondWith(() => new Response("<html>gateway timeout</html>", { status: 504 }));
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const err = (await client.detect("claim").catch((e: unknown) => e)) as ApiError;

    expect(err.code).toBe("bad_response");
    expect(err.status).toBe(504);
  });

  it("labels transport failures network_error", async () => {
    const failing: typeof fetch = () => Promise.reject(new TypeError("connection refused"));
    const client = new ApiClient("http://api.test", failing);

    const err = (await client.detect("claim").catch((e: unknown) => e)) as ApiError;

    expect(err.code).toBe("network_error");
    expect(err.message).toContain("connection refused");
  });

  it("lets an abort pass through untouched", async () => {
    const aborting: typeof fetch = () =>
      Promise.reject(new DOMException("The operation was aborted.", "AbortError"));
    const client = new ApiClient("http://api.test", aborting);

    const err = await client.detect("claim").catch((e: unknown) => e);

    expect(err).toBeInstanceOf(DOMException);
    expect((err as DOMException).name).toBe("AbortError");
  });
});

describe("ApiClient reads", () => {
  it("fetches corpus stats", async () => {
    const stub = new FetchStub(() =>
      jsonResponse({
        documents: 50,
        chunks: 96,
        vector_entries: 96,
        embedding_dimension: 64,
        kernel_backend: "native",
      }),
    );
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const stats = await client.stats();

    expect(stub.requests[0]!.url).toBe("http://api.test/v1/corpus/stats");
    expect(stub.requests[0]!.method).toBe("GET");
    expect(stats.documents).toBe(50);
  });

  it("fetches health", async () => {
    const stub = new FetchStub(() =>
      jsonResponse({ status: "ok", version: "0.1.0", documents: 0, chunks: 0 }),
    );
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const health = await client.health();

    expect(stub.requests[0]!.url).toBe("http://api.test/healthz");
    expect(health.status).toBe("ok");
  });

  it("rejects a 200 whose body is not JSON", async () => {
    const stub = new FetchStub(() => new Response("plain text", { status: 200 }));
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const err = (await client.stats().catch((e: unknown) => e)) as ApiError;

    expect(err.code).toBe("bad_response");
  });
});

describe("detect result shape", () => {
  it("exposes the payload fields without renaming", async () => {
    const stub = new FetchStub();
    stub.respondJson(makeResult({ used_references: false, degraded: ["embeddings unavailable"] }));
    const client = new ApiClient("http://api.test", stub.fetchFn);

    const result = await client.detect("claim");

    expect(result.used_references).toBe(false);
    expect(result.degraded).toEqual(["embeddings unavailable"]);
    expect(result.timings_ms.generation_ms).toBeCloseTo(8.9);
    expect(result.verdict.references[0]!.source_name).toBe("Health Desk");
  });
});
