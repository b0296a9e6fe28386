/**
 * Entry point for the static bundle. Reads config.json (which must sit
 * next to index.html), builds the API client, and mounts the app.
 */

import { ApiClient } from "./api";
import { DEFAULT_MAX_CLAIM_TOKENS, mountApp } from "./app";

interface AppConfig {
  api_base_url: string;
  max_claim_tokens?: number;
}

async function loadConfig(): Promise<AppConfig> {
  const res = await fetch("./config.json");
  if (!res.ok) throw new Error(`config.json: HTTP ${res.status}`);
  const raw: unknown = await res.json();
  if (
    !raw ||
    typeof raw !== "object" ||
    typeof (raw as { api_base_url?: unknown }).api_base_url !== "string"
  ) {
    throw new Error("config.json must define api_base_url");
  }
  return raw as AppConfig;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  try {
    const config = await loadConfig();
    mountApp(root, new ApiClient(config.api_base_url), {
      maxClaimTokens: config.max_claim_tokens ?? DEFAULT_MAX_CLAIM_TOKENS,
    });
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    root.textContent = "Failed to start: " + message;
    throw err;
  }
}

void boot();
