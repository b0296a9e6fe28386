/**
 * Per-tab history of checks, kept in session storage. Append-only: the
 * UI never edits or deletes an entry, so a claim re-run under different
 * settings keeps both rows for comparison. Nothing leaves the browser.
 */

import type { DetectResult, RetrievalOverrides } from "./api";

export interface ClaimSession {
  claim: string;
  result: DetectResult;
  submitted_at: string;
  overrides: RetrievalOverrides;
}

const STORAGE_KEY = "claimcheck.history.v1";

export class SessionHistory {
  private storage: Storage | null;
  private sessions: ClaimSession[];

  /** `storage` is injectable for tests; defaults to sessionStorage. */
  constructor(storage?: Storage) {
    this.storage = storage ?? defaultStorage();
    this.sessions = this.load();
  }

  private load(): ClaimSession[] {
    if (!this.storage) return [];
    try {
      const raw = this.storage.getItem(STORAGE_KEY);
      if (!raw) return [];
      const parsed: unknown = JSON.parse(raw);
      return Array.isArray(parsed) ? (parsed as ClaimSession[]) : [];
    } catch {
      return [];
    }
  }

  private persist(): void {
    if (!this.storage) return;
    try {
      this.storage.setItem(STORAGE_KEY, JSON.stringify(this.sessions));
    } catch {
      // storage may be full or blocked; history then lives only in memory
    }
  }

  all(): ClaimSession[] {
    return this.sessions.slice();
  }

  push(session: ClaimSession): void {
    this.sessions.push(session);
    this.persist();
  }
}

function defaultStorage(): Storage | null {
  try {
    return window.sessionStorage;
  } catch {
    return null;
  }
}
