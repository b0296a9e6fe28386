/**
 * Turns the retrieval panel's raw field text into an overrides object,
 * enforcing the same bounds the service does (counts are whole numbers
 * of at least 1, the threshold lies in [-1, 1]) so a bad value is caught
 * inline instead of as a 400.
 */

import type { RetrievalOverrides } from "./api";
import { t } from "./i18n";

/** Server-side defaults, shown as placeholders and in history rows. */
export const RETRIEVAL_DEFAULTS = {
  similarity_threshold: 0.5,
  top_k: 5,
  n_keyword_docs: 5,
  n_vector_chunks: 25,
} as const;

export type PanelField = keyof RetrievalOverrides;

export interface PanelValues {
  similarity_threshold: string;
  top_k: string;
  n_keyword_docs: string;
  n_vector_chunks: string;
}

export interface FieldError {
  field: PanelField;
  message: string;
}

export type PanelResult =
  | { ok: true; overrides: RetrievalOverrides }
  | { ok: false; errors: FieldError[] };

const COUNT_FIELDS: PanelField[] = ["top_k", "n_keyword_docs", "n_vector_chunks"];

function parseCount(raw: string): number | null {
  if (!/^[0-9]+$/.test(raw)) return null;
  const value = Number(raw);
  return value >= 1 ? value : null;
}

function parseThreshold(raw: string): number | null {
  const value = Number(raw);
  if (!Number.isFinite(value)) return null;
  return value >= -1 && value <= 1 ? value : null;
}

/**
 * A blank field means "keep the server default" and is simply omitted
 * from the overrides object; only explicit values travel in the request.
 */
export function parsePanel(values: PanelValues): PanelResult {
  const overrides: RetrievalOverrides = {};
  const errors: FieldError[] = [];

  const threshold = values.similarity_threshold.trim();
  if (threshold !== "") {
    const parsed = parseThreshold(threshold);
    if (parsed === null) {
      errors.push({ field: "similarity_threshold", message: t("thresholdRange") });
    } else {
      overrides.similarity_threshold = parsed;
    }
  }

  for (const field of COUNT_FIELDS) {
    const raw = values[field].trim();
    if (raw === "") continue;
    const parsed = parseCount(raw);
    if (parsed === null) {
      errors.push({ field, message: t("positiveInteger") });
    } else {
      overrides[field] = parsed;
    }
  }

  if (errors.length > 0) return { ok: false, errors };
  return { ok: true, overrides };
}

/** Compact "τ=0.7, top_k=3" summary of one submission's overrides. */
export function describeOverrides(overrides: RetrievalOverrides): string {
  const parts: string[] = [];
  if (overrides.similarity_threshold !== undefined) {
    parts.push("τ=" + overrides.similarity_threshold);
  }
  if (overrides.top_k !== undefined) parts.push("top_k=" + overrides.top_k);
  if (overrides.n_keyword_docs !== undefined) {
    parts.push("keyword_docs=" + overrides.n_keyword_docs);
  }
  if (overrides.n_vector_chunks !== undefined) {
    parts.push("vector_chunks=" + overrides.n_vector_chunks);
  }
  return parts.join(", ");
}
