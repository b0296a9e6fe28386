/**
 * Render-to-string views. Every function here is pure: payload in, HTML
 * string out, so the whole presentation layer is testable without a
 * browser. All dynamic text is escaped; the only markup injected into
 * analysis text is the citation anchors.
 */

import type { DetectResult, Reference, RetrievalOverrides, StageTimings } from "./api";
import { ApiError } from "./api";
import { t } from "./i18n";
import { describeOverrides } from "./overrides";
import type { ClaimSession } from "./history";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const BADGE_CLASSES: Record<string, string> = {
  Rumor: "badge-rumor",
  "Not rumor": "badge-not-rumor",
  "Not related to health information": "badge-not-health",
};

function badgeClass(label: string | null): string {
  return (label && BADGE_CLASSES[label]) || "badge-unknown";
}

/**
 * Escape the analysis text, then turn each [n] marker into an in-page
 * anchor — but only when reference n is actually present in the payload.
 * Markers pointing at nothing stay plain text.
 */
export function renderAnalysis(analysis: string, references: Reference[]): string {
  const known = new Set(references.map((r) => r.number));
  const escaped = escapeHtml(analysis);
  return escaped.replace(/\[(\d+)\]/g, (marker, digits: string) => {
    const number = Number(digits);
    if (!known.has(number)) return marker;
    return `<a class="citation" href="#ref-${number}">[${number}]</a>`;
  });
}

export function renderReferenceCard(ref: Reference): string {
  const date = ref.published_date
    ? `<span class="ref-date">${escapeHtml(ref.published_date)}</span>`
    : "";
  const link = ref.url
    ? `<a class="ref-link" href="${escapeHtml(ref.url)}" target="_blank" rel="noopener noreferrer">${t("openLink")}</a>`
    : "";
  return `
    <article class="reference-card" id="ref-${ref.number}">
      <span class="ref-number">[${ref.number}]</span>
      <div class="ref-body">
        <div class="ref-title">${escapeHtml(ref.title)}</div>
        <div class="ref-meta">
          <span class="ref-source">${escapeHtml(ref.source_name)}</span>
          ${date}
          ${link}
        </div>
      </div>
    </article>`;
}

function renderList(heading: string, className: string, items: string[]): string {
  if (items.length === 0) return "";
  const lis = items.map((item) => `<li>${escapeHtml(item)}</li>`).join("");
  return `
    <section class="${className}">
      <h3>${escapeHtml(heading)}</h3>
      <ul>${lis}</ul>
    </section>`;
}

export function renderTimings(timings: StageTimings): string {
  const rows: Array<[string, number]> = [
    [t("stageRecall"), timings.recall_ms],
    [t("stageHypothesis"), timings.hypothesis_ms],
    [t("stageRerank"), timings.rerank_ms],
    [t("stageGeneration"), timings.generation_ms],
  ];
  const cells = rows
    .map(
      ([name, ms]) =>
        `<tr><td>${escapeHtml(name)}</td><td class="ms">${ms.toFixed(1)} ms</td></tr>`,
    )
    .join("");
  return `
    <details class="timings">
      <summary>${t("timingsHeading")}</summary>
      <table>${cells}</table>
    </details>`;
}

/**
 * The full result view. A verdict whose format the service could not
 * parse gets the "unparseable" state: no analysis or references are
 * shown (there are none worth trusting), just the raw completion so a
 * human can read what the model actually said.
 */
export function renderResult(result: DetectResult): string {
  const verdict = result.verdict;
  const fallbackNote = result.used_references
    ? ""
    : `<span class="badge-note">${t("fallbackNote")}</span>`;
  const warnings = renderList(t("warningsHeading"), "warnings", verdict.warnings);
  const degraded = renderList(t("degradedHeading"), "degraded", result.degraded);
  const timings = renderTimings(result.timings_ms);

  if (!verdict.valid) {
    return `
      <div class="result result-invalid">
        <div class="verdict-line">
          <span class="badge badge-unknown">${t("unparseableTitle")}</span>
          ${fallbackNote}
        </div>
        ${warnings}
        <section class="raw-completion">
          <h3>${t("rawCompletionLabel")}</h3>
          <pre>${escapeHtml(verdict.raw_completion)}</pre>
        </section>
        ${degraded}
        ${timings}
      </div>`;
  }

  const label = verdict.label === null ? t("noLabel") : verdict.label;
  const cards = verdict.references.map(renderReferenceCard).join("");
  const referencesSection =
    verdict.references.length > 0
      ? `
    <section class="references">
      <h3>${t("referencesHeading")}</h3>
      ${cards}
    </section>`
      : "";

  return `
    <div class="result">
      <div class="verdict-line">
        <span class="badge ${badgeClass(verdict.label)}">${escapeHtml(label)}</span>
        ${fallbackNote}
      </div>
      ${warnings}
      <section class="analysis">
        <h3>${t("analysisHeading")}</h3>
        <p>${renderAnalysis(verdict.analysis, verdict.references)}</p>
      </section>
      ${referencesSection}
      ${degraded}
      ${timings}
    </div>`;
}

export function renderError(err: unknown): string {
  if (err instanceof ApiError) {
    return `
      <div class="result result-error">
        <span class="error-code">${escapeHtml(err.code)}</span>
        <span class="error-message">${t("errorPrefix")}: ${escapeHtml(err.message)}</span>
      </div>`;
  }
  const message = err instanceof Error ? err.message : String(err);
  return `
    <div class="result result-error">
      <span class="error-message">${t("errorPrefix")}: ${escapeHtml(message)}</span>
    </div>`;
}

function historyLabel(session: ClaimSession): string {
  const verdict = session.result.verdict;
  if (!verdict.valid || verdict.label === null) return t("noLabel");
  return verdict.label;
}

function historySettings(overrides: RetrievalOverrides): string {
  const described = describeOverrides(overrides);
  if (described === "") return t("historyDefaults");
  return t("historyOverrides") + ": " + described;
}

/**
 * Session history, newest first. Each row repeats the knobs the claim
 * was submitted under, so two runs of one claim at different thresholds
 * read side by side.
 */
export function renderHistory(sessions: ClaimSession[]): string {
  if (sessions.length === 0) {
    return `<p class="history-empty">${t("historyEmpty")}</p>`;
  }
  const rows = sessions
    .slice()
    .reverse()
    .map((session) => {
      const badge = `<span class="badge ${badgeClass(session.result.verdict.valid ? session.result.verdict.label : null)}">${escapeHtml(historyLabel(session))}</span>`;
      return `
      <li class="history-entry">
        ${badge}
        <span class="history-claim">${escapeHtml(session.claim)}</span>
        <span class="history-settings">${escapeHtml(historySettings(session.overrides))}</span>
        <time datetime="${escapeHtml(session.submitted_at)}">${escapeHtml(session.submitted_at.replace("T", " ").slice(0, 19))}</time>
      </li>`;
    })
    .join("");
  return `<ul class="history-list">${rows}</ul>`;
}
