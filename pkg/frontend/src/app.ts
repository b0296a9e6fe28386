/**
 * Wiring between the DOM and the API client: one form, one result
 * region, one history list. The view itself comes from the pure render
 * functions; this module only moves values and events around.
 *
 * Concurrency rule: at most one detect request is in flight per tab.
 * Submitting again while one is pending aborts the older request, and
 * the newer one owns the result region from that moment.
 */

import type { ApiClient, DetectResult, RetrievalOverrides } from "./api";
import { SessionHistory } from "./history";
import { getLanguage, setLanguage, t } from "./i18n";
import type { MsgKey } from "./i18n";
import { RETRIEVAL_DEFAULTS, parsePanel } from "./overrides";
import type { PanelField, PanelValues } from "./overrides";
import { renderError, renderHistory, renderResult } from "./render";
import { estimateTokens } from "./tokens";

/** Matches the service's own default query budget. */
export const DEFAULT_MAX_CLAIM_TOKENS = 4000;

export interface AppOptions {
  maxClaimTokens?: number;
  history?: SessionHistory;
  /** Clock injection for tests; defaults to the real time. */
  now?: () => Date;
}

export interface AppHandle {
  /** Settles when the most recent submission has fully run its course. */
  pending: Promise<void> | null;
}

const PANEL_FIELDS: Array<{ field: PanelField; labelKey: MsgKey; defaultValue: number }> = [
  {
    field: "similarity_threshold",
    labelKey: "similarityThreshold",
    defaultValue: RETRIEVAL_DEFAULTS.similarity_threshold,
  },
  { field: "top_k", labelKey: "topK", defaultValue: RETRIEVAL_DEFAULTS.top_k },
  {
    field: "n_keyword_docs",
    labelKey: "keywordDocs",
    defaultValue: RETRIEVAL_DEFAULTS.n_keyword_docs,
  },
  {
    field: "n_vector_chunks",
    labelKey: "vectorChunks",
    defaultValue: RETRIEVAL_DEFAULTS.n_vector_chunks,
  },
];

function shellHtml(): string {
  const knobs = PANEL_FIELDS.map(
    ({ field, labelKey, defaultValue }) => `
      <label class="knob">
        <span class="knob-name">${t(labelKey)}</span>
        <input id="field-${field}" name="${field}" type="text" inputmode="decimal"
               placeholder="${t("defaultHint", { value: defaultValue })}" />
        <span class="field-error" id="error-${field}" hidden></span>
      </label>`,
  ).join("");

  return `
    <header class="top">
      <div>
        <h1>${t("appTitle")}</h1>
        <p class="tagline">${t("appTagline")}</p>
      </div>
      <button type="button" id="lang-toggle" class="lang-toggle">${t("languageToggle")}</button>
    </header>

    <form id="claim-form" class="claim-form">
      <label class="claim-label" for="claim-input">${t("claimLabel")}</label>
      <textarea id="claim-input" rows="3" placeholder="${t("claimPlaceholder")}"></textarea>
      <p class="field-error" id="claim-error" hidden></p>

      <fieldset class="retrieval-panel">
        <legend>${t("retrievalPanel")}</legend>
        <div class="knobs">${knobs}</div>
      </fieldset>

      <div class="submit-row">
        <button type="submit" id="submit-btn" class="submit">${t("submit")}</button>
        <span class="status" id="status"></span>
      </div>
    </form>

    <div id="result-region"></div>

    <section class="history">
      <h2>${t("historyHeading")}</h2>
      <div id="history-region"></div>
    </section>`;
}

export function mountApp(
  root: HTMLElement,
  client: ApiClient,
  options: AppOptions = {},
): AppHandle {
  const maxTokens = options.maxClaimTokens ?? DEFAULT_MAX_CLAIM_TOKENS;
  const history = options.history ?? new SessionHistory();
  const now = options.now ?? (() => new Date());

  const handle: AppHandle = { pending: null };
  let controller: AbortController | null = null;
  let lastOutcome: { kind: "result"; result: DetectResult } | { kind: "error"; error: unknown } | null =
    null;

  const query = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) throw new Error("missing element: " + selector);
    return el;
  };

  function readPanel(): PanelValues {
    return {
      similarity_threshold: query<HTMLInputElement>("#field-similarity_threshold").value,
      top_k: query<HTMLInputElement>("#field-top_k").value,
      n_keyword_docs: query<HTMLInputElement>("#field-n_keyword_docs").value,
      n_vector_chunks: query<HTMLInputElement>("#field-n_vector_chunks").value,
    };
  }

  function setFieldError(id: string, message: string | null): void {
    const el = query<HTMLElement>("#" + id);
    if (message === null) {
      el.hidden = true;
      el.textContent = "";
    } else {
      el.hidden = false;
      el.textContent = message;
    }
  }

  function clearErrors(): void {
    setFieldError("claim-error", null);
    for (const { field } of PANEL_FIELDS) setFieldError("error-" + field, null);
  }

  function drawOutputs(): void {
    const resultRegion = query<HTMLElement>("#result-region");
    if (lastOutcome === null) {
      resultRegion.innerHTML = "";
    } else if (lastOutcome.kind === "result") {
      resultRegion.innerHTML = renderResult(lastOutcome.result);
    } else {
      resultRegion.innerHTML = renderError(lastOutcome.error);
    }
    query<HTMLElement>("#history-region").innerHTML = renderHistory(history.all());
  }

  function submit(): void {
    clearErrors();
    const claimInput = query<HTMLTextAreaElement>("#claim-input");
    const claim = claimInput.value.trim();

    if (claim === "") {
      setFieldError("claim-error", t("emptyClaim"));
      return;
    }
    const tokens = estimateTokens(claim);
    if (tokens > maxTokens) {
      setFieldError("claim-error", t("claimTooLong", { count: tokens, max: maxTokens }));
      return;
    }

    const panel = parsePanel(readPanel());
    if (!panel.ok) {
      for (const fieldError of panel.errors) {
        setFieldError("error-" + fieldError.field, fieldError.message);
      }
      return;
    }
    const overrides: RetrievalOverrides = panel.overrides;

    controller?.abort();
    const own = new AbortController();
    controller = own;
    query<HTMLElement>("#status").textContent = t("checking");

    handle.pending = client
      .detect(claim, overrides, own.signal)
      .then((result) => {
        if (controller !== own) return; // a newer submission took over
        lastOutcome = { kind: "result", result };
        history.push({
          claim,
          result,
          submitted_at: now().toISOString(),
          overrides,
        });
        query<HTMLElement>("#status").textContent = "";
        drawOutputs();
      })
      .catch((err) => {
        if (err instanceof DOMException && err.name === "AbortError") return;
        if (controller !== own) return;
        lastOutcome = { kind: "error", error: err };
        query<HTMLElement>("#status").textContent = "";
        drawOutputs();
      });
  }

  function bind(): void {
    query<HTMLFormElement>("#claim-form").addEventListener("submit", (event) => {
      event.preventDefault();
      submit();
    });
    query<HTMLButtonElement>("#lang-toggle").addEventListener("click", () => {
      setLanguage(getLanguage() === "en" ? "zh" : "en");
      redraw();
    });
  }

  function redraw(): void {
    const claimValue = root.querySelector<HTMLTextAreaElement>("#claim-input")?.value ?? "";
    const panelValues: Partial<Record<PanelField, string>> = {};
    for (const { field } of PANEL_FIELDS) {
      panelValues[field] = root.querySelector<HTMLInputElement>(`#field-${field}`)?.value ?? "";
    }
    root.innerHTML = shellHtml();
    query<HTMLTextAreaElement>("#claim-input").value = claimValue;
    for (const { field } of PANEL_FIELDS) {
      query<HTMLInputElement>(`#field-${field}`).value = panelValues[field] ?? "";
    }
    bind();
    drawOutputs();
  }

  root.innerHTML = shellHtml();
  bind();
  drawOutputs();
  return handle;
}
