// Bootstrap: hash-driven router over the four tabs. All data comes from the
// HTTP API; navigation rewrites the hash, the hash drives the fetches.

import {
  compareUrl,
  conceptDetailUrl,
  conceptsUrl,
  coocUrl,
  fetchJson,
  runsUrl,
  ApiError,
} from "./api.js";
import { decodeState, encodeState, DEFAULT_STATE, type ViewState } from "./state.js";
import {
  renderCoocBars,
  renderComparePanels,
  renderErrorBanner,
  renderInspectPanel,
  renderMetricsTable,
  renderNotFound,
  renderRunDiff,
  renderRunPicker,
} from "./render.js";
import type {
  CompareResponse,
  ConceptDetail,
  ConceptsPage,
  CoocResponse,
  RunsPage,
} from "./types.js";

const TAB_TITLES: Record<ViewState["tab"], string> = {
  metrics: "Metrics",
  inspect: "Inspect",
  cooccurrence: "Co-occurrence",
  compare: "Compare runs",
};

let inflight: AbortController | null = null;

function view(): HTMLElement {
  return document.getElementById("view")!;
}

function currentState(): ViewState {
  return decodeState(window.location.hash);
}

function navigate(patch: Partial<ViewState>): void {
  const next = { ...currentState(), ...patch };
  window.location.hash = encodeState(next);
}

function renderChrome(state: ViewState, runs: RunsPage): void {
  const tabs = (Object.keys(TAB_TITLES) as ViewState["tab"][]).map((tab) => {
    const active = tab === state.tab ? ` class="active"` : "";
    return `<button data-tab="${tab}"${active}>${TAB_TITLES[tab]}</button>`;
  }).join("");
  document.getElementById("chrome")!.innerHTML = [
    renderRunPicker(runs, state.run),
    `<nav class="tabs">${tabs}</nav>`,
    state.tab === "metrics"
      ? `<input id="filter-box" type="search" placeholder="filter concepts" ` +
        `value="${state.filter.replace(/"/g, "&quot;")}">`
      : "",
    state.tab === "inspect" || state.tab === "cooccurrence"
      ? `<input id="concept-box" type="search" placeholder="concept label" ` +
        `value="${state.concept.replace(/"/g, "&quot;")}">`
      : "",
    state.tab === "inspect"
      ? `<input id="concept-b-box" type="search" placeholder="compare with…" ` +
        `value="${state.conceptB.replace(/"/g, "&quot;")}">`
      : "",
  ].join("");
}

async function renderView(state: ViewState, signal: AbortSignal): Promise<void> {
  if (!state.run) {
    view().innerHTML = `<p class="empty">Pick a run to start auditing.</p>`;
    return;
  }
  if (state.tab === "metrics") {
    const page = await fetchJson<ConceptsPage>(conceptsUrl(state.run, {
      sort: state.sort,
      filter: state.filter || undefined,
      tau: state.tau,
      cvCutoff: state.cvCutoff,
      offset: state.offset,
      limit: state.limit,
    }), signal);
    view().innerHTML = renderMetricsTable(page);
    return;
  }
  if (state.tab === "inspect") {
    if (!state.concept) {
      view().innerHTML = `<p class="empty">Search for a concept to inspect.</p>`;
      return;
    }
    try {
      const a = await fetchJson<ConceptDetail>(
        conceptDetailUrl(state.run, state.concept), signal);
      const b = state.conceptB
        ? await fetchJson<ConceptDetail>(
            conceptDetailUrl(state.run, state.conceptB), signal)
        : null;
      view().innerHTML = state.conceptB
        ? renderComparePanels(a, b, state.reveal)
        : renderInspectPanel(a, state.reveal);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        view().innerHTML = renderNotFound(state.concept);
        return;
      }
      throw err;
    }
    return;
  }
  if (state.tab === "cooccurrence") {
    if (!state.concept) {
      view().innerHTML = `<p class="empty">Pick an anchor concept.</p>`;
      return;
    }
    const resp = await fetchJson<CoocResponse>(
      coocUrl(state.run, state.concept, { k: state.k, metric: state.metric }),
      signal);
    view().innerHTML = renderCoocBars(resp);
    return;
  }
  // compare runs
  if (!state.runB) {
    view().innerHTML = `<p class="empty">Pick a second run (run_b) to diff.</p>`;
    return;
  }
  const diff = await fetchJson<CompareResponse>(
    compareUrl(state.run, state.runB, state.floor), signal);
  view().innerHTML = renderRunDiff(diff);
}

async function refresh(): Promise<void> {
  inflight?.abort();
  inflight = new AbortController();
  const signal = inflight.signal;
  const state = currentState();
  try {
    const runs = await fetchJson<RunsPage>(runsUrl(), signal);
    if (!state.run && runs.items.length > 0) {
      navigate({ run: runs.items[0].run_id });
      return;
    }
    renderChrome(state, runs);
    await renderView(state, signal);
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    const message = err instanceof Error ? err.message : String(err);
    view().innerHTML = renderErrorBanner(message);
  }
}

function wireEvents(): void {
  window.addEventListener("hashchange", () => void refresh());

  document.body.addEventListener("change", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "run-picker") {
      navigate({ run: (target as HTMLSelectElement).value });
    }
  });

  document.body.addEventListener("keydown", (event) => {
    if (event.key !== "Enter") return;
    const target = event.target as HTMLInputElement;
    if (target.id === "filter-box") navigate({ filter: target.value, offset: 0 });
    if (target.id === "concept-box") navigate({ concept: target.value });
    if (target.id === "concept-b-box") navigate({ conceptB: target.value });
  });

  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(
      "[data-tab], [data-sort], [data-metric], [data-concept], figure.thumb");
    if (!target) return;
    if (target.dataset.tab) {
      navigate({ tab: target.dataset.tab as ViewState["tab"] });
    } else if (target.dataset.sort) {
      navigate({ sort: target.dataset.sort as ViewState["sort"], offset: 0 });
    } else if (target.dataset.metric) {
      navigate({ metric: target.dataset.metric as ViewState["metric"] });
    } else if (target.dataset.concept) {
      event.preventDefault();
      navigate({ tab: "inspect", concept: target.dataset.concept });
    } else if (target.classList.contains("thumb")) {
      target.classList.toggle("blurred");
    }
  });
}

export function start(): void {
  if (!window.location.hash) {
    window.location.hash = encodeState(DEFAULT_STATE);
  }
  wireEvents();
  void refresh();
}

start();
