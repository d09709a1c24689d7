// View state <-> URL hash. Any view is shareable: the hash alone determines
// every query the page issues.

export type Tab = "metrics" | "inspect" | "cooccurrence" | "compare";

export interface ViewState {
  run: string;
  tab: Tab;
  sort: "p" | "cv" | "count";
  filter: string;
  tau?: number;
  cvCutoff?: number;
  offset: number;
  limit: number;
  concept: string;      // inspected / anchored concept
  conceptB: string;     // second concept for side-by-side inspection
  metric: "support" | "confidence" | "lift";
  k: number;
  runB: string;         // second run for diffs
  floor?: number;
  reveal: boolean;      // sensitive thumbnails revealed
}

export const DEFAULT_STATE: ViewState = {
  run: "",
  tab: "metrics",
  sort: "p",
  filter: "",
  offset: 0,
  limit: 100,
  concept: "",
  conceptB: "",
  metric: "support",
  k: 10,
  runB: "",
  reveal: false,
};

const TABS: Tab[] = ["metrics", "inspect", "cooccurrence", "compare"];
const SORTS = ["p", "cv", "count"] as const;
const METRICS = ["support", "confidence", "lift"] as const;

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  const put = (key: string, value: string | number | boolean | undefined,
               fallback: string | number | boolean | undefined) => {
    if (value !== undefined && value !== fallback) params.set(key, String(value));
  };
  put("run", state.run, DEFAULT_STATE.run);
  put("tab", state.tab, DEFAULT_STATE.tab);
  put("sort", state.sort, DEFAULT_STATE.sort);
  put("filter", state.filter, DEFAULT_STATE.filter);
  put("tau", state.tau, undefined);
  put("cv_cutoff", state.cvCutoff, undefined);
  put("offset", state.offset, DEFAULT_STATE.offset);
  put("limit", state.limit, DEFAULT_STATE.limit);
  put("concept", state.concept, DEFAULT_STATE.concept);
  put("concept_b", state.conceptB, DEFAULT_STATE.conceptB);
  put("metric", state.metric, DEFAULT_STATE.metric);
  put("k", state.k, DEFAULT_STATE.k);
  put("run_b", state.runB, DEFAULT_STATE.runB);
  put("floor", state.floor, undefined);
  put("reveal", state.reveal, DEFAULT_STATE.reveal);
  return params.toString();
}

function pick<T extends string>(raw: string | null, allowed: readonly T[],
                                fallback: T): T {
  return allowed.includes(raw as T) ? (raw as T) : fallback;
}

function num(raw: string | null): number | undefined {
  if (raw === null || raw === "") return undefined;
  const value = Number(raw);
  return Number.isFinite(value) ? value : undefined;
}

export function decodeState(hash: string): ViewState {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  return {
    run: params.get("run") ?? DEFAULT_STATE.run,
    tab: pick(params.get("tab"), TABS, DEFAULT_STATE.tab),
    sort: pick(params.get("sort"), SORTS, DEFAULT_STATE.sort),
    filter: params.get("filter") ?? DEFAULT_STATE.filter,
    tau: num(params.get("tau")),
    cvCutoff: num(params.get("cv_cutoff")),
    offset: num(params.get("offset")) ?? DEFAULT_STATE.offset,
    limit: num(params.get("limit")) ?? DEFAULT_STATE.limit,
    concept: params.get("concept") ?? DEFAULT_STATE.concept,
    conceptB: params.get("concept_b") ?? DEFAULT_STATE.conceptB,
    metric: pick(params.get("metric"), METRICS, DEFAULT_STATE.metric),
    k: num(params.get("k")) ?? DEFAULT_STATE.k,
    runB: params.get("run_b") ?? DEFAULT_STATE.runB,
    floor: num(params.get("floor")),
    reveal: params.get("reveal") === "true",
  };
}
