// URL construction and fetch plumbing. Every view's query maps 1:1 onto
// these builders; nothing here recomputes statistics.

export interface ConceptsQuery {
  sort?: "p" | "cv" | "count";
  filter?: string;
  tau?: number;
  cvCutoff?: number;
  offset?: number;
  limit?: number;
}

export interface CoocQuery {
  k?: number;
  metric?: "support" | "confidence" | "lift";
  minSupport?: number;
}

declare global {
  interface Window {
    CONCEPTAUDIT_API?: string;
  }
}

export function apiBase(): string {
  return (typeof window !== "undefined" && window.CONCEPTAUDIT_API) || "";
}

export function buildConceptsQuery(query: ConceptsQuery): string {
  const params = new URLSearchParams();
  params.set("sort", query.sort ?? "p");
  if (query.filter) params.set("filter", query.filter);
  if (query.tau !== undefined) params.set("tau", String(query.tau));
  if (query.cvCutoff !== undefined) params.set("cv_cutoff", String(query.cvCutoff));
  if (query.offset !== undefined) params.set("offset", String(query.offset));
  if (query.limit !== undefined) params.set("limit", String(query.limit));
  return params.toString();
}

export function runsUrl(offset?: number, limit?: number): string {
  const params = new URLSearchParams();
  if (offset !== undefined) params.set("offset", String(offset));
  if (limit !== undefined) params.set("limit", String(limit));
  const suffix = params.toString();
  return `${apiBase()}/runs${suffix ? `?${suffix}` : ""}`;
}

export function conceptsUrl(run: string, query: ConceptsQuery): string {
  return `${apiBase()}/runs/${encodeURIComponent(run)}/concepts?` +
    buildConceptsQuery(query);
}

export function conceptDetailUrl(run: string, label: string): string {
  return `${apiBase()}/runs/${encodeURIComponent(run)}/concepts/` +
    encodeURIComponent(label);
}

export function coocUrl(run: string, concept: string, query: CoocQuery = {}): string {
  const params = new URLSearchParams();
  params.set("c", concept);
  params.set("k", String(query.k ?? 10));
  params.set("metric", query.metric ?? "support");
  if (query.minSupport !== undefined) {
    params.set("min_support", String(query.minSupport));
  }
  return `${apiBase()}/runs/${encodeURIComponent(run)}/cooccurrence?` +
    params.toString();
}

export function compareUrl(a: string, b: string, floor?: number): string {
  const params = new URLSearchParams();
  params.set("a", a);
  params.set("b", b);
  if (floor !== undefined) params.set("floor", String(floor));
  return `${apiBase()}/compare?${params.toString()}`;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
  }
}

export async function fetchJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    let code = "http_error";
    let message = `${response.status} for ${url}`;
    try {
      const body = await response.json();
      if (body?.error) {
        code = body.error.code;
        message = body.error.message;
      }
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(response.status, code, message);
  }
  return response.json() as Promise<T>;
}
