// HTML renderers: pure functions from API payloads to markup strings.
// Every number shown comes straight from a server response; full-precision
// values ride along in data-value attributes so views stay auditable.

import type {
  CompareResponse,
  ConceptDetail,
  ConceptsPage,
  CoocResponse,
  EvidenceImage,
  RunsPage,
} from "./types.js";
import { boxToCssRect, conceptColor } from "./overlay.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const fmt = (value: number): string =>
  Number.isInteger(value) ? String(value) : value.toFixed(4);

function numberCell(value: number): string {
  return `<td class="num" data-value="${value}">${fmt(value)}</td>`;
}

export function renderRunPicker(runs: RunsPage, selected: string): string {
  if (runs.items.length === 0) {
    return `<p class="empty">No runs loaded. Start the server with --corpus.</p>`;
  }
  const options = runs.items.map((run) => {
    const chosen = run.run_id === selected ? " selected" : "";
    return `<option value="${escapeHtml(run.run_id)}"${chosen}>` +
      `${escapeHtml(run.run_id)} — ${escapeHtml(run.generator_id)} / ` +
      `${escapeHtml(run.detector_id)} (${run.total_images} images)</option>`;
  });
  return `<select id="run-picker">${options.join("")}</select>`;
}

export function renderMetricsTable(page: ConceptsPage): string {
  if (page.items.length === 0) {
    return `<p class="empty">No concepts above the current threshold.</p>`;
  }
  const header = (key: string, title: string) => {
    const active = page.sort === key ? ` class="sorted"` : "";
    return `<th data-sort="${key}"${active}>${title}</th>`;
  };
  const rows = page.items.map((row) => [
    `<tr data-concept="${escapeHtml(row.label)}">`,
    `<td class="label">${escapeHtml(row.label)}</td>`,
    numberCell(row.p),
    numberCell(row.count),
    numberCell(row.sigma),
    numberCell(row.cv),
    `<td class="class-${row.classification}">${escapeHtml(row.classification)}</td>`,
    `</tr>`,
  ].join(""));
  return [
    `<table class="metrics" data-total="${page.total}">`,
    `<thead><tr><th>concept</th>${header("p", "p")}${header("count", "count")}`,
    `<th>σ</th>${header("cv", "cv")}<th>class</th></tr></thead>`,
    `<tbody>${rows.join("")}</tbody>`,
    `</table>`,
  ].join("");
}

function renderEvidence(evidence: EvidenceImage[], label: string,
                        reveal: boolean): string {
  if (evidence.length === 0) {
    return `<p class="empty">No evidence images recorded.</p>`;
  }
  const color = conceptColor(label);
  const tiles = evidence.map((img) => {
    const boxes = img.boxes.map((box) => {
      const rect = boxToCssRect(box);
      return `<div class="box-overlay" style="left:${rect.left};top:${rect.top};` +
        `width:${rect.width};height:${rect.height};border-color:${color}"></div>`;
    }).join("");
    const media = img.media_url
      ? `<img src="${escapeHtml(img.media_url)}" alt="${escapeHtml(img.image_id)}">`
      : `<div class="missing">no image file</div>`;
    const blurred = reveal ? "" : " blurred";
    return [
      `<figure class="thumb${blurred}" data-image="${escapeHtml(img.image_id)}">`,
      `<div class="frame">${media}${boxes}</div>`,
      `<figcaption>${escapeHtml(img.image_id)} (${img.boxes.length} box` +
      `${img.boxes.length === 1 ? "" : "es"})</figcaption>`,
      `</figure>`,
    ].join("");
  });
  const notice = reveal ? "" :
    `<p class="guard">Thumbnails are blurred; click one to reveal ` +
    `(audit material may be disturbing).</p>`;
  return `${notice}<div class="thumb-grid">${tiles.join("")}</div>`;
}

export function renderInspectPanel(detail: ConceptDetail, reveal: boolean): string {
  const prompts = detail.prompt_hits.map((hit) => [
    `<tr><td>${escapeHtml(hit.text)}</td>`,
    `<td class="num" data-value="${hit.image_count}">${hit.image_count}</td></tr>`,
  ].join(""));
  const partners = detail.partners.map((p) =>
    `<li><a href="#" data-concept="${escapeHtml(p.partner)}">` +
    `${escapeHtml(p.partner)}</a> <span class="num" data-value="${p.support}">` +
    `${fmt(p.support)}</span></li>`).join("");
  return [
    `<section class="inspect-panel" data-concept="${escapeHtml(detail.label)}">`,
    `<h2>${escapeHtml(detail.label)}</h2>`,
    `<p>frequency <strong class="num" data-value="${detail.p}">${fmt(detail.p)}</strong>`,
    ` over <span class="num" data-value="${detail.count}">${detail.count}</span> images</p>`,
    renderEvidence(detail.evidence, detail.label, reveal),
    `<h3>Prompts that produced it</h3>`,
    `<table class="prompts"><thead><tr><th>prompt</th><th>images</th></tr></thead>`,
    `<tbody>${prompts.join("")}</tbody></table>`,
    partners ? `<h3>Top partners</h3><ul class="partners">${partners}</ul>` : "",
    `</section>`,
  ].join("");
}

export function renderComparePanels(a: ConceptDetail, b: ConceptDetail | null,
                                    reveal: boolean): string {
  const left = renderInspectPanel(a, reveal);
  const right = b
    ? renderInspectPanel(b, reveal)
    : `<section class="inspect-panel empty-panel">` +
      `<p class="empty">Pick a second concept to compare.</p></section>`;
  return `<div class="compare-concepts">${left}${right}</div>`;
}

export function renderNotFound(label: string): string {
  return `<div class="card not-found">No concept named ` +
    `<strong>${escapeHtml(label)}</strong> in this run.</div>`;
}

export function renderCoocBars(resp: CoocResponse): string {
  const switcher = (["support", "confidence", "lift"] as const).map((m) => {
    const active = m === resp.metric ? ` class="active"` : "";
    return `<button data-metric="${m}"${active}>${m}</button>`;
  }).join("");
  if (resp.items.length === 0) {
    return `<div class="metric-switch">${switcher}</div>` +
      `<p class="empty">No co-occurring partners for ` +
      `${escapeHtml(resp.concept)}.</p>`;
  }
  const values = resp.items.map((p) =>
    resp.metric === "support" ? p.support :
    resp.metric === "confidence" ? p.confidence : p.lift);
  const top = Math.max(...values);
  const bars = resp.items.map((p, i) => {
    const value = values[i];
    const width = top > 0 ? (value / top) * 100 : 0;
    return [
      `<div class="bar-row" data-concept="${escapeHtml(p.partner)}">`,
      `<span class="bar-label">${escapeHtml(p.partner)}</span>`,
      `<span class="bar" style="width:${width.toFixed(1)}%" ` +
      `title="joint ${p.joint_count}"></span>`,
      `<span class="num" data-value="${value}">${fmt(value)}</span>`,
      `</div>`,
    ].join("");
  });
  return [
    `<div class="metric-switch">${switcher}</div>`,
    `<div class="bars" data-anchor="${escapeHtml(resp.concept)}">`,
    bars.join(""),
    `</div>`,
  ].join("");
}

export function renderRunDiff(resp: CompareResponse): string {
  const magnitudes = resp.deltas.map((d) => Math.abs(d.delta));
  const top = Math.max(0, ...magnitudes);
  const rows = resp.deltas.map((d) => {
    const width = top > 0 ? (Math.abs(d.delta) / top) * 100 : 0;
    const side = d.delta >= 0 ? "pos" : "neg";
    const strongest = top > 0 && Math.abs(d.delta) === top ? " strongest" : "";
    return [
      `<div class="bar-row${strongest}" data-concept="${escapeHtml(d.label)}">`,
      `<span class="bar-label">${escapeHtml(d.label)}</span>`,
      `<span class="bar ${side}" style="width:${width.toFixed(1)}%"></span>`,
      `<span class="num" data-value="${d.delta}">${fmt(d.delta)}</span>`,
      `</div>`,
    ].join("");
  });
  const exclusives = (title: string, labels: string[]) =>
    labels.length === 0 ? "" :
      `<h3>${title}</h3><ul>` +
      labels.map((l) =>
        `<li data-concept="${escapeHtml(l)}">${escapeHtml(l)}</li>`).join("") +
      `</ul>`;
  return [
    `<section class="run-diff" data-a="${escapeHtml(resp.a)}" ` +
    `data-b="${escapeHtml(resp.b)}">`,
    `<h2>${escapeHtml(resp.a)} → ${escapeHtml(resp.b)}</h2>`,
    `<div class="bars">${rows.join("")}</div>`,
    exclusives(`Only in ${escapeHtml(resp.a)}`, resp.only_a),
    exclusives(`Only in ${escapeHtml(resp.b)}`, resp.only_b),
    `</section>`,
  ].join("");
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}
