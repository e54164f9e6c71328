// Pure HTML-string renderers. Given the same session state they produce
// byte-identical markup, which is what the snapshot tests pin down.

import type { UiSession } from "./state.js";
import type { MessageRecord, ResultSnapshot, RumourSummary, Stance } from "./types.js";
import { STANCE_NAMES } from "./types.js";

const STANCE_CLASS: Record<Stance, string> = {
  [-1]: "against",
  [0]: "neutral",
  [1]: "supporting",
};

export function escapeHtml(raw: string): string {
  return raw
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderBanner(banner: string | null): string {
  if (!banner) return "";
  return `<div class="banner" role="alert">${escapeHtml(banner)} <button data-action="retry">retry</button></div>`;
}

export function renderRumourList(rumours: RumourSummary[]): string {
  if (rumours.length === 0) {
    return `<div class="empty-state">No rumours loaded. Start the service with a dataset.</div>`;
  }
  const rows = rumours
    .map(
      (r) => `<tr data-rumour="${escapeHtml(r.rumour_id)}">
  <td class="claim">${escapeHtml(r.claim)}</td>
  <td>${escapeHtml(r.story ?? "")}</td>
  <td class="num">${r.annotated_count}/${r.message_count}</td>
  <td class="num">r${r.revision}</td>
</tr>`,
    )
    .join("\n");
  return `<table class="rumour-list">
<thead><tr><th>claim</th><th>story</th><th>annotated</th><th>revision</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

function probsTitle(m: MessageRecord): string {
  if (!m.probs) return "";
  const [a, n, s] = m.probs;
  return ` title="against ${a.toFixed(3)} / neutral ${n.toFixed(3)} / supporting ${s.toFixed(3)}"`;
}

export function renderMessageRow(m: MessageRecord): string {
  const stance = m.predicted === null ? "unknown" : STANCE_CLASS[m.predicted];
  const seed = m.is_seed ? ` <span class="seed-mark" title="annotated">seed:${m.annotation}</span>` : "";
  const predicted = m.predicted === null ? "&mdash;" : STANCE_NAMES[m.predicted];
  return `<li class="message stance-${stance}" data-message="${escapeHtml(m.id)}">
  <span class="pred"${probsTitle(m)}>${predicted}</span>
  <span class="text">${escapeHtml(m.text)}</span>${seed}
  <span class="buttons">
    <button data-stance="-1" data-message="${escapeHtml(m.id)}">against (a)</button>
    <button data-stance="0" data-message="${escapeHtml(m.id)}">neutral (n)</button>
    <button data-stance="1" data-message="${escapeHtml(m.id)}">supporting (s)</button>
  </span>
</li>`;
}

export function renderMessages(messages: MessageRecord[]): string {
  if (messages.length === 0) {
    return `<div class="empty-state">No classifiable messages.</div>`;
  }
  return `<ol class="messages">\n${messages.map(renderMessageRow).join("\n")}\n</ol>`;
}

export function renderHistogram(result: ResultSnapshot | null): string {
  if (!result || result.revision === 0) {
    return `<div class="histogram empty">no propagation yet</div>`;
  }
  const counts = result.class_counts;
  const total = counts["-1"] + counts["0"] + counts["1"];
  const bar = (cls: Stance) => {
    const key = String(cls) as "-1" | "0" | "1";
    const count = counts[key];
    const pct = total === 0 ? 0 : Math.round((count / total) * 100);
    return `<div class="bar ${STANCE_CLASS[cls]}" data-count="${count}" style="width:${pct}%">${STANCE_NAMES[cls]}: ${count}</div>`;
  };
  return `<div class="histogram" data-total="${total}">
${bar(-1)}
${bar(0)}
${bar(1)}
</div>`;
}

export function renderTrend(session: UiSession): string {
  if (session.trend.length === 0) {
    return `<div class="trend empty">annotate to see the metric trend</div>`;
  }
  const points = session.trend
    .map((p) => {
      const acc = p.metrics ? p.metrics.accuracy.toFixed(3) : "n/a";
      const wacc = p.metrics ? p.metrics.weighted_accuracy.toFixed(3) : "n/a";
      return `<li data-revision="${p.revision}">r${p.revision}: accuracy ${acc}, weighted ${wacc}</li>`;
    })
    .join("\n");
  return `<ol class="trend">\n${points}\n</ol>`;
}

export function renderStatus(session: UiSession): string {
  const conflict = session.conflict ? ` <span class="conflict">conflict</span>` : "";
  return `<div class="status">revision <span class="revision">${session.revision}</span>${conflict}</div>`;
}

export function renderSession(session: UiSession): string {
  if (!session.selected) {
    return [renderBanner(session.banner), renderRumourList(session.rumours)].join("\n");
  }
  return [
    renderBanner(session.banner),
    renderStatus(session),
    renderHistogram(session.result),
    renderTrend(session),
    renderMessages(session.messages),
  ].join("\n");
}
