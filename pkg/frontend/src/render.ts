// HTML rendering of the board view model. Pure string building so the
// board can be verified without a DOM; app.ts assigns the result to
// innerHTML and wires the buttons afterwards.

import type { BoardViewModel, PipelineCard } from "./board.js";
import type { GeoPoint, SnapshotDoc } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function slotHtml(card: PipelineCard): string {
  if (card.slots.length === 0) return `<div class="slot idle">(idle)</div>`;
  return card.slots
    .map((slot) => {
      const badge = slot.frozen ? `<span class="badge frozen">frozen</span>` : "";
      return (
        `<div class="slot" data-outage="${escapeHtml(slot.outageId)}">` +
        `<span class="rank">S${slot.rank}</span> ` +
        `<span class="outage">${escapeHtml(slot.outageId)}</span>${badge}` +
        `<div class="rationale">${escapeHtml(slot.rationale)}</div></div>`
      );
    })
    .join("");
}

export function renderBoard(vm: BoardViewModel): string {
  const parts: string[] = [];

  parts.push(`<div class="mode-banner mode-${vm.mode}">`);
  parts.push(vm.banner ? escapeHtml(vm.banner) : `mode: ${vm.mode}`);
  parts.push(`</div>`);

  if (vm.countdown) {
    const cls = vm.countdown.stale ? "countdown stale" : "countdown";
    parts.push(
      `<div class="${cls}" data-draft="${escapeHtml(vm.countdown.draftId)}">` +
        `draft ${escapeHtml(vm.countdown.draftId)}: ` +
        `${vm.countdown.remainingSeconds.toFixed(0)}s left</div>`,
    );
  }

  parts.push(`<section class="crews">`);
  for (const card of vm.crews) {
    const lock = card.lockedTo
      ? ` <span class="badge locked">→ ${escapeHtml(card.lockedTo)}</span>`
      : "";
    parts.push(
      `<article class="crew-card" data-crew="${escapeHtml(card.crew)}">` +
        `<header>${escapeHtml(card.crew)} ` +
        `<span class="chip chip-${card.chip}">${card.chip}</span>${lock}</header>` +
        slotHtml(card) +
        `</article>`,
    );
  }
  parts.push(`</section>`);

  parts.push(`<table class="outages"><tbody>`);
  for (const row of vm.outages) {
    const fps = row.fps ? ` class="fps"` : "";
    const assigned = row.assignedTo ? escapeHtml(row.assignedTo) : "–";
    parts.push(
      `<tr${fps} data-outage="${escapeHtml(row.id)}">` +
        `<td>${escapeHtml(row.id)}</td>` +
        `<td><span class="badge cat-${escapeHtml(row.category)}">${escapeHtml(row.category)}</span></td>` +
        `<td>${row.customers}</td><td>${assigned}</td></tr>`,
    );
  }
  parts.push(`</tbody></table>`);

  const publishAttr = vm.publishDisabled ? " disabled" : "";
  parts.push(`<button id="publish-btn"${publishAttr}>publish</button>`);
  return parts.join("\n");
}

// Static pin board: crews and outages projected onto a unit square by
// their coordinate extents. Deliberately no routing polylines.
export interface Pin {
  kind: "crew" | "outage";
  id: string;
  xPct: number;
  yPct: number;
  category?: string;
}

export function projectPins(snapshot: SnapshotDoc): Pin[] {
  const points: { kind: "crew" | "outage"; id: string; p: GeoPoint; category?: string }[] = [
    ...snapshot.crews.map((c) => ({ kind: "crew" as const, id: c.id, p: c.anchor })),
    ...snapshot.tickets.map((t) => ({
      kind: "outage" as const,
      id: t.id,
      p: t.location,
      category: t.category as string,
    })),
  ];
  if (points.length === 0) return [];
  const lats = points.map((x) => x.p.lat);
  const lons = points.map((x) => x.p.lon);
  const latSpan = Math.max(...lats) - Math.min(...lats) || 1e-9;
  const lonSpan = Math.max(...lons) - Math.min(...lons) || 1e-9;
  const latMin = Math.min(...lats);
  const lonMin = Math.min(...lons);
  return points.map((x) => ({
    kind: x.kind,
    id: x.id,
    category: x.category,
    xPct: ((x.p.lon - lonMin) / lonSpan) * 100,
    // north up: larger latitude renders nearer the top
    yPct: (1 - (x.p.lat - latMin) / latSpan) * 100,
  }));
}

export function renderPinBoard(snapshot: SnapshotDoc): string {
  const pins = projectPins(snapshot)
    .map((pin) => {
      const cat = pin.category ? ` cat-${escapeHtml(pin.category)}` : "";
      return (
        `<span class="pin pin-${pin.kind}${cat}" ` +
        `style="left:${pin.xPct.toFixed(1)}%;top:${pin.yPct.toFixed(1)}%" ` +
        `title="${escapeHtml(pin.id)}"></span>`
      );
    })
    .join("");
  return `<div class="pin-board">${pins}</div>`;
}
