/** Hand-rolled SVG output: bar charts and line overlays, no dependencies. */

import { Histogram } from "./histogram.js";

const W = 640;
const H = 420;
const MARGIN = { left: 56, right: 16, top: 28, bottom: 56 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface BarChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  /** Scales bin index to x-axis units (e.g. binWidth in cm). */
  binWidth: number;
  caption?: string;
  /** Draw a dashed vertical rule at this x value (axis units). */
  gridlineAt?: number;
}

export function barChartSvg(hist: Histogram, opts: BarChartOptions): string {
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const n = hist.counts.length;
  const xMax = Math.max(n * opts.binWidth, opts.gridlineAt ?? 0) * 1.05 || 1;
  const yMax = Math.max(1, ...hist.counts);
  const x = (v: number) => MARGIN.left + (v / xMax) * plotW;
  const y = (c: number) => MARGIN.top + plotH - (c / yMax) * plotH;

  const bars = hist.counts
    .map((count, i) => {
      if (count === 0) return "";
      const x0 = x(i * opts.binWidth);
      const x1 = x((i + 1) * opts.binWidth);
      return (
        `<rect class="bar" data-bin="${i}" data-count="${count}" ` +
        `x="${x0.toFixed(2)}" y="${y(count).toFixed(2)}" ` +
        `width="${(x1 - x0).toFixed(2)}" height="${(y(0) - y(count)).toFixed(2)}" ` +
        `fill="#4878a8" stroke="#23415c" stroke-width="0.5"/>`
      );
    })
    .join("\n");

  const yTicks = [];
  for (const frac of [0, 0.25, 0.5, 0.75, 1]) {
    const c = Math.round(yMax * frac);
    yTicks.push(
      `<text x="${MARGIN.left - 6}" y="${(y(c) + 4).toFixed(2)}" text-anchor="end" font-size="11">${c}</text>`
    );
  }
  const xTicks = [];
  const tickStep = niceStep(xMax);
  for (let v = 0; v <= xMax; v += tickStep) {
    xTicks.push(
      `<text x="${x(v).toFixed(2)}" y="${H - MARGIN.bottom + 16}" text-anchor="middle" font-size="11">${roundTick(v)}</text>`
    );
  }

  const rule =
    opts.gridlineAt !== undefined
      ? `<line x1="${x(opts.gridlineAt).toFixed(2)}" y1="${MARGIN.top}" ` +
        `x2="${x(opts.gridlineAt).toFixed(2)}" y2="${H - MARGIN.bottom}" ` +
        `stroke="#b03030" stroke-dasharray="5,4" stroke-width="1.2"/>`
      : "";

  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" width="${W}" height="${H}">
<rect width="${W}" height="${H}" fill="white"/>
<text x="${W / 2}" y="18" text-anchor="middle" font-size="14" font-weight="bold">${esc(opts.title)}</text>
<g>${bars}</g>
${rule}
<line x1="${MARGIN.left}" y1="${H - MARGIN.bottom}" x2="${W - MARGIN.right}" y2="${H - MARGIN.bottom}" stroke="black"/>
<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${H - MARGIN.bottom}" stroke="black"/>
${yTicks.join("\n")}
${xTicks.join("\n")}
<text x="${W / 2}" y="${H - MARGIN.bottom + 34}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>
<text x="14" y="${H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 ${H / 2})">${esc(opts.yLabel)}</text>
${opts.caption ? `<text x="${W / 2}" y="${H - 8}" text-anchor="middle" font-size="10" fill="#555">${esc(opts.caption)}</text>` : ""}
</svg>
`;
}

function niceStep(xMax: number): number {
  const raw = xMax / 8;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function roundTick(v: number): string {
  return Math.abs(v - Math.round(v)) < 1e-9 ? String(Math.round(v)) : v.toFixed(1);
}

export interface Scene {
  /** World-space segments/markers rendered with a shared scale. */
  trueWalls: Array<[number, number, number, number]>;
  estWalls: Array<[number, number, number, number]>;
  path: Array<[number, number]>;
  start: [number, number];
  title: string;
  caption?: string;
}

export function sceneSvg(scene: Scene): string {
  const xs = scene.trueWalls.flatMap(([a, , c]) => [a, c]).concat(scene.path.map((p) => p[0]));
  const ys = scene.trueWalls.flatMap(([, b, , d]) => [b, d]).concat(scene.path.map((p) => p[1]));
  const minX = Math.min(...xs) - 0.5;
  const maxX = Math.max(...xs) + 0.5;
  const minY = Math.min(...ys) - 0.5;
  const maxY = Math.max(...ys) + 0.5;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const scale = Math.min(plotW / (maxX - minX), plotH / (maxY - minY));
  const x = (v: number) => MARGIN.left + (v - minX) * scale;
  const y = (v: number) => H - MARGIN.bottom - (v - minY) * scale; // y up

  const seg = (s: [number, number, number, number], cls: string, style: string) =>
    `<line class="${cls}" x1="${x(s[0]).toFixed(3)}" y1="${y(s[1]).toFixed(3)}" ` +
    `x2="${x(s[2]).toFixed(3)}" y2="${y(s[3]).toFixed(3)}" ${style}/>`;

  const walls = scene.trueWalls.map((s) => seg(s, "true-wall", 'stroke="#2050c0" stroke-width="3"')).join("\n");
  const est = scene.estWalls.map((s) => seg(s, "est-wall", 'stroke="#c03030" stroke-width="1.4"')).join("\n");
  const path = scene.path
    .map(([px, py]) => `${x(px).toFixed(2)},${y(py).toFixed(2)}`)
    .join(" ");
  const [sx, sy] = scene.start;
  const startMark = `<path class="start" d="M ${x(sx).toFixed(2)} ${(y(sy) - 7).toFixed(2)} l 6 11 l -12 0 z" fill="#c03030"/>`;

  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" width="${W}" height="${H}" data-scale="${scale.toFixed(6)}">
<rect width="${W}" height="${H}" fill="white"/>
<text x="${W / 2}" y="18" text-anchor="middle" font-size="14" font-weight="bold">${esc(scene.title)}</text>
${walls}
${est}
<polyline class="robot-path" points="${path}" fill="none" stroke="#404040" stroke-width="1" stroke-dasharray="3,3"/>
${scene.path.map(([px, py]) => `<circle cx="${x(px).toFixed(2)}" cy="${y(py).toFixed(2)}" r="2" fill="#404040"/>`).join("\n")}
${startMark}
${scene.caption ? `<text x="${W / 2}" y="${H - 8}" text-anchor="middle" font-size="10" fill="#555">${esc(scene.caption)}</text>` : ""}
</svg>
`;
}
