/**
 * Hand-rolled SVG charts: multi-panel time spectra with linear or log
 * intensity axes, series legends, and labelled vertical annotation lines.
 * Pure string building, so identical inputs give identical bytes.
 */

export interface PlotSeries {
  label: string;
  color: string;
  width: number;
  dash?: string;
  x: number[];
  y: number[];
}

export interface PlotVLine {
  x: number;
  label?: string;
}

export interface PlotPanel {
  title?: string;
  xlabel: string;
  ylabel: string;
  yscale: "log" | "linear";
  xrange: [number, number];
  series: PlotSeries[];
  vlines: PlotVLine[];
}

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

function tickLabel(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return String(Math.round(v * 1e6) / 1e6);
}

function linearTicks(lo: number, hi: number, want = 6): number[] {
  const span = hi - lo;
  const step0 = span / want;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= step0) { step = mag * m; break; }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

function decadeTicks(loExp: number, hiExp: number): number[] {
  const out: number[] = [];
  const stride = Math.max(1, Math.ceil((hiExp - loExp) / 8));
  for (let e = Math.ceil(loExp); e <= Math.floor(hiExp); e += stride) {
    out.push(e);
  }
  return out;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render one panel into a given pixel box. */
function panelSvg(p: PlotPanel, box: { x: number; y: number; w: number; h: number }): string {
  const mL = 56, mR = 12, mT = p.title ? 26 : 12, mB = 40;
  const x0 = box.x + mL, y0 = box.y + mT;
  const w = box.w - mL - mR, h = box.h - mT - mB;
  const [xLo, xHi] = p.xrange;

  // y-range over the visible window
  let yLo = Infinity, yHi = -Infinity, minPos = Infinity;
  for (const s of p.series) {
    for (let i = 0; i < s.x.length; i++) {
      if (s.x[i] < xLo || s.x[i] > xHi) continue;
      const v = s.y[i];
      yLo = Math.min(yLo, v);
      yHi = Math.max(yHi, v);
      if (v > 0) minPos = Math.min(minPos, v);
    }
  }
  if (!Number.isFinite(yHi)) { yLo = 0; yHi = 1; minPos = 1e-12; }

  let toY: (v: number) => number;
  let yTickVals: number[];
  let yTickText: (v: number) => string;
  if (p.yscale === "log") {
    const top = Math.log10(yHi > 0 ? yHi : 1);
    const floor = Math.max(minPos === Infinity ? 1e-12 : minPos, yHi * 1e-9);
    const bot = Math.log10(floor);
    const span = Math.max(top - bot, 1e-6);
    toY = (v) => y0 + h - ((Math.log10(Math.max(v, floor)) - bot) / span) * h;
    yTickVals = decadeTicks(bot, top);
    yTickText = (e) => `1e${e}`;
  } else {
    const span = yHi - yLo || 1;
    const lo = yLo - 0.02 * span, hi = yHi + 0.02 * span;
    toY = (v) => y0 + h - ((v - lo) / (hi - lo)) * h;
    yTickVals = linearTicks(lo, hi, 5);
    yTickText = tickLabel;
  }
  const toX = (v: number) => x0 + ((v - xLo) / (xHi - xLo)) * w;

  const parts: string[] = [];
  parts.push(`<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(w)}" height="${fmt(h)}" fill="#fcfcfc" stroke="#444" stroke-width="1"/>`);
  if (p.title) {
    parts.push(`<text x="${fmt(x0 + w / 2)}" y="${fmt(box.y + 17)}" text-anchor="middle" font-size="13" ${FONT}>${esc(p.title)}</text>`);
  }

  for (const tv of linearTicks(xLo, xHi, 6)) {
    const px = toX(tv);
    parts.push(`<line x1="${fmt(px)}" y1="${fmt(y0 + h)}" x2="${fmt(px)}" y2="${fmt(y0 + h + 4)}" stroke="#444"/>`);
    parts.push(`<text x="${fmt(px)}" y="${fmt(y0 + h + 17)}" text-anchor="middle" font-size="11" ${FONT}>${esc(tickLabel(tv))}</text>`);
  }
  for (const e of yTickVals) {
    const vy = p.yscale === "log" ? toY(Math.pow(10, e)) : toY(e);
    parts.push(`<line x1="${fmt(x0 - 4)}" y1="${fmt(vy)}" x2="${fmt(x0)}" y2="${fmt(vy)}" stroke="#444"/>`);
    parts.push(`<text x="${fmt(x0 - 7)}" y="${fmt(vy + 4)}" text-anchor="end" font-size="11" ${FONT}>${esc(yTickText(e))}</text>`);
    parts.push(`<line x1="${fmt(x0)}" y1="${fmt(vy)}" x2="${fmt(x0 + w)}" y2="${fmt(vy)}" stroke="#ddd" stroke-width="0.5"/>`);
  }
  parts.push(`<text x="${fmt(x0 + w / 2)}" y="${fmt(y0 + h + 33)}" text-anchor="middle" font-size="12" ${FONT}>${esc(p.xlabel)}</text>`);
  parts.push(`<text x="${fmt(box.x + 14)}" y="${fmt(y0 + h / 2)}" text-anchor="middle" font-size="12" ${FONT} transform="rotate(-90 ${fmt(box.x + 14)} ${fmt(y0 + h / 2)})">${esc(p.ylabel)}</text>`);

  for (const vl of p.vlines) {
    const px = toX(vl.x);
    parts.push(`<line x1="${fmt(px)}" y1="${fmt(y0)}" x2="${fmt(px)}" y2="${fmt(y0 + h)}" stroke="#555" stroke-width="1" stroke-dasharray="5,4"/>`);
    if (vl.label) {
      parts.push(`<text x="${fmt(px + 3)}" y="${fmt(y0 + 12)}" font-size="10" ${FONT} fill="#333">${esc(vl.label)}</text>`);
    }
  }

  for (const s of p.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (s.x[i] < xLo || s.x[i] > xHi) continue;
      pts.push(`${fmt(toX(s.x[i]))},${fmt(toY(s.y[i]))}`);
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="${s.width}"${dash}/>`);
  }

  p.series.forEach((s, i) => {
    const lx = x0 + w - 150, ly = y0 + 14 + 15 * i;
    parts.push(`<line x1="${fmt(lx)}" y1="${fmt(ly - 4)}" x2="${fmt(lx + 22)}" y2="${fmt(ly - 4)}" stroke="${s.color}" stroke-width="2"/>`);
    parts.push(`<text x="${fmt(lx + 27)}" y="${fmt(ly)}" font-size="11" ${FONT}>${esc(s.label)}</text>`);
  });

  return parts.join("\n");
}

export function figureSvg(title: string | undefined, width: number,
                          height: number, panels: PlotPanel[]): string {
  const headerH = title ? 26 : 0;
  const panelW = width / panels.length;
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height + headerH}" viewBox="0 0 ${width} ${height + headerH}">`);
  parts.push(`<rect width="${width}" height="${height + headerH}" fill="white"/>`);
  if (title) {
    parts.push(`<text x="${fmt(width / 2)}" y="18" text-anchor="middle" font-size="15" ${FONT}>${esc(title)}</text>`);
  }
  panels.forEach((p, i) => {
    parts.push(panelSvg(p, { x: i * panelW, y: headerH, w: panelW, h: height }));
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
