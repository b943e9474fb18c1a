/**
 * Figure rendering: resolve a figure spec against its CSV inputs, validate,
 * and write the SVG. Inputs are only ever read; rendering the same spec
 * twice produces identical bytes.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { parseSpectrum, requireColumn, CSV_COLUMNS, ColumnName, Spectrum } from "./csv.js";
import { FigureSpec, PanelSpec, parseFigureSpec } from "./figspec.js";
import { figureSvg, PlotPanel } from "./svg.js";

export class RenderError extends Error {}

export interface RenderResult {
  outputPath: string;
  bytes: number;
}

function resolvePanel(panel: PanelSpec, dataDir: string,
                      cache: Map<string, Spectrum>): PlotPanel {
  const csvPath = resolve(dataDir, panel.csv);
  let spectrum = cache.get(csvPath);
  if (!spectrum) {
    let text: string;
    try {
      text = readFileSync(csvPath, "utf-8");
    } catch {
      throw new RenderError(`cannot read ${csvPath}`);
    }
    spectrum = parseSpectrum(text, csvPath);
    cache.set(csvPath, spectrum);
  }

  const t = spectrum.t_ns;
  const xrange: [number, number] = panel.xrange ?? [t[0], t[t.length - 1]];
  const [lo, hi] = xrange;

  const series = panel.series.map((s) => {
    if (!(CSV_COLUMNS as readonly string[]).includes(s.column)) {
      throw new RenderError(`${csvPath}: "${s.column}" is not a spectrum column`);
    }
    const y = requireColumn(spectrum!, s.column as ColumnName);
    const visible = y.filter((_, i) => t[i] >= lo && t[i] <= hi);
    if (visible.length === 0) {
      throw new RenderError(`${csvPath}: ${s.column} has no samples in ` +
        `[${lo}, ${hi}] ns`);
    }
    if (visible.every((v) => v === 0)) {
      throw new RenderError(`${csvPath}: ${s.column} is identically zero in ` +
        `[${lo}, ${hi}] ns; refusing to draw a blank trace`);
    }
    return { label: s.label, color: s.color, width: s.width, dash: s.dash,
             x: t, y };
  });

  for (const vl of panel.vlines) {
    if (vl.t_ns < lo || vl.t_ns > hi) {
      throw new RenderError(`annotation at ${vl.t_ns} ns lies outside the ` +
        `panel range [${lo}, ${hi}] ns`);
    }
  }

  return {
    title: panel.title,
    xlabel: panel.xlabel,
    ylabel: panel.ylabel,
    yscale: panel.yscale,
    xrange,
    series,
    vlines: panel.vlines.map((v) => ({ x: v.t_ns, label: v.label })),
  };
}

export function renderFigure(fig: FigureSpec, dataDir: string,
                             outDir?: string): RenderResult {
  const cache = new Map<string, Spectrum>();
  const panels = fig.panels.map((p) => resolvePanel(p, dataDir, cache));
  const svg = figureSvg(fig.title, fig.width, fig.height, panels);
  const outputPath = resolve(outDir ?? dataDir, fig.output);
  mkdirSync(dirname(outputPath), { recursive: true });
  writeFileSync(outputPath, svg, "utf-8");
  return { outputPath, bytes: Buffer.byteLength(svg) };
}

export function renderFigureFile(specPath: string, dataDir?: string,
                                 outDir?: string): RenderResult {
  const text = readFileSync(specPath, "utf-8");
  const fig = parseFigureSpec(text, specPath);
  const base = dataDir ?? dirname(resolve(specPath));
  return renderFigure(fig, base, outDir);
}
