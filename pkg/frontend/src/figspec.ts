/**
 * Flat-text figure specifications, one file per figure.
 *
 * Line-oriented keyword format; '#' starts a comment. Figure-level keys come
 * first, then one or more `panel` blocks:
 *
 *   output figures/fig4.svg
 *   title  Detector traces behind the polarizer
 *   width  900
 *
 *   panel
 *     title  full range
 *     csv    data/s1_scheme1_target2.csv
 *     series I_det1 label=sigma color=#e08214
 *     series I_det2 label=pi    color=#3a6fd8
 *     yscale log
 *     xrange 0 500
 *     vline  7  label=t0
 *     vline  74 label=t1
 */

export interface SeriesSpec {
  column: string;
  label: string;
  color: string;
  width: number;
  dash?: string;
}

export interface VLineSpec {
  t_ns: number;
  label?: string;
}

export interface PanelSpec {
  csv: string;
  title?: string;
  xlabel: string;
  ylabel: string;
  yscale: "log" | "linear";
  xrange?: [number, number];
  series: SeriesSpec[];
  vlines: VLineSpec[];
}

export interface FigureSpec {
  output: string;
  title?: string;
  width: number;
  height: number;
  panels: PanelSpec[];
}

export class FigSpecError extends Error {}

const PALETTE = ["#e08214", "#3a6fd8", "#c0392b", "#2d6a4f", "#7d3c98"];

function parseKeyValues(tokens: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (const tok of tokens) {
    const eq = tok.indexOf("=");
    if (eq <= 0) {
      throw new FigSpecError(`expected key=value, got "${tok}"`);
    }
    out.set(tok.slice(0, eq), tok.slice(eq + 1));
  }
  return out;
}

export function parseFigureSpec(text: string, path = "<memory>"): FigureSpec {
  const fig: FigureSpec = { output: "", width: 880, height: 420, panels: [] };
  let panel: PanelSpec | null = null;

  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const stripped = lines[i].replace(/#.*$/, "").trim();
    if (!stripped) continue;
    const [key, ...rest] = stripped.split(/\s+/);
    const fail = (msg: string): never => {
      throw new FigSpecError(`${path}:${i + 1}: ${msg}`);
    };

    switch (key) {
      case "output":
        fig.output = rest.join(" ");
        break;
      case "title":
        if (panel) panel.title = rest.join(" ");
        else fig.title = rest.join(" ");
        break;
      case "width":
        fig.width = Number(rest[0]);
        break;
      case "height":
        fig.height = Number(rest[0]);
        break;
      case "panel":
        panel = { csv: "", xlabel: "t (ns)", ylabel: "intensity",
                  yscale: "log", series: [], vlines: [] };
        fig.panels.push(panel);
        break;
      case "csv":
        if (!panel) fail("csv outside a panel block");
        panel!.csv = rest.join(" ");
        break;
      case "xlabel":
      case "ylabel":
        if (!panel) fail(`${key} outside a panel block`);
        panel![key] = rest.join(" ");
        break;
      case "yscale":
        if (!panel) fail("yscale outside a panel block");
        if (rest[0] !== "log" && rest[0] !== "linear") {
          fail(`yscale must be log or linear, got "${rest[0]}"`);
        }
        panel!.yscale = rest[0] as "log" | "linear";
        break;
      case "xrange": {
        if (!panel) fail("xrange outside a panel block");
        const lo = Number(rest[0]);
        const hi = Number(rest[1]);
        if (!Number.isFinite(lo) || !Number.isFinite(hi) || hi <= lo) {
          fail(`bad xrange "${rest.join(" ")}"`);
        }
        panel!.xrange = [lo, hi];
        break;
      }
      case "series": {
        if (!panel) fail("series outside a panel block");
        const column = rest[0];
        if (!column) fail("series needs a column name");
        const kv = parseKeyValues(rest.slice(1));
        panel!.series.push({
          column,
          label: kv.get("label") ?? column,
          color: kv.get("color") ?? PALETTE[panel!.series.length % PALETTE.length],
          width: Number(kv.get("width") ?? "1.3"),
          dash: kv.get("dash"),
        });
        break;
      }
      case "vline": {
        if (!panel) fail("vline outside a panel block");
        const t = Number(rest[0]);
        if (!Number.isFinite(t)) fail(`bad vline position "${rest[0]}"`);
        const kv = parseKeyValues(rest.slice(1));
        panel!.vlines.push({ t_ns: t, label: kv.get("label") });
        break;
      }
      default:
        fail(`unknown keyword "${key}"`);
    }
  }

  if (!fig.output) throw new FigSpecError(`${path}: missing output path`);
  if (fig.panels.length === 0) throw new FigSpecError(`${path}: no panels`);
  for (const p of fig.panels) {
    if (!p.csv) throw new FigSpecError(`${path}: panel without a csv source`);
    if (p.series.length === 0) {
      throw new FigSpecError(`${path}: panel without series`);
    }
  }
  return fig;
}
