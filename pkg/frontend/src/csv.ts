/**
 * Reader for the simulator's spectrum CSV schema:
 *
 *   t_ns, tau, I_total, I_sigma, I_pi, I_det1, I_det2,
 *   Re_Esigma, Im_Esigma, Re_Epi, Im_Epi
 *
 * Absent traces are empty fields and parse to null columns.
 */

export const CSV_COLUMNS = [
  "t_ns", "tau", "I_total", "I_sigma", "I_pi", "I_det1", "I_det2",
  "Re_Esigma", "Im_Esigma", "Re_Epi", "Im_Epi",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface Spectrum {
  /** Time axis in ns. */
  t_ns: number[];
  /** Per-column traces; a column missing from the file maps to null. */
  columns: Map<ColumnName, number[] | null>;
  path: string;
}

export class CsvError extends Error {}

export function parseSpectrum(text: string, path = "<memory>"): Spectrum {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length < 2) {
    throw new CsvError(`${path}: no data rows`);
  }
  const header = lines[0].split(",");
  if (header.length !== CSV_COLUMNS.length ||
      !CSV_COLUMNS.every((name, i) => header[i] === name)) {
    throw new CsvError(
      `${path}: header does not match the spectrum schema (got "${lines[0]}")`);
  }

  const n = lines.length - 1;
  const raw: (number | null)[][] = CSV_COLUMNS.map(() => new Array(n));
  for (let r = 0; r < n; r++) {
    const cells = lines[r + 1].split(",");
    if (cells.length !== CSV_COLUMNS.length) {
      throw new CsvError(`${path}: row ${r + 2} has ${cells.length} fields`);
    }
    for (let c = 0; c < cells.length; c++) {
      if (cells[c] === "") {
        raw[c][r] = null;
      } else {
        const v = Number(cells[c]);
        if (!Number.isFinite(v)) {
          throw new CsvError(`${path}: row ${r + 2}, column ${CSV_COLUMNS[c]}: ` +
            `cannot parse "${cells[c]}"`);
        }
        raw[c][r] = v;
      }
    }
  }

  const columns = new Map<ColumnName, number[] | null>();
  CSV_COLUMNS.forEach((name, c) => {
    const col = raw[c];
    columns.set(name, col.every((v) => v === null) ? null : (col as number[]));
  });
  const t = columns.get("t_ns");
  if (t === null || t === undefined) {
    throw new CsvError(`${path}: t_ns column is empty`);
  }
  return { t_ns: t, columns, path };
}

/** Fetch a trace, failing loudly when the file does not carry it. */
export function requireColumn(spec: Spectrum, name: ColumnName): number[] {
  const col = spec.columns.get(name);
  if (!col) {
    throw new CsvError(`${spec.path}: column ${name} is absent`);
  }
  if (col.some((v) => v === null)) {
    throw new CsvError(`${spec.path}: column ${name} has gaps`);
  }
  return col;
}
