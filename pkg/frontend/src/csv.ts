/**
 * Parsing and validation of codedslice result CSVs.
 *
 * Raw string values are kept alongside parsed numbers so that figures can
 * embed the exact CSV text in the SVG (data-* attributes) without any
 * float round-tripping.
 */

import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "scenario",
  "protocol",
  "slicing_index",
  "mean_ppd",
  "mean_iod",
  "iod_stddev",
  "goodput",
  "completion_time",
] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export class CsvError extends Error {}

export interface ResultRow {
  /** untouched CSV strings, keyed by column name */
  raw: Record<string, string>;
  scenario: string;
  protocol: string;
  slicingIndex: number;
  num(column: ColumnName): number;
}

const NUMERIC_COLUMNS: readonly ColumnName[] = REQUIRED_COLUMNS.filter(
  (c) => c !== "scenario" && c !== "protocol",
);

function makeRow(raw: Record<string, string>, line: number): ResultRow {
  const num = (column: ColumnName): number => {
    const value = Number(raw[column]);
    if (!Number.isFinite(value)) {
      throw new CsvError(
        `row ${line}: column "${column}" is not numeric (got "${raw[column]}")`,
      );
    }
    return value;
  };
  for (const column of NUMERIC_COLUMNS) {
    num(column); // fail fast with the row number, not mid-render
  }
  return {
    raw,
    scenario: raw["scenario"],
    protocol: raw["protocol"],
    slicingIndex: num("slicing_index"),
    num,
  };
}

export function parseResultsCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new CsvError(`missing required column "${column}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new CsvError("CSV contains no data rows");
  }
  const rows = parsed.data.map((raw, i) => makeRow(raw, i + 2));
  const scenarios = [...new Set(rows.map((r) => r.scenario))].sort();
  if (scenarios.length > 1) {
    throw new CsvError(
      `mixed scenarios in one file: ${scenarios.join(", ")}; plot one scenario at a time`,
    );
  }
  return rows;
}

/** Rows for one protocol, ordered by slicing index. */
export function protocolSeries(rows: ResultRow[], protocol: string): ResultRow[] {
  return rows
    .filter((r) => r.protocol === protocol)
    .sort((a, b) => a.slicingIndex - b.slicingIndex);
}

export function protocolsIn(rows: ResultRow[]): string[] {
  const order = ["rlnc", "baseline"];
  const present = new Set(rows.map((r) => r.protocol));
  const known = order.filter((p) => present.has(p));
  const extra = [...present].filter((p) => !order.includes(p)).sort();
  return [...known, ...extra];
}
