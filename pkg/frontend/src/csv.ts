/** Reader for the solver CLI's comma-separated tables (single header row). */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: number[][];
}

export class SchemaError extends Error {}

export function parseTable(text: string, path = "<string>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty table`);
  }
  const columns = lines[0].split(",");
  if (lines.length === 1) {
    throw new SchemaError(`${path}: table has a header but no rows`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `${path}: row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    rows.push(cells.map((cell) => (cell === "nan" ? NaN : Number(cell))));
  }
  return { columns, rows };
}

export function readTable(path: string): Table {
  return parseTable(readFileSync(path, "utf-8"), path);
}

/** Index of a required column; schema mismatches name the offending column. */
export function columnIndex(table: Table, name: string, path: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${path}: missing required column "${name}"`);
  }
  return idx;
}

export function column(table: Table, name: string, path: string): number[] {
  const idx = columnIndex(table, name, path);
  return table.rows.map((row) => row[idx]);
}

/** All column names sharing a prefix, in header order. */
export function columnsWithPrefix(table: Table, prefix: string): string[] {
  return table.columns.filter((name) => name.startsWith(prefix));
}
