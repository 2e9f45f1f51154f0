import { describe, expect, it } from "vitest";
import {
  column, columnIndex, columnsWithPrefix, parseTable, SchemaError,
} from "../src/csv.js";

describe("parseTable", () => {
  it("parses a header row and numeric body", () => {
    const table = parseTable("a,b\n1,2\n3,4\n");
    expect(table.columns).toEqual(["a", "b"]);
    expect(table.rows).toEqual([[1, 2], [3, 4]]);
  });

  it("maps the literal nan to NaN", () => {
    const table = parseTable("a\nnan\n");
    expect(table.rows[0][0]).toBeNaN();
  });

  it("rejects an empty file", () => {
    expect(() => parseTable("", "t.csv")).toThrow(SchemaError);
    expect(() => parseTable("", "t.csv")).toThrow("t.csv: empty table");
  });

  it("rejects a header with no rows", () => {
    expect(() => parseTable("a,b\n", "t.csv"))
      .toThrow("header but no rows");
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseTable("a,b\n1,2\n3\n", "t.csv"))
      .toThrow("row 2 has 1 cells, expected 2");
  });
});

describe("column access", () => {
  const table = parseTable("k,r_c,r_h\n0,1,2\n1,3,4\n");

  it("extracts a named column", () => {
    expect(column(table, "r_c", "t.csv")).toEqual([1, 3]);
  });

  it("names the offending column when it is missing", () => {
    expect(() => columnIndex(table, "r_t", "t.csv"))
      .toThrow('t.csv: missing required column "r_t"');
  });

  it("lists columns by prefix in header order", () => {
    expect(columnsWithPrefix(table, "r_")).toEqual(["r_c", "r_h"]);
  });
});
