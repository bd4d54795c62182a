#!/usr/bin/env node
/**
 * plot --figure NAME --in results.csv --out fig.svg
 *
 * Reads a codedslice result CSV and writes one deterministic SVG figure.
 */

import { readFileSync, writeFileSync } from "fs";

import { CsvError, parseResultsCsv } from "./csv";
import { FIGURE_NAMES, FigureName, render } from "./figures";

export interface CliOptions {
  figure: FigureName;
  input: string;
  output: string;
}

export class UsageError extends Error {}

const USAGE = `usage: codedslice-plot --figure NAME --in results.csv --out fig.svg [--format svg]
figures: ${FIGURE_NAMES.join(", ")}`;

export function parseArgs(argv: string[]): CliOptions {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new UsageError(`bad argument ${flag}`);
    }
    values[flag.slice(2)] = value;
  }
  for (const required of ["figure", "in", "out"]) {
    if (!(required in values)) {
      throw new UsageError(`missing --${required}`);
    }
  }
  const unknown = Object.keys(values).filter(
    (k) => !["figure", "in", "out", "format"].includes(k),
  );
  if (unknown.length > 0) {
    throw new UsageError(`unknown flag --${unknown[0]}`);
  }
  if ((values["format"] ?? "svg") !== "svg") {
    throw new UsageError(
      "only --format svg is supported (PNG needs an external rasterizer, " +
        "e.g. rsvg-convert or resvg)",
    );
  }
  const figure = values["figure"] as FigureName;
  if (!FIGURE_NAMES.includes(figure)) {
    throw new UsageError(
      `unknown figure "${values["figure"]}"; pick one of ${FIGURE_NAMES.join(", ")}`,
    );
  }
  return { figure, input: values["in"], output: values["out"] };
}

export function main(argv: string[]): number {
  let options: CliOptions;
  try {
    options = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`${err.message}\n${USAGE}`);
      return 2;
    }
    throw err;
  }
  try {
    const rows = parseResultsCsv(readFileSync(options.input, "utf-8"));
    writeFileSync(options.output, render(options.figure, rows) + "\n");
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(`error: cannot read ${options.input}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${options.output}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
