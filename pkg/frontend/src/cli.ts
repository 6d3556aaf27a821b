#!/usr/bin/env node
/** figures sweep --in summary.csv --out fig.png
 *  figures box --in records.csv --a LM --b SC --out box.png */

import { readFileSync } from "node:fs";

import { SchemaError, parseRecords, parseSummary } from "./csv.js";
import { buildBoxPair, buildSweepPanels } from "./figure.js";
import { renderBoxplot, renderSweepFigure } from "./render.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flag list near '${argv[i]}'`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

export function run(argv: string[]): void {
  const [command, ...rest] = argv;
  const flags = parseFlags(rest);
  if (command === "sweep") {
    const text = readFileSync(need(flags, "in"), "utf8");
    renderSweepFigure(buildSweepPanels(parseSummary(text)), need(flags, "out"));
  } else if (command === "box") {
    const text = readFileSync(need(flags, "in"), "utf8");
    const pair = buildBoxPair(parseRecords(text), need(flags, "a"), need(flags, "b"));
    renderBoxplot(pair, need(flags, "out"));
  } else {
    throw new Error(`unknown command '${command ?? ""}' (expected sweep | box)`);
  }
}

const isMain =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (isMain) {
  try {
    run(process.argv.slice(2));
  } catch (err) {
    if (err instanceof SchemaError || err instanceof Error) {
      console.error(`figures: ${err.message}`);
      process.exit(1);
    }
    throw err;
  }
}
