// The extraction job: read a text file, embed in batches, mean-pool over
// real tokens, and write one WBX1 row per input line.

import { readFileSync } from "node:fs";

import type { EmbeddingBackend } from "./backend.js";
import { maskedMeanPool } from "./pool.js";
import { writeWbx, type WbxDataset } from "./wbx.js";

export interface ExtractJob {
  input: string; // one example per line, optional tab-separated label
  output: string;
  layer: number; // hidden-state index; -1 = layer feeding the head
  batchSize: number;
}

export interface ParsedInput {
  texts: string[];
  labels: Uint32Array;
  hasLabels: boolean;
}

export function parseInput(raw: string): ParsedInput {
  const lines = raw.split("\n");
  while (lines.length && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error("input file has no examples");
  }
  const texts: string[] = [];
  const labels = new Uint32Array(lines.length);
  let sawLabel = false;
  lines.forEach((line, i) => {
    const tab = line.lastIndexOf("\t");
    const tail = tab >= 0 ? line.slice(tab + 1).trim() : "";
    if (tab >= 0 && /^\d+$/.test(tail)) {
      texts.push(line.slice(0, tab));
      labels[i] = Number(tail);
      sawLabel = true;
    } else {
      texts.push(line);
      labels[i] = 0;
    }
  });
  return { texts, labels, hasLabels: sawLabel };
}

export async function runExtract(
  job: ExtractJob,
  backend: EmbeddingBackend,
  log: (msg: string) => void = (msg) => process.stderr.write(msg + "\n"),
): Promise<WbxDataset> {
  const parsed = parseInput(readFileSync(job.input, "utf-8"));
  if (!parsed.hasLabels) {
    log("labels absent: writing label 0 for every row");
  }
  const rows: Float32Array[] = [];
  for (let start = 0; start < parsed.texts.length; start += job.batchSize) {
    const batch = parsed.texts.slice(start, start + job.batchSize);
    const states = await backend.encode(batch, job.layer);
    if (states.length !== batch.length) {
      throw new Error(`backend returned ${states.length} states for ${batch.length} texts`);
    }
    for (const s of states) {
      rows.push(maskedMeanPool(s));
    }
  }
  const nDims = rows[0].length;
  const features = new Float32Array(rows.length * nDims);
  rows.forEach((row, i) => {
    if (row.length !== nDims) {
      throw new Error("backend produced rows of differing widths");
    }
    features.set(row, i * nDims);
  });
  const nClasses = Math.max(1, ...Array.from(parsed.labels, (v) => v + 1));
  const rowIds = new BigUint64Array(rows.length);
  for (let i = 0; i < rows.length; i++) {
    rowIds[i] = BigInt(i);
  }
  const ds: WbxDataset = {
    features,
    nRows: rows.length,
    nDims,
    nClasses,
    labels: parsed.labels,
    rowIds,
    texts: parsed.texts,
  };
  writeWbx(job.output, ds);
  log(`wrote ${job.output}: ${ds.nRows} rows x ${ds.nDims} dims`);
  return ds;
}
