import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { HashBackend } from "../src/backend.js";
import { parseInput, runExtract } from "../src/extract.js";
import { readWbx } from "../src/wbx.js";

const quiet = () => {};

function tmpInput(lines: string[]): { dir: string; input: string } {
  const dir = mkdtempSync(join(tmpdir(), "extract-"));
  const input = join(dir, "texts.tsv");
  writeFileSync(input, lines.join("\n") + "\n");
  return { dir, input };
}

describe("input parsing", () => {
  it("splits optional tab-separated labels", () => {
    const parsed = parseInput("good day\t0\nbad day\t1\n");
    expect(parsed.texts).toEqual(["good day", "bad day"]);
    expect(Array.from(parsed.labels)).toEqual([0, 1]);
    expect(parsed.hasLabels).toBe(true);
  });

  it("treats unlabeled lines as label 0", () => {
    const parsed = parseInput("no label here\nanother line\n");
    expect(parsed.hasLabels).toBe(false);
    expect(Array.from(parsed.labels)).toEqual([0, 0]);
  });

  it("keeps tabs that are not label separators", () => {
    const parsed = parseInput("a\tb\tnot-a-number\n");
    expect(parsed.texts).toEqual(["a\tb\tnot-a-number"]);
  });

  it("rejects empty files", () => {
    expect(() => parseInput("")).toThrow(/no examples/);
  });
});

describe("extraction pipeline", () => {
  it("writes one row per line with labels and texts", async () => {
    const { dir, input } = tmpInput(["alpha beta\t1", "gamma\t0", "alpha beta\t1"]);
    const out = join(dir, "emb.wbx");
    const backend = new HashBackend(8);
    await runExtract({ input, output: out, layer: -1, batchSize: 2 }, backend, quiet);
    const ds = readWbx(out);
    expect(ds.nRows).toBe(3);
    expect(ds.nDims).toBe(8);
    expect(ds.nClasses).toBe(2);
    expect(Array.from(ds.labels)).toEqual([1, 0, 1]);
    expect(ds.texts).toEqual(["alpha beta", "gamma", "alpha beta"]);
    // identical inputs embed identically
    const row = (i: number) => Array.from(ds.features.slice(i * 8, (i + 1) * 8));
    expect(row(0)).toEqual(row(2));
    expect(row(0)).not.toEqual(row(1));
  });

  it("pools padding-invariantly: batch of 1 equals batch of 8", async () => {
    const lines = [
      "one",
      "two tokens",
      "three little tokens",
      "a much longer sentence with many more tokens inside",
      "x",
      "y z",
      "p q r s",
      "last line",
    ];
    const { dir, input } = tmpInput(lines);
    const backend = new HashBackend(12);
    const outA = join(dir, "a.wbx");
    const outB = join(dir, "b.wbx");
    await runExtract({ input, output: outA, layer: -1, batchSize: 1 }, backend, quiet);
    await runExtract({ input, output: outB, layer: -1, batchSize: 8 }, backend, quiet);
    const a = readWbx(outA).features;
    const b = readWbx(outB).features;
    for (let i = 0; i < a.length; i++) {
      expect(Math.abs(a[i] - b[i])).toBeLessThanOrEqual(1e-5);
    }
  });

  it("single-token input equals its own hidden state", async () => {
    const { dir, input } = tmpInput(["solo"]);
    const out = join(dir, "solo.wbx");
    const backend = new HashBackend(6);
    await runExtract({ input, output: out, layer: -1, batchSize: 4 }, backend, quiet);
    const ds = readWbx(out);
    expect(Array.from(ds.features)).toEqual(Array.from(backend.tokenVector("solo", -1)));
  });

  it("warns when labels are absent", async () => {
    const { dir, input } = tmpInput(["no labels at all"]);
    const messages: string[] = [];
    await runExtract(
      { input, output: join(dir, "o.wbx"), layer: -1, batchSize: 2 },
      new HashBackend(4),
      (m) => messages.push(m),
    );
    expect(messages.some((m) => m.includes("labels absent"))).toBe(true);
  });
});

describe("CLI", () => {
  it("extracts via the hash backend end to end", () => {
    const { dir, input } = tmpInput(["cli line one\t0", "cli line two\t1"]);
    const out = join(dir, "cli.wbx");
    execFileSync("node", [
      "dist/cli.js", "extract", "--backend", "hash",
      "--in", input, "--out", out, "--batch", "2",
    ]);
    const ds = readWbx(out);
    expect(ds.nRows).toBe(2);
  });

  it("exits 2 on missing flags", () => {
    const result = spawnSync("node", ["dist/cli.js", "extract"]);
    expect(result.status).toBe(2);
  });
});

describe("conformance with the primary loader", () => {
  it("emitted files pass the full dataset invariant suite", async () => {
    const { dir, input } = tmpInput(["conform one\t0", "conform two\t1", "conform three\t1"]);
    const out = join(dir, "conform.wbx");
    await runExtract({ input, output: out, layer: -1, batchSize: 2 }, new HashBackend(8), quiet);
    const script = [
      "import sys, wrapbox",
      `ds = wrapbox.load_dataset(${JSON.stringify(out)})`,
      "ds.validate()",
      "assert ds.n_rows == 3 and ds.n_dims == 8, (ds.n_rows, ds.n_dims)",
      "assert ds.labels.tolist() == [0, 1, 1]",
      "assert ds.texts == ['conform one', 'conform two', 'conform three']",
      "print('conformant')",
    ].join("\n");
    const result = spawnSync("python3", ["-c", script], { encoding: "utf-8" });
    expect(result.status, result.stderr).toBe(0);
    expect(result.stdout).toContain("conformant");
  });
});
