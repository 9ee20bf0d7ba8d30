import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { encodeWbx, readWbx, writeWbx, type WbxDataset } from "../src/wbx.js";

function sample(texts?: string[]): WbxDataset {
  return {
    features: new Float32Array([0.5, -1.25, 3.75, 2.0, 0.0, -0.5]),
    nRows: 3,
    nDims: 2,
    nClasses: 2,
    labels: new Uint32Array([0, 1, 0]),
    rowIds: new BigUint64Array([10n, 11n, 12n]),
    texts,
  };
}

describe("WBX1 encoding", () => {
  it("lays out header, features, labels and ids exactly", () => {
    const bytes = encodeWbx(sample());
    expect(bytes.length).toBe(20 + 4 * 6 + 4 * 3 + 8 * 3);
    const view = new DataView(bytes.buffer);
    expect(new TextDecoder().decode(bytes.subarray(0, 4))).toBe("WBX1");
    expect(view.getUint32(4, true)).toBe(3);
    expect(view.getUint32(8, true)).toBe(2);
    expect(view.getUint32(12, true)).toBe(2);
    expect(view.getUint32(16, true)).toBe(0);
    expect(view.getFloat32(20, true)).toBeCloseTo(0.5, 10);
    expect(view.getUint32(20 + 24, true)).toBe(0);
    expect(view.getBigUint64(20 + 24 + 12, true)).toBe(10n);
  });

  it("sets the text flag and length-prefixes UTF-8", () => {
    const bytes = encodeWbx(sample(["a", "éé", "c"]));
    const view = new DataView(bytes.buffer);
    expect(view.getUint32(16, true)).toBe(1);
    const textOffset = 20 + 24 + 12 + 24;
    expect(view.getUint32(textOffset, true)).toBe(1);
    // e-acute is two bytes in UTF-8
    expect(view.getUint32(textOffset + 4 + 1, true)).toBe(4);
  });

  it("round-trips through a file", () => {
    const dir = mkdtempSync(join(tmpdir(), "wbx-"));
    const path = join(dir, "t.wbx");
    const ds = sample(["x", "y z", ""]);
    writeWbx(path, ds);
    const back = readWbx(path);
    expect(Array.from(back.features)).toEqual(Array.from(ds.features));
    expect(Array.from(back.labels)).toEqual(Array.from(ds.labels));
    expect(Array.from(back.rowIds)).toEqual(Array.from(ds.rowIds));
    expect(back.texts).toEqual(ds.texts);
    expect(back.nClasses).toBe(2);
  });

  it("rejects empty datasets", () => {
    const empty: WbxDataset = {
      features: new Float32Array(0),
      nRows: 0,
      nDims: 4,
      nClasses: 1,
      labels: new Uint32Array(0),
      rowIds: new BigUint64Array(0),
    };
    expect(() => encodeWbx(empty)).toThrow(/empty dataset/);
  });

  it("rejects inconsistent shapes", () => {
    const bad = sample();
    bad.nDims = 3;
    expect(() => encodeWbx(bad)).toThrow(/features length/);
  });

  it("read rejects foreign files", () => {
    const dir = mkdtempSync(join(tmpdir(), "wbx-"));
    const path = join(dir, "bad.bin");
    writeFileSync(path, Buffer.from("definitely not wbx"));
    expect(() => readWbx(path)).toThrow(/not a WBX1 file/);
  });
});
