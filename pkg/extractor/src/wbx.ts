// WBX1 binary dataset files. The byte layout is the contract with the
// wrapbox toolkit and is bit-exact:
//
//   magic "WBX1" | u32 nRows | u32 nDims | u32 nClasses | u32 flags
//   (little-endian; flags bit0 = texts present), then row-major f32
//   features, u32 labels, u64 row ids and, when flagged, one
//   u32-length-prefixed UTF-8 string per row.

import { writeFileSync, readFileSync } from "node:fs";

export interface WbxDataset {
  features: Float32Array; // row-major, nRows * nDims
  nRows: number;
  nDims: number;
  nClasses: number;
  labels: Uint32Array;
  rowIds: BigUint64Array;
  texts?: string[];
}

const MAGIC = 0x31584257; // "WBX1" little-endian

export function encodeWbx(ds: WbxDataset): Uint8Array {
  if (ds.nRows === 0) {
    throw new Error("empty dataset not writable");
  }
  if (ds.features.length !== ds.nRows * ds.nDims) {
    throw new Error(
      `features length ${ds.features.length} != ${ds.nRows} * ${ds.nDims}`,
    );
  }
  if (ds.labels.length !== ds.nRows || ds.rowIds.length !== ds.nRows) {
    throw new Error("labels/rowIds length mismatch");
  }
  if (ds.texts && ds.texts.length !== ds.nRows) {
    throw new Error("texts length mismatch");
  }
  const encoder = new TextEncoder();
  const textBytes = ds.texts ? ds.texts.map((t) => encoder.encode(t)) : [];
  const textSection = ds.texts
    ? textBytes.reduce((acc, b) => acc + 4 + b.length, 0)
    : 0;
  const total = 20 + 4 * ds.nRows * ds.nDims + 4 * ds.nRows + 8 * ds.nRows + textSection;
  const buf = new ArrayBuffer(total);
  const view = new DataView(buf);
  const bytes = new Uint8Array(buf);

  view.setUint32(0, MAGIC, true);
  view.setUint32(4, ds.nRows, true);
  view.setUint32(8, ds.nDims, true);
  view.setUint32(12, ds.nClasses, true);
  view.setUint32(16, ds.texts ? 1 : 0, true);

  let offset = 20;
  for (let i = 0; i < ds.features.length; i++) {
    view.setFloat32(offset, ds.features[i], true);
    offset += 4;
  }
  for (let i = 0; i < ds.nRows; i++) {
    view.setUint32(offset, ds.labels[i], true);
    offset += 4;
  }
  for (let i = 0; i < ds.nRows; i++) {
    view.setBigUint64(offset, ds.rowIds[i], true);
    offset += 8;
  }
  for (const raw of textBytes) {
    view.setUint32(offset, raw.length, true);
    offset += 4;
    bytes.set(raw, offset);
    offset += raw.length;
  }
  return bytes;
}

export function writeWbx(path: string, ds: WbxDataset): void {
  writeFileSync(path, encodeWbx(ds));
}

export function readWbx(path: string): WbxDataset {
  const bytes = readFileSync(path);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (bytes.length < 20 || view.getUint32(0, true) !== MAGIC) {
    throw new Error("not a WBX1 file");
  }
  const nRows = view.getUint32(4, true);
  const nDims = view.getUint32(8, true);
  const nClasses = view.getUint32(12, true);
  const flags = view.getUint32(16, true);
  let offset = 20;
  const features = new Float32Array(nRows * nDims);
  for (let i = 0; i < features.length; i++) {
    features[i] = view.getFloat32(offset, true);
    offset += 4;
  }
  const labels = new Uint32Array(nRows);
  for (let i = 0; i < nRows; i++) {
    labels[i] = view.getUint32(offset, true);
    offset += 4;
  }
  const rowIds = new BigUint64Array(nRows);
  for (let i = 0; i < nRows; i++) {
    rowIds[i] = view.getBigUint64(offset, true);
    offset += 8;
  }
  let texts: string[] | undefined;
  if (flags & 1) {
    const decoder = new TextDecoder("utf-8", { fatal: true });
    texts = [];
    for (let i = 0; i < nRows; i++) {
      const len = view.getUint32(offset, true);
      offset += 4;
      texts.push(decoder.decode(bytes.subarray(offset, offset + len)));
      offset += len;
    }
  }
  if (offset !== bytes.length) {
    throw new Error(`${bytes.length - offset} trailing bytes`);
  }
  return { features, nRows, nDims, nClasses, labels, rowIds, texts };
}
