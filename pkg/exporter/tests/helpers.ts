/** Test-side store reader and toy dataset builder. The reader parses the
 * container with Buffer primitives only, independent of the writer. */

import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface ParsedItem {
  id: string;
  class: string;
  template_id: string | null;
}

export interface ParsedStore {
  dim: number;
  count: number;
  modality: string;
  dataset_name: string;
  model_id: string;
  normalized: boolean;
  items: ParsedItem[];
  vectors: Float32Array[];
}

export function parseStoreBytes(data: Buffer): ParsedStore {
  if (data.subarray(0, 8).toString("ascii") !== "FSEMBED1") {
    throw new Error("bad magic");
  }
  const manifestLength = data.readUInt32LE(8);
  const manifest = JSON.parse(data.subarray(12, 12 + manifestLength).toString("utf-8"));
  const payload = data.subarray(12 + manifestLength);
  if (payload.length !== manifest.count * manifest.dim * 4) {
    throw new Error("payload length mismatch");
  }
  const vectors: Float32Array[] = [];
  for (let row = 0; row < manifest.count; row++) {
    const vector = new Float32Array(manifest.dim);
    for (let j = 0; j < manifest.dim; j++) {
      vector[j] = payload.readFloatLE((row * manifest.dim + j) * 4);
    }
    vectors.push(vector);
  }
  return { ...manifest, vectors };
}

export function readStoreFile(path: string): ParsedStore {
  return parseStoreBytes(readFileSync(path));
}

export function norm(vector: ArrayLike<number>): number {
  let sum = 0;
  for (let i = 0; i < vector.length; i++) sum += vector[i] * vector[i];
  return Math.sqrt(sum);
}

/**
 * Lay out a toy folder dataset: root/<split>/<class>/<files>. Image
 * files carry arbitrary deterministic bytes; the hash encoder does not
 * decode pixels.
 */
export function makeToyDataset(
  split = "test",
  classes: Record<string, string[]> = {
    cat: ["a.png", "b.png", "c.png", "d.png", "e.png"],
    dog: ["f.png", "g.png", "h.png", "i.png", "j.png"],
  },
): string {
  const root = mkdtempSync(join(tmpdir(), "toyds-"));
  for (const [label, files] of Object.entries(classes)) {
    const dir = join(root, split, label);
    mkdirSync(dir, { recursive: true });
    for (const name of files) {
      writeFileSync(join(dir, name), Buffer.from(`pixels of ${label}/${name}`));
    }
  }
  return root;
}
