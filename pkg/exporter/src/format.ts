/**
 * Binary embedding store container writer.
 *
 * Layout (little-endian throughout):
 *   bytes 0-7    magic "FSEMBED1"
 *   bytes 8-11   uint32 manifest length M
 *   bytes 12..   UTF-8 JSON manifest {dim, count, modality, dataset_name,
 *                model_id, normalized, items: [{id, class, template_id}]}
 *   remaining    count x dim float32 vectors, row-major, one row per item
 *
 * The writer enforces the same invariants the evaluation engine checks on
 * load, so an exported file is accepted with zero diagnostics.
 */

import { randomBytes } from "node:crypto";
import { renameSync, rmSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { ExporterError } from "./errors.js";

export const MAGIC = "FSEMBED1";

/** Norm slack for unit vectors stored at 32-bit precision. */
export const UNIT_NORM_TOL = 1e-5;

export type Modality = "image" | "text";

export interface StoreItem {
  id: string;
  classLabel: string;
  /** Unit-normalized embedding; rounded to float32 on write. */
  vector: Float64Array | number[];
  /** Required for text items, absent for image items. */
  templateId?: string;
}

export interface StoreFile {
  dim: number;
  modality: Modality;
  datasetName: string;
  modelId: string;
  normalized: boolean;
  items: StoreItem[];
}

/** Scale a vector to unit norm in double precision. */
export function normalize(vector: Float64Array | number[]): Float64Array {
  let sum = 0;
  for (const x of vector) sum += x * x;
  const norm = Math.sqrt(sum);
  if (!(norm > 0) || !Number.isFinite(norm)) {
    throw new ExporterError(`cannot normalize vector with norm ${norm}`);
  }
  const out = new Float64Array(vector.length);
  for (let i = 0; i < vector.length; i++) out[i] = vector[i] / norm;
  return out;
}

function validateStore(store: StoreFile): void {
  if (!Number.isInteger(store.dim) || store.dim <= 0) {
    throw new ExporterError(`dim must be a positive integer, got ${store.dim}`);
  }
  if (store.modality !== "image" && store.modality !== "text") {
    throw new ExporterError(`unknown modality '${store.modality}'`);
  }
  const seen = new Set<string>();
  for (const item of store.items) {
    if (!item.id) throw new ExporterError("empty item id");
    if (seen.has(item.id)) throw new ExporterError(`duplicate id '${item.id}'`);
    seen.add(item.id);
    if (!item.classLabel) {
      throw new ExporterError(`item '${item.id}' has an empty class label`);
    }
    if (store.modality === "text" && item.templateId === undefined) {
      throw new ExporterError(`text item '${item.id}' is missing a template_id`);
    }
    if (store.modality === "image" && item.templateId !== undefined) {
      throw new ExporterError(`image item '${item.id}' carries a template_id`);
    }
    if (item.vector.length !== store.dim) {
      throw new ExporterError(
        `item '${item.id}' has dim ${item.vector.length}, store dim ${store.dim}`,
      );
    }
    let sum = 0;
    for (const x of item.vector) {
      if (!Number.isFinite(x)) {
        throw new ExporterError(`item '${item.id}' has a non-finite vector component`);
      }
      // Accumulate at storage precision so the check matches what readers see.
      const f = Math.fround(x);
      sum += f * f;
    }
    if (store.normalized && Math.abs(Math.sqrt(sum) - 1) > UNIT_NORM_TOL) {
      throw new ExporterError(
        `item '${item.id}' norm ${Math.sqrt(sum)} exceeds tolerance ${UNIT_NORM_TOL}`,
      );
    }
  }
}

/** Assemble the full container as a single buffer. */
export function storeToBytes(store: StoreFile): Buffer {
  validateStore(store);
  const manifest = {
    dim: store.dim,
    count: store.items.length,
    modality: store.modality,
    dataset_name: store.datasetName,
    model_id: store.modelId,
    normalized: store.normalized,
    items: store.items.map((item) => ({
      id: item.id,
      class: item.classLabel,
      template_id: item.templateId ?? null,
    })),
  };
  const body = Buffer.from(JSON.stringify(manifest), "utf-8");
  const header = Buffer.alloc(12);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(body.length, 8);
  const payload = Buffer.alloc(store.items.length * store.dim * 4);
  let offset = 0;
  for (const item of store.items) {
    for (const x of item.vector) {
      payload.writeFloatLE(x, offset);
      offset += 4;
    }
  }
  return Buffer.concat([header, body, payload]);
}

/**
 * Write the container atomically: the bytes land in a temp file next to
 * the destination and are renamed into place, so a crash never leaves a
 * half-written store at the target path.
 */
export function writeStoreFile(store: StoreFile, path: string): void {
  const bytes = storeToBytes(store);
  const tmp = join(dirname(path), `.${randomBytes(6).toString("hex")}.tmp`);
  try {
    writeFileSync(tmp, bytes);
    renameSync(tmp, path);
  } catch (err) {
    rmSync(tmp, { force: true });
    throw err;
  }
}
