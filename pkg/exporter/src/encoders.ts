/**
 * Embedding encoders. Two families:
 *
 * - "hash-<dim>": a deterministic reference encoder that expands the
 *   SHA-256 of the input bytes into a pseudo-random vector. It needs no
 *   model weights, runs anywhere, and embeds identical inputs to
 *   identical vectors, which makes exports reproducible end to end.
 * - anything else: treated as a CLIP-style model id and loaded through
 *   @xenova/transformers if that package is installed.
 *
 * Encoders return raw vectors; the export pipeline normalizes before
 * writing, so the store format does not depend on encoder conventions.
 */

import { createHash } from "node:crypto";

import { ExporterError } from "./errors.js";

export interface Encoder {
  readonly modelId: string;
  readonly dim: number;
  encodeImage(data: Buffer): Promise<Float64Array>;
  encodeText(text: string): Promise<Float64Array>;
}

/** Map 4 hash bytes to a uniform value in [-1, 1). */
function toUnit(word: number): number {
  return (word / 0x100000000) * 2 - 1;
}

export class HashEncoder implements Encoder {
  readonly modelId: string;
  readonly dim: number;

  constructor(dim: number) {
    if (!Number.isInteger(dim) || dim <= 0) {
      throw new ExporterError(`hash encoder dim must be a positive integer, got ${dim}`);
    }
    this.modelId = `hash-${dim}`;
    this.dim = dim;
  }

  private expand(data: Buffer): Float64Array {
    if (data.length === 0) {
      throw new ExporterError("cannot encode empty input");
    }
    const seed = createHash("sha256").update(data).digest();
    const out = new Float64Array(this.dim);
    let filled = 0;
    for (let block = 0; filled < this.dim; block++) {
      const counter = Buffer.alloc(4);
      counter.writeUInt32LE(block, 0);
      const bytes = createHash("sha256").update(seed).update(counter).digest();
      for (let i = 0; i + 4 <= bytes.length && filled < this.dim; i += 4) {
        out[filled++] = toUnit(bytes.readUInt32LE(i));
      }
    }
    return out;
  }

  async encodeImage(data: Buffer): Promise<Float64Array> {
    return this.expand(data);
  }

  async encodeText(text: string): Promise<Float64Array> {
    return this.expand(Buffer.from(text, "utf-8"));
  }
}

/** CLIP adapter over @xenova/transformers, loaded lazily on first use. */
class ClipEncoder implements Encoder {
  readonly modelId: string;
  readonly dim: number;
  private readonly imagePipe: (input: unknown, options: object) => Promise<{ data: ArrayLike<number> }>;
  private readonly textPipe: (input: unknown, options: object) => Promise<{ data: ArrayLike<number> }>;

  constructor(modelId: string, dim: number, imagePipe: ClipEncoder["imagePipe"], textPipe: ClipEncoder["textPipe"]) {
    this.modelId = modelId;
    this.dim = dim;
    this.imagePipe = imagePipe;
    this.textPipe = textPipe;
  }

  async encodeImage(data: Buffer): Promise<Float64Array> {
    const output = await this.imagePipe(data, { pooling: "mean", normalize: true });
    return Float64Array.from(output.data as ArrayLike<number>);
  }

  async encodeText(text: string): Promise<Float64Array> {
    const output = await this.textPipe(text, { pooling: "mean", normalize: true });
    return Float64Array.from(output.data as ArrayLike<number>);
  }
}

/**
 * Resolve a model id to an encoder.
 *
 * @param modelId - "hash-<dim>" for the deterministic reference encoder,
 *   otherwise a transformers model id such as "Xenova/clip-vit-base-patch32".
 */
export async function loadEncoder(modelId: string): Promise<Encoder> {
  const hashMatch = /^hash-(\d+)$/.exec(modelId);
  if (hashMatch) {
    return new HashEncoder(Number(hashMatch[1]));
  }
  let transformers: { pipeline: (task: string, model: string) => Promise<unknown> };
  try {
    // Non-literal specifier: the dependency is optional and resolved at
    // runtime only when a real model id is requested.
    const packageName = "@xenova/transformers";
    transformers = await import(packageName);
  } catch (err) {
    throw new ExporterError(
      `cannot load encoder model '${modelId}': @xenova/transformers is not installed (${err})`,
    );
  }
  try {
    const imagePipe = (await transformers.pipeline("image-feature-extraction", modelId)) as ClipEncoder["imagePipe"];
    const textPipe = (await transformers.pipeline("feature-extraction", modelId)) as ClipEncoder["textPipe"];
    const probe = await textPipe("probe", { pooling: "mean", normalize: true });
    return new ClipEncoder(modelId, probe.data.length, imagePipe, textPipe);
  } catch (err) {
    throw new ExporterError(`cannot load encoder model '${modelId}': ${err}`);
  }
}
