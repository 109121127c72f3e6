import { mkdtempSync, readdirSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ExporterError, normalize, storeToBytes, writeStoreFile } from "../src/index.js";
import type { StoreFile } from "../src/index.js";
import { parseStoreBytes } from "./helpers.js";

function imageStore(overrides: Partial<StoreFile> = {}): StoreFile {
  return {
    dim: 2,
    modality: "image",
    datasetName: "toy",
    modelId: "hash-2",
    normalized: true,
    items: [
      { id: "a", classLabel: "cat", vector: [0.6, 0.8] },
      { id: "b", classLabel: "dog", vector: [1.0, 0.0] },
    ],
    ...overrides,
  };
}

describe("storeToBytes", () => {
  it("produces the documented byte layout", () => {
    const bytes = storeToBytes(imageStore());
    const manifest = {
      dim: 2,
      count: 2,
      modality: "image",
      dataset_name: "toy",
      model_id: "hash-2",
      normalized: true,
      items: [
        { id: "a", class: "cat", template_id: null },
        { id: "b", class: "dog", template_id: null },
      ],
    };
    const body = Buffer.from(JSON.stringify(manifest), "utf-8");
    const header = Buffer.alloc(12);
    header.write("FSEMBED1", 0, "ascii");
    header.writeUInt32LE(body.length, 8);
    const payload = Buffer.alloc(16);
    let offset = 0;
    for (const x of [0.6, 0.8, 1.0, 0.0]) {
      payload.writeFloatLE(x, offset);
      offset += 4;
    }
    expect(bytes.equals(Buffer.concat([header, body, payload]))).toBe(true);
  });

  it("round-trips through an independent parse", () => {
    const parsed = parseStoreBytes(storeToBytes(imageStore()));
    expect(parsed.count).toBe(2);
    expect(parsed.items.map((item) => item.id)).toEqual(["a", "b"]);
    expect(parsed.items.every((item) => item.template_id === null)).toBe(true);
    expect(Array.from(parsed.vectors[1])).toEqual([1, 0]);
  });

  it("rejects duplicate ids", () => {
    const store = imageStore();
    store.items[1] = { ...store.items[1], id: "a" };
    expect(() => storeToBytes(store)).toThrow(/duplicate id 'a'/);
  });

  it("rejects empty class labels", () => {
    const store = imageStore();
    store.items[0] = { ...store.items[0], classLabel: "" };
    expect(() => storeToBytes(store)).toThrow(/empty class label/);
  });

  it("requires template ids on text items and forbids them on images", () => {
    const text = imageStore({ modality: "text" });
    expect(() => storeToBytes(text)).toThrow(/missing a template_id/);
    const image = imageStore();
    image.items[0] = { ...image.items[0], templateId: "tpl-0" };
    expect(() => storeToBytes(image)).toThrow(/carries a template_id/);
  });

  it("rejects non-finite components naming the item", () => {
    const store = imageStore({ normalized: false });
    store.items[1] = { ...store.items[1], vector: [Number.NaN, 0] };
    expect(() => storeToBytes(store)).toThrow(/item 'b' has a non-finite/);
  });

  it("rejects norm violations in normalized stores", () => {
    const store = imageStore();
    store.items[0] = { ...store.items[0], vector: [3, 4] };
    expect(() => storeToBytes(store)).toThrow(/norm 5(\.0*)? exceeds tolerance/);
  });

  it("rejects rows of the wrong dimension", () => {
    const store = imageStore();
    store.items[0] = { ...store.items[0], vector: [0.6, 0.8, 0.0] };
    expect(() => storeToBytes(store)).toThrow(/dim 3, store dim 2/);
  });

  it("accepts an empty store", () => {
    const parsed = parseStoreBytes(storeToBytes(imageStore({ items: [] })));
    expect(parsed.count).toBe(0);
    expect(parsed.vectors).toEqual([]);
  });
});

describe("writeStoreFile", () => {
  it("writes the same bytes as storeToBytes and leaves no temp files", () => {
    const dir = mkdtempSync(join(tmpdir(), "fmt-"));
    const path = join(dir, "store.fsembed");
    const store = imageStore();
    writeStoreFile(store, path);
    expect(readFileSync(path).equals(storeToBytes(store))).toBe(true);
    expect(readdirSync(dir)).toEqual(["store.fsembed"]);
  });

  it("validates before touching the filesystem", () => {
    const dir = mkdtempSync(join(tmpdir(), "fmt-"));
    const store = imageStore();
    store.items[0] = { ...store.items[0], vector: [3, 4] };
    expect(() => writeStoreFile(store, join(dir, "bad.fsembed"))).toThrow(ExporterError);
    expect(readdirSync(dir)).toEqual([]);
  });
});

describe("normalize", () => {
  it("scales to unit norm preserving direction", () => {
    expect(Array.from(normalize([3, 4]))).toEqual([0.6, 0.8]);
  });

  it("rejects zero vectors", () => {
    expect(() => normalize([0, 0])).toThrow(/cannot normalize/);
  });
});
