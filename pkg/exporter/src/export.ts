/**
 * Export pipelines: embed a folder dataset's images, or a label set's
 * prompt expansions, normalize, and write the store container.
 */

import { readFileSync } from "node:fs";

import { scanImageFolder } from "./datasets.js";
import { Encoder } from "./encoders.js";
import { ExporterError } from "./errors.js";
import { normalize, StoreItem, writeStoreFile } from "./format.js";
import { expandTemplate, PromptTemplateSet } from "./templates.js";

export interface ExportManifest {
  datasetRoot: string;
  split: string;
  datasetName: string;
  batchSize: number;
  outPath: string;
  /** Informational; the reference encoder ignores it. */
  device?: string;
  allowTrain?: boolean;
}

export interface ExportSummary {
  written: string;
  exported: number;
  skipped: number;
  classes: number;
  warnings: string[];
}

function* batches<T>(values: T[], size: number): Generator<T[]> {
  for (let i = 0; i < values.length; i += size) {
    yield values.slice(i, i + size);
  }
}

/**
 * Embed every image of the manifest's split and write an image store.
 *
 * Unreadable or unencodable images are skipped with a warning and show
 * up in the summary counts instead of failing the whole export.
 */
export async function exportImageStore(
  manifest: ExportManifest,
  encoder: Encoder,
): Promise<ExportSummary> {
  if (!Number.isInteger(manifest.batchSize) || manifest.batchSize <= 0) {
    throw new ExporterError(`batch size must be a positive integer, got ${manifest.batchSize}`);
  }
  const entries = scanImageFolder(manifest.datasetRoot, manifest.split, manifest.allowTrain);
  const items: StoreItem[] = [];
  const warnings: string[] = [];
  for (const batch of batches(entries, manifest.batchSize)) {
    for (const entry of batch) {
      try {
        const vector = await encoder.encodeImage(readFileSync(entry.absPath));
        items.push({ id: entry.id, classLabel: entry.label, vector: normalize(vector) });
      } catch (err) {
        warnings.push(`skipped ${entry.id}: ${err instanceof Error ? err.message : err}`);
      }
    }
  }
  if (items.length === 0) {
    throw new ExporterError("every image failed to encode; nothing to write");
  }
  writeStoreFile(
    {
      dim: encoder.dim,
      modality: "image",
      datasetName: manifest.datasetName,
      modelId: encoder.modelId,
      normalized: true,
      items,
    },
    manifest.outPath,
  );
  return {
    written: manifest.outPath,
    exported: items.length,
    skipped: warnings.length,
    classes: new Set(items.map((item) => item.classLabel)).size,
    warnings,
  };
}

/**
 * Embed one prompt per (class, template) pair and write a text store.
 * Rows are stored individually with their template id; averaging into a
 * single class vector happens engine-side, which keeps template
 * ablations possible from one export.
 */
export async function exportTextStore(
  labels: string[],
  templateSet: PromptTemplateSet,
  manifest: Pick<ExportManifest, "datasetName" | "batchSize" | "outPath">,
  encoder: Encoder,
): Promise<ExportSummary> {
  if (labels.length === 0) {
    throw new ExporterError("label list is empty");
  }
  const seen = new Set<string>();
  for (const label of labels) {
    if (!label) throw new ExporterError("empty class label");
    if (seen.has(label)) throw new ExporterError(`duplicate class label '${label}'`);
    seen.add(label);
  }
  const pairs = labels.flatMap((label) =>
    templateSet.templates.map((template, index) => ({
      label,
      templateId: `tpl-${index}`,
      prompt: expandTemplate(template, label),
    })),
  );
  const items: StoreItem[] = [];
  for (const batch of batches(pairs, manifest.batchSize)) {
    for (const pair of batch) {
      const vector = await encoder.encodeText(pair.prompt);
      items.push({
        id: `${pair.label}::${pair.templateId}`,
        classLabel: pair.label,
        templateId: pair.templateId,
        vector: normalize(vector),
      });
    }
  }
  writeStoreFile(
    {
      dim: encoder.dim,
      modality: "text",
      datasetName: manifest.datasetName,
      modelId: encoder.modelId,
      normalized: true,
      items,
    },
    manifest.outPath,
  );
  return {
    written: manifest.outPath,
    exported: items.length,
    skipped: 0,
    classes: labels.length,
    warnings: [],
  };
}

/** Parse a labels file: one class label per line, blanks ignored. */
export function loadLabels(path: string): string[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ExporterError(`cannot read labels file ${path}: ${err}`);
  }
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}
