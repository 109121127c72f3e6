/**
 * Folder dataset scanning: <root>/<split>/<class label>/<image files>.
 * Class labels come from the directory names; ordering is sorted and
 * therefore stable across runs and machines.
 */

import { readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { ExporterError } from "./errors.js";

const IMAGE_EXTENSIONS = new Set([".jpg", ".jpeg", ".png", ".bmp", ".gif", ".webp"]);

export interface ImageEntry {
  /** Path relative to the split directory, used as the item id. */
  id: string;
  label: string;
  absPath: string;
}

function extension(name: string): string {
  const dot = name.lastIndexOf(".");
  return dot < 0 ? "" : name.slice(dot).toLowerCase();
}

/**
 * Enumerate the images of one dataset split.
 *
 * Exports are meant for evaluation data only: the "train" split is
 * refused unless explicitly allowed, so embeddings of training items
 * cannot slip into a few-shot evaluation by accident.
 */
export function scanImageFolder(root: string, split: string, allowTrain = false): ImageEntry[] {
  if (split === "train" && !allowTrain) {
    throw new ExporterError(
      "refusing to export the train split; evaluation uses disjoint data (pass --allow-train to override)",
    );
  }
  const splitDir = join(root, split);
  let classDirs: string[];
  try {
    classDirs = readdirSync(splitDir)
      .filter((name) => statSync(join(splitDir, name)).isDirectory())
      .sort();
  } catch (err) {
    throw new ExporterError(`cannot read dataset split directory ${splitDir}: ${err}`);
  }
  if (classDirs.length === 0) {
    throw new ExporterError(`no class directories under ${splitDir}`);
  }
  const entries: ImageEntry[] = [];
  for (const label of classDirs) {
    const classDir = join(splitDir, label);
    const files = readdirSync(classDir)
      .filter((name) => IMAGE_EXTENSIONS.has(extension(name)))
      .sort();
    for (const name of files) {
      entries.push({ id: `${label}/${name}`, label, absPath: join(classDir, name) });
    }
  }
  if (entries.length === 0) {
    throw new ExporterError(`no image files under ${splitDir}`);
  }
  return entries;
}
