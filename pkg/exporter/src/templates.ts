/**
 * Prompt template sets: one fixed list of templates per dataset, each
 * containing the placeholder "{label}" exactly once. Expansion is naive
 * substitution with no article correction ("a apple" stays as-is);
 * datasets needing different phrasing supply their own template file.
 */

import { readFileSync } from "node:fs";

import { ExporterError } from "./errors.js";

export const PLACEHOLDER = "{label}";

export interface PromptTemplateSet {
  datasetName: string;
  templates: string[];
}

function placeholderCount(template: string): number {
  return template.split(PLACEHOLDER).length - 1;
}

export function makeTemplateSet(datasetName: string, templates: string[]): PromptTemplateSet {
  if (!datasetName) throw new ExporterError("template set needs a dataset name");
  if (templates.length === 0) {
    throw new ExporterError("template set must contain at least one template");
  }
  for (const template of templates) {
    const count = placeholderCount(template);
    if (count !== 1) {
      throw new ExporterError(
        `template '${template}' must contain '${PLACEHOLDER}' exactly once, found ${count}`,
      );
    }
  }
  return { datasetName, templates: [...templates] };
}

/** Parse a templates file: JSON {"dataset": str, "templates": [str]}. */
export function loadTemplateSet(path: string): PromptTemplateSet {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new ExporterError(`cannot read templates file ${path}: ${err}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new ExporterError(`templates file ${path} must hold a JSON object`);
  }
  const record = raw as Record<string, unknown>;
  const dataset = record["dataset"];
  const templates = record["templates"];
  if (typeof dataset !== "string") {
    throw new ExporterError(`templates file ${path} needs a string 'dataset' field`);
  }
  if (!Array.isArray(templates) || templates.some((t) => typeof t !== "string")) {
    throw new ExporterError(`templates file ${path} needs a 'templates' array of strings`);
  }
  return makeTemplateSet(dataset, templates as string[]);
}

/** Fill the placeholder with a class label. */
export function expandTemplate(template: string, label: string): string {
  return template.replace(PLACEHOLDER, label);
}
