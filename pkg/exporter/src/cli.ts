#!/usr/bin/env node
/**
 * Command-line surface:
 *
 *   fsembed-export export-images --dataset D --split test --model M --out PATH
 *   fsembed-export export-text --labels FILE --templates FILE --model M --out PATH
 *
 * The templates file is JSON {"dataset": str, "templates": [str]}. Model
 * ids of the form "hash-<dim>" use the deterministic reference encoder;
 * anything else is loaded through @xenova/transformers.
 */

import { realpathSync } from "node:fs";
import { basename } from "node:path";
import { fileURLToPath } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadEncoder } from "./encoders.js";
import { ExporterError } from "./errors.js";
import { exportImageStore, exportTextStore, loadLabels } from "./export.js";
import { loadTemplateSet } from "./templates.js";

function printSummary(kind: string, summary: { written: string; exported: number; skipped: number; classes: number; warnings: string[] }): void {
  for (const warning of summary.warnings) {
    console.error(`warning: ${warning}`);
  }
  console.log(
    `${kind} store written to ${summary.written}: ${summary.exported} items, ` +
      `${summary.classes} classes, ${summary.skipped} skipped`,
  );
}

export async function main(argv: string[]): Promise<number> {
  try {
    await yargs(argv)
      .scriptName("fsembed-export")
      .strict()
      .demandCommand(1, "specify a command: export-images or export-text")
      .fail((msg, err) => {
        throw err ?? new ExporterError(msg);
      })
      .command(
        "export-images",
        "embed a folder dataset split into an image store",
        (cmd) =>
          cmd
            .option("dataset", { type: "string", demandOption: true, describe: "dataset root containing <split>/<class>/<image>" })
            .option("split", { type: "string", default: "test", describe: "split directory to export" })
            .option("model", { type: "string", demandOption: true, describe: "encoder model id" })
            .option("out", { type: "string", demandOption: true, describe: "output store path" })
            .option("dataset-name", { type: "string", describe: "dataset name recorded in the store (default: root basename)" })
            .option("batch-size", { type: "number", default: 32 })
            .option("device", { type: "string", describe: "device hint for model encoders" })
            .option("allow-train", { type: "boolean", default: false }),
        async (args) => {
          const encoder = await loadEncoder(args.model);
          const summary = await exportImageStore(
            {
              datasetRoot: args.dataset,
              split: args.split,
              datasetName: args["dataset-name"] ?? basename(args.dataset),
              batchSize: args["batch-size"],
              outPath: args.out,
              device: args.device,
              allowTrain: args["allow-train"],
            },
            encoder,
          );
          printSummary("image", summary);
        },
      )
      .command(
        "export-text",
        "embed prompt-expanded class labels into a text store",
        (cmd) =>
          cmd
            .option("labels", { type: "string", demandOption: true, describe: "file with one class label per line" })
            .option("templates", { type: "string", demandOption: true, describe: "JSON templates file" })
            .option("model", { type: "string", demandOption: true, describe: "encoder model id" })
            .option("out", { type: "string", demandOption: true, describe: "output store path" })
            .option("dataset-name", { type: "string", describe: "dataset name recorded in the store (default: templates file dataset)" })
            .option("batch-size", { type: "number", default: 32 }),
        async (args) => {
          const encoder = await loadEncoder(args.model);
          const templateSet = loadTemplateSet(args.templates);
          const summary = await exportTextStore(
            loadLabels(args.labels),
            templateSet,
            {
              datasetName: args["dataset-name"] ?? templateSet.datasetName,
              batchSize: args["batch-size"],
              outPath: args.out,
            },
            encoder,
          );
          printSummary("text", summary);
        },
      )
      .parseAsync();
    return 0;
  } catch (err) {
    if (err instanceof ExporterError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

let invokedDirectly = false;
if (process.argv[1] !== undefined) {
  try {
    // Resolve bin symlinks so the entry check survives npm's .bin shims.
    invokedDirectly = realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    invokedDirectly = false;
  }
}
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
