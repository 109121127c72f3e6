export { ExporterError } from "./errors.js";
export { MAGIC, UNIT_NORM_TOL, normalize, storeToBytes, writeStoreFile } from "./format.js";
export type { Modality, StoreFile, StoreItem } from "./format.js";
export { expandTemplate, loadTemplateSet, makeTemplateSet, PLACEHOLDER } from "./templates.js";
export type { PromptTemplateSet } from "./templates.js";
export { HashEncoder, loadEncoder } from "./encoders.js";
export type { Encoder } from "./encoders.js";
export { scanImageFolder } from "./datasets.js";
export type { ImageEntry } from "./datasets.js";
export { exportImageStore, exportTextStore, loadLabels } from "./export.js";
export type { ExportManifest, ExportSummary } from "./export.js";
export { main as cliMain } from "./cli.js";
