/** Error raised for every anticipated export failure: bad configuration,
 * malformed templates, unreadable datasets, or store invariant violations. */
export class ExporterError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ExporterError";
  }
}
