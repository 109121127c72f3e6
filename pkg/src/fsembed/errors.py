"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: config problems exit 1,
data validation problems exit 2, anything else raised at runtime exits 3.
"""


class FsembedError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FsembedError):
    """Invalid configuration file, flag combination, or parameter value."""


class StoreError(FsembedError):
    """Malformed store file or a store that violates its invariants."""


class SamplingError(FsembedError):
    """Episode sampling is infeasible for the given dataset and config."""


class InferenceError(FsembedError):
    """Numerically invalid input reached an inference kernel."""
