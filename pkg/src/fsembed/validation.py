"""Input validation helpers used by the numerical core and the estimators."""

from __future__ import annotations

import numpy as np

PROBABILITY_TOL = 1e-6


def check_matrix(x, name: str, dtype=np.float64) -> np.ndarray:
    """Coerce ``x`` to a 2-D array of ``dtype`` with only finite entries."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_nonempty_matrix(x, name: str, dtype=np.float64) -> np.ndarray:
    arr = check_matrix(x, name, dtype=dtype)
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must contain at least one row")
    return arr


def check_temperature(temperature) -> float:
    t = float(temperature)
    if not np.isfinite(t) or t <= 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature!r}")
    return t


def check_same_shape(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"shape mismatch: {name_a} has shape {a.shape}, {name_b} has shape {b.shape}"
        )


def check_probability_rows(p, name: str = "probabilities", tol: float = PROBABILITY_TOL) -> np.ndarray:
    """Validate a matrix of per-row probability distributions (rows sum to 1)."""
    arr = check_matrix(p, name)
    if arr.size == 0:
        return arr
    if arr.min() < -tol or arr.max() > 1.0 + tol:
        raise ValueError(f"{name} entries must lie in [0, 1]")
    sums = arr.sum(axis=1)
    if np.abs(sums - 1.0).max() > tol:
        worst = int(np.abs(sums - 1.0).argmax())
        raise ValueError(f"{name} row {worst} sums to {sums[worst]!r}, expected 1")
    return arr


def row_norms(x: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row, computed in float64."""
    return np.sqrt(np.einsum("ij,ij->i", x, x, dtype=np.float64))
