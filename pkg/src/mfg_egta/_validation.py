"""Input validation helpers shared by all modules.

Probability objects (simplices, row-stochastic tables) are checked at
construction with absolute tolerance ``SIMPLEX_ATOL`` and are never
renormalized silently.
"""

from __future__ import annotations

import numpy as np

SIMPLEX_ATOL = 1e-12


def _index_of(flat: int, shape) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(flat, shape))


def as_float_array(values, name: str, *, copy: bool = True) -> np.ndarray:
    """Convert to a C-contiguous float64 array, rejecting non-finite entries."""
    arr = np.array(values, dtype=np.float64, order="C", copy=copy)
    if not np.all(np.isfinite(arr)):
        bad = _index_of(int(np.argmin(np.isfinite(arr))), arr.shape)
        raise ValueError(f"{name} contains a non-finite entry at index {bad}")
    return arr


def freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def check_nonnegative(arr: np.ndarray, name: str) -> None:
    if np.any(arr < 0.0):
        bad = np.unravel_index(int(np.argmin(arr)), arr.shape)
        raise ValueError(f"{name} has a negative entry {arr[bad]!r} at index {bad}")


def check_unit_range(arr: np.ndarray, name: str) -> None:
    check_nonnegative(arr, name)
    if np.any(arr > 1.0):
        bad = np.unravel_index(int(np.argmax(arr)), arr.shape)
        raise ValueError(f"{name} has an entry {arr[bad]!r} > 1 at index {bad}")


def check_simplex(vec: np.ndarray, name: str, *, atol: float = SIMPLEX_ATOL) -> None:
    """Require a 1-D probability vector: entries >= 0, sum within atol of 1."""
    if vec.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {vec.shape}")
    check_nonnegative(vec, name)
    total = float(vec.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} sums to {total!r}, not 1 within {atol:g}")


def check_rows_stochastic(arr: np.ndarray, name: str, *, atol: float = SIMPLEX_ATOL) -> None:
    """Require every slice along the last axis to be a probability vector.

    The error message names the index of the worst-offending row so that a
    bad kernel row can be located as (state, action).
    """
    check_unit_range(arr, name)
    sums = arr.sum(axis=-1)
    dev = np.abs(sums - 1.0)
    worst = float(dev.max())
    if worst > atol:
        flat = int(np.argmax(dev))
        idx = np.unravel_index(flat, sums.shape) if sums.ndim else ()
        raise ValueError(
            f"{name} row {idx} sums to {float(sums.reshape(-1)[flat])!r}, "
            f"not 1 within {atol:g}"
        )
