"""Input-validation helpers shared across the public API.

These follow the scikit-learn convention of small ``check_*`` functions that
either return a canonical form of the input or raise ``ValueError`` with a
message naming the offending argument.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_power_of_two(value, name: str) -> int:
    """Return ``value`` as int, requiring a positive power of two."""
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value <= 0 or value & (value - 1):
        raise ValueError(f"{name} must be a positive power of two, got {value}")
    return value


def check_square_grid(grid, name: str = "grid") -> np.ndarray:
    """Return ``grid`` as a C-contiguous float64 square 2-D array."""
    arr = np.asarray(grid, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    check_power_of_two(arr.shape[0], f"{name} side length")
    return np.ascontiguousarray(arr)


def check_positive(value, name: str, *, strict: bool = True) -> float:
    value = float(value)
    if strict and not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_in_range(value, name: str, lo, hi, *, inclusive=(True, True)) -> float:
    value = float(value)
    lo_ok = value >= lo if inclusive[0] else value > lo
    hi_ok = value <= hi if inclusive[1] else value < hi
    if not (lo_ok and hi_ok):
        lo_b = "[" if inclusive[0] else "("
        hi_b = "]" if inclusive[1] else ")"
        raise ValueError(f"{name} must lie in {lo_b}{lo}, {hi}{hi_b}, got {value}")
    return value


def check_int(value, name: str, *, minimum=None, maximum=None) -> int:
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValueError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_dyadic(value, name: str) -> float:
    """Require ``value`` to be a positive dyadic rational 2**p (p integer).

    The translation lattices only land on pixel boundaries for dyadic
    sampling constants, so this is enforced wherever a sampling constant
    enters a discrete transform.
    """
    value = check_positive(value, name)
    exponent = np.log2(value)
    if abs(exponent - round(exponent)) > 1e-12:
        raise ValueError(f"{name} must be a power of two (… 1/4, 1/2, 1, 2 …), got {value}")
    return float(2.0 ** round(exponent))
