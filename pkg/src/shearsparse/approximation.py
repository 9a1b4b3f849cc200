"""N-term thresholding approximation and decay-rate fitting.

The pipeline: analyze an image, keep the N largest coefficients, reconstruct
through the canonical dual (conjugate-residual solve), and measure the
squared L2 error against the same rasterization that was analyzed, so
digitization error cancels instead of polluting the rate fits.

Rate fits run in the log domain against two models: a pure power law
``e = C N^-beta`` and a power law with a log-polynomial correction
``e = C N^-beta (log N)^gamma``.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass

import numpy as np

from .cartoon import CartoonImage, rasterize
from .errors import DegenerateFit, MaxIterExceeded
from .system import ShearletSystem
from .transform import CoefficientSet, analyze, dual_reconstruct
from .validation import check_int, check_power_of_two

__all__ = [
    "ErrorCurve",
    "RateReport",
    "threshold_topN",
    "nterm_error_curve",
    "coefficient_tail_curve",
    "fit_rate",
    "wavelet_baseline",
    "dwt2_forward",
    "dwt2_inverse",
]


def system_config_hash(system: ShearletSystem, n: int, extra: str = "") -> str:
    """Short deterministic fingerprint of a (system, grid) configuration."""
    spec = system.generators.spec
    text = (
        f"{spec.name}|taps={len(spec.lowpass_taps)}|depth={spec.cascade_depth}|"
        f"c={system.c!r}|J={system.J}|n={n}|{extra}"
    )
    return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


# ---------------------------------------------------------------------------
# error curves


# relative slack for the monotonicity invariant: reconstruction noise at the
# tolerance floor may wobble, but only far below the curve's leading values
_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class ErrorCurve:
    """Squared-error curve ``N -> ||f - f_N||_2^2``.

    ``points`` is a tuple of (N, squared_error) with N strictly increasing;
    squared errors are non-increasing up to a relative slack of 1e-9 of the
    curve maximum.  ``details`` optionally carries per-point bookkeeping
    (reconstruction iterations, wall-clock ms) for reporting layers.
    """

    points: tuple
    metadata: str = ""
    details: tuple = ()

    def __post_init__(self):
        ns = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("curve N values must be strictly increasing")
        errs = [p[1] for p in self.points]
        if any(e < 0 for e in errs):
            raise ValueError("squared errors must be nonnegative")
        if errs:
            slack = _MONOTONE_SLACK * max(errs)
            for a, b in zip(errs, errs[1:]):
                if b > a + slack:
                    raise ValueError(
                        f"squared error increased from {a:.6e} to {b:.6e}; "
                        "curve must be non-increasing in N"
                    )

    @property
    def n_values(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=np.int64)

    @property
    def errors(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=np.float64)


@dataclass(frozen=True)
class RateReport:
    """Log-domain least-squares fit of an error curve."""

    model: str
    beta: float
    log_exponent: float
    residual: float
    fit_range: tuple

    def __post_init__(self):
        if self.model not in ("pure-power", "power-with-log"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")


# ---------------------------------------------------------------------------
# thresholding


def threshold_topN(coeffs: CoefficientSet, N: int) -> CoefficientSet:
    """Keep the N largest-magnitude coefficients, zero the rest.

    Ties are broken by the canonical index order (cone rank, j, k, m1, m2),
    so the selection is deterministic.  Selection optimality: every kept
    magnitude is >= every dropped magnitude.
    """
    total = coeffs.total_count
    N = check_int(N, "N", minimum=0, maximum=total)
    out = coeffs.scaled(0.0)
    if N == 0:
        return out
    flat = coeffs.flatten()
    # stable sort on negated magnitudes = magnitude descending with
    # canonical-order tie-break
    order = np.argsort(-np.abs(flat), kind="stable")
    keep = order[:N]
    mask = np.zeros(total, dtype=bool)
    mask[keep] = True
    pos = 0
    for slab in out.canonical_slabs():
        size = slab.data.size
        block = mask[pos : pos + size].reshape(slab.data.shape)
        src = coeffs.slabs[(slab.cone, slab.j, slab.k)].data
        slab.data[block] = src[block]
        pos += size
    return out


def nterm_error_curve(
    f: CartoonImage,
    system: ShearletSystem,
    n: int,
    Ns: list,
    tol: float = 1e-6,
    *,
    oversample: int = 8,
    max_iter: int = 500,
) -> ErrorCurve:
    """Squared L2 error of the N-term dual reconstruction for each N.

    Successive solves warm-start from the previous reconstruction; right
    sides for nested selections are close, which keeps the large-N solves
    cheap.  MaxIterExceeded propagates with the offending N attached.
    """
    Ns = [check_int(N, "N", minimum=0) for N in Ns]
    if sorted(Ns) != Ns:
        raise ValueError("Ns must be sorted ascending")
    grid = rasterize(f, n, oversample=oversample)
    coeffs = analyze(grid, system)
    inv_area = 1.0 / (n * n)
    points, details = [], []
    x_prev = None
    for N in Ns:
        start = time.perf_counter()
        selected = threshold_topN(coeffs, N)
        try:
            rec = dual_reconstruct(
                selected, system, n, tol=tol, max_iter=max_iter, x0=x_prev
            )
        except MaxIterExceeded as exc:
            raise MaxIterExceeded(
                f"dual reconstruction did not converge at N = {N}: {exc}",
                best=exc.best,
                n_terms=N,
            ) from exc
        x_prev = rec.grid
        err = float(np.sum((grid - rec.grid) ** 2)) * inv_area
        wall_ms = (time.perf_counter() - start) * 1e3
        points.append((N, err))
        details.append({"reconstruction_iters": rec.iterations, "wall_ms": wall_ms})
    return ErrorCurve(
        points=tuple(points),
        metadata=system_config_hash(system, n, extra=f"nterm|{f.name}"),
        details=tuple(details),
    )


def coefficient_tail_curve(
    coeffs: CoefficientSet, Ns: list, frame_lower: float
) -> ErrorCurve:
    """Upper-bound surrogate for the N-term error: (1/A) sum of the squared
    coefficient tail beyond the N largest.  No reconstruction involved."""
    if frame_lower <= 0:
        raise ValueError("frame_lower must be positive")
    Ns = [check_int(N, "N", minimum=0) for N in Ns]
    if sorted(Ns) != Ns:
        raise ValueError("Ns must be sorted ascending")
    mags = np.sort(np.abs(coeffs.flatten()))[::-1]
    sq = mags**2
    # tail[N] = sum of sq[N:]; cumulative from the right
    suffix = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    points = [(N, float(suffix[min(N, sq.size)]) / frame_lower) for N in Ns]
    return ErrorCurve(points=tuple(points), metadata="tail-surrogate")


# ---------------------------------------------------------------------------
# rate fitting


def _default_fit_range(points) -> tuple:
    """Drop the smallest N (transient) and the largest 10% of points
    (tolerance floor); returns an inclusive (N_min, N_max) range."""
    n_drop_hi = max(1, math.ceil(0.1 * len(points)))
    kept = points[1 : len(points) - n_drop_hi]
    if not kept:
        kept = points[1:] or points
    return (kept[0][0], kept[-1][0])


def fit_rate(
    curve: ErrorCurve,
    model: str = "pure-power",
    fixed_log_exponent: float | None = None,
    *,
    fit_range: tuple | None = None,
) -> RateReport:
    """Least-squares decay-rate fit in the log domain.

    ``pure-power`` fits ``log e = log C - beta log N``; ``power-with-log``
    fits ``log e = log C - beta log N + gamma log log N`` with gamma free
    or fixed via ``fixed_log_exponent``.
    """
    if model not in ("pure-power", "power-with-log"):
        raise ValueError(f"unknown model {model!r}")
    if len(curve.points) < 5:
        raise DegenerateFit(
            f"rate fit needs at least 5 points, got {len(curve.points)}"
        )
    if fit_range is None:
        fit_range = _default_fit_range(curve.points)
    lo, hi = fit_range
    pts = [(N, e) for N, e in curve.points if lo <= N <= hi]
    if len(pts) < 3:
        raise DegenerateFit(f"fit range {fit_range} keeps only {len(pts)} points")
    errs = np.array([e for _, e in pts])
    ns = np.array([N for N, _ in pts], dtype=np.float64)
    if np.any(errs <= 0):
        raise DegenerateFit("all errors in the fit range must be positive")
    if np.all(errs == errs[0]):
        raise DegenerateFit("degenerate fit: all errors equal")
    log_n = np.log(ns)
    log_e = np.log(errs)
    if model == "pure-power":
        design = np.column_stack([np.ones_like(log_n), -log_n])
        coef, *_ = np.linalg.lstsq(design, log_e, rcond=None)
        beta = float(coef[1])
        gamma = 0.0
    else:
        if np.any(ns < 2):
            raise DegenerateFit("power-with-log needs N >= 2 in the fit range")
        loglog_n = np.log(np.log(ns))
        if fixed_log_exponent is None:
            design = np.column_stack([np.ones_like(log_n), -log_n, loglog_n])
            coef, *_ = np.linalg.lstsq(design, log_e, rcond=None)
            beta = float(coef[1])
            gamma = float(coef[2])
        else:
            design = np.column_stack([np.ones_like(log_n), -log_n])
            coef, *_ = np.linalg.lstsq(
                design, log_e - fixed_log_exponent * loglog_n, rcond=None
            )
            beta = float(coef[1])
            gamma = float(fixed_log_exponent)
    fitted = design @ coef
    target = log_e if fixed_log_exponent is None or model == "pure-power" else (
        log_e - fixed_log_exponent * np.log(np.log(ns))
    )
    residual = float(np.sqrt(np.mean((fitted - target) ** 2)))
    return RateReport(
        model=model,
        beta=beta,
        log_exponent=gamma,
        residual=residual,
        fit_range=(int(pts[0][0]), int(pts[-1][0])),
    )


# ---------------------------------------------------------------------------
# orthonormal separable wavelet baseline


def _dwt_step(x: np.ndarray, h: np.ndarray, g: np.ndarray, axis: int):
    """One periodic analysis step along ``axis``: returns (approx, detail),
    each of half length.  Cyclic correlation with the analysis filters, then
    downsampling by two."""
    x = np.moveaxis(x, axis, 0)
    L = x.shape[0]
    # rows of shifts: y[k] = sum_m filt[m] x[(2k + m) mod L]
    idx = (2 * np.arange(L // 2)[:, None] + np.arange(h.size)[None, :]) % L
    a = np.tensordot(h, x[idx], axes=(0, 1))
    d = np.tensordot(g, x[idx], axes=(0, 1))
    return np.moveaxis(a, 0, axis), np.moveaxis(d, 0, axis)


def _idwt_step(a: np.ndarray, d: np.ndarray, h: np.ndarray, g: np.ndarray, axis: int):
    """Inverse of :func:`_dwt_step` (exact for orthonormal filters)."""
    a = np.moveaxis(a, axis, 0)
    d = np.moveaxis(d, axis, 0)
    half = a.shape[0]
    L = 2 * half
    out = np.zeros((L,) + a.shape[1:])
    for m in range(h.size):
        rows = (2 * np.arange(half) + m) % L
        np.add.at(out, rows, h[m] * a + g[m] * d)
    return np.moveaxis(out, 0, axis)


def dwt2_forward(grid: np.ndarray, h: np.ndarray, levels: int) -> list:
    """Separable 2-D periodic DWT pyramid.

    Returns ``[LL_deep, (LH, HL, HH)_deep, ..., (LH, HL, HH)_1]`` following
    the usual Mallat layout.  Orthonormal for orthonormal ``h``.
    """
    g = h[::-1].copy()
    g[1::2] *= -1.0  # quadrature mirror of the lowpass
    ll = grid
    stack = []
    for _ in range(levels):
        a0, d0 = _dwt_step(ll, h, g, axis=0)
        ll, lh = _dwt_step(a0, h, g, axis=1)
        hl, hh = _dwt_step(d0, h, g, axis=1)
        stack.append((lh, hl, hh))
        if min(ll.shape) < h.size:
            break
    stack.reverse()
    return [ll] + stack


def dwt2_inverse(pyramid: list, h: np.ndarray) -> np.ndarray:
    g = h[::-1].copy()
    g[1::2] *= -1.0
    ll = pyramid[0]
    for lh, hl, hh in pyramid[1:]:
        a0 = _idwt_step(ll, lh, h, g, axis=1)
        d0 = _idwt_step(hl, hh, h, g, axis=1)
        ll = _idwt_step(a0, d0, h, g, axis=0)
    return ll


def _pyramid_flatten(pyramid: list) -> np.ndarray:
    parts = [pyramid[0].ravel()]
    for lh, hl, hh in pyramid[1:]:
        parts.extend([lh.ravel(), hl.ravel(), hh.ravel()])
    return np.concatenate(parts)


def _pyramid_like(flat: np.ndarray, pyramid: list) -> list:
    out = []
    pos = 0

    def take(shape):
        nonlocal pos
        size = int(np.prod(shape))
        block = flat[pos : pos + size].reshape(shape)
        pos += size
        return block

    out.append(take(pyramid[0].shape))
    for lh, hl, hh in pyramid[1:]:
        out.append((take(lh.shape), take(hl.shape), take(hh.shape)))
    return out


def wavelet_baseline(
    f: CartoonImage,
    n: int,
    Ns: list,
    *,
    vanishing_moments: int = 6,
    oversample: int = 8,
) -> ErrorCurve:
    """N-term approximation in an orthonormal separable wavelet basis.

    Same vanishing-moment order as the default directional generators, so
    the baseline comparison is fair.  Reconstruction is exact (orthonormal
    transform), no iterative solve involved.
    """
    from .generators import daubechies_filter

    n = check_power_of_two(n, "n")
    Ns = [check_int(N, "N", minimum=0, maximum=n * n) for N in Ns]
    if sorted(Ns) != Ns:
        raise ValueError("Ns must be sorted ascending")
    grid = rasterize(f, n, oversample=oversample)
    h = daubechies_filter(vanishing_moments)
    levels = max(1, int(math.log2(n)) - int(math.ceil(math.log2(max(h.size, 2)))))
    pyramid = dwt2_forward(grid, h, levels)
    flat = _pyramid_flatten(pyramid)
    order = np.argsort(-np.abs(flat), kind="stable")
    inv_area = 1.0 / (n * n)
    points, details = [], []
    for N in Ns:
        start = time.perf_counter()
        kept = np.zeros_like(flat)
        sel = order[:N]
        kept[sel] = flat[sel]
        rec = dwt2_inverse(_pyramid_like(kept, pyramid), h)
        err = float(np.sum((grid - rec) ** 2)) * inv_area
        wall_ms = (time.perf_counter() - start) * 1e3
        points.append((N, err))
        details.append({"reconstruction_iters": 0, "wall_ms": wall_ms})
    meta = hashlib.blake2b(
        f"wavelet|p={vanishing_moments}|n={n}|{f.name}".encode(), digest_size=8
    ).hexdigest()
    return ErrorCurve(points=tuple(points), metadata=meta, details=tuple(details))
