"""Shearlet analysis and synthesis on pixel grids, plus frame diagnostics.

A grid is read as a piecewise-constant function on ``[0, 1]^2`` (pixel
``(p1, p2)`` covers ``[p1, p1+1]/n x [p2, p2+1]/n``).  Every coefficient is
the exact quadrature inner product of that function against the atom whose
shear term is frozen at each pixel row's center line, computed per
``(cone, j, k)`` slab as a separable pair of discrete correlations:

* stage 1 runs along the atom's oscillatory axis with a kernel of exact
  pixel integrals of ``psi1(2^j .)``, fractionally shifted per transverse
  row by the shear (the shift is re-integrated through the antiderivative,
  never interpolated);
* stage 2 correlates the transverse axis against pixel integrals of
  ``psi2(2^(j/2) .)`` and subsamples both axes at integer pixel strides.

Zero padding (no periodization) honors compact support exactly; atoms
overhanging the domain simply see the image end.  Synthesis is the exact
adjoint chain, so analysis/synthesis pass adjointness tests at roundoff
level.  All slab loops run in a fixed order and every reduction has a fixed
tree, so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from .errors import MaxIterExceeded, NotAFrame, ResolutionTooCoarse
from .system import ShearletIndex, ShearletSystem, slab_keys, slab_rect
from .validation import check_in_range, check_int, check_square_grid

__all__ = [
    "Slab",
    "CoefficientSet",
    "FrameBounds",
    "Reconstruction",
    "analyze",
    "synthesize",
    "frame_apply",
    "estimate_frame_bounds",
    "dual_reconstruct",
]

# cap scratch buffers around 32 MB so coarse-scale kernels stay cheap
_CHUNK_BYTES = 1 << 25


# ---------------------------------------------------------------------------
# containers


@dataclass
class Slab:
    """Dense coefficient rectangle of one (cone, j, k) slab.

    ``data[a, b]`` is the coefficient at ``m1 = m1_lo + a``,
    ``m2 = m2_lo + b``.  Entries whose atom misses the domain are exact
    structural zeros; the rectangle is the tight bounding box of the
    domain-meeting translations.
    """

    cone: str
    j: int
    k: int
    m1_lo: int
    m2_lo: int
    data: np.ndarray

    @property
    def m1_hi(self) -> int:
        return self.m1_lo + self.data.shape[0] - 1

    @property
    def m2_hi(self) -> int:
        return self.m2_lo + self.data.shape[1] - 1


class CoefficientSet:
    """All shearlet coefficients of one grid against one system."""

    def __init__(self, system: ShearletSystem, slabs: dict):
        self.system = system
        self.slabs = slabs

    @property
    def total_count(self) -> int:
        return sum(s.data.size for s in self.slabs.values())

    def canonical_slabs(self) -> list:
        """Slabs in the fixed (cone rank, j, k) order."""
        return [self.slabs[key] for key in slab_keys(self.system) if key in self.slabs]

    def flatten(self) -> np.ndarray:
        """All coefficients as one vector: canonical slab order, each slab
        row-major over (m1, m2)."""
        return np.concatenate([s.data.ravel() for s in self.canonical_slabs()])

    def value(self, idx: ShearletIndex) -> float:
        slab = self.slabs[(idx.cone, idx.j, idx.k)]
        a = idx.m1 - slab.m1_lo
        b = idx.m2 - slab.m2_lo
        if not (0 <= a < slab.data.shape[0] and 0 <= b < slab.data.shape[1]):
            raise ValueError(f"index {idx} outside the stored slab rectangle")
        return float(slab.data[a, b])

    def norm_l2(self) -> float:
        return math.sqrt(sum(float(np.sum(s.data**2)) for s in self.slabs.values()))

    def scaled(self, factor: float) -> "CoefficientSet":
        out = {
            key: Slab(s.cone, s.j, s.k, s.m1_lo, s.m2_lo, s.data * factor)
            for key, s in self.slabs.items()
        }
        return CoefficientSet(self.system, out)

    def copy(self) -> "CoefficientSet":
        return self.scaled(1.0)


# ---------------------------------------------------------------------------
# slab plans and kernels


@dataclass(frozen=True)
class _Plan:
    cone: str
    j: int
    k: int
    s1: int  # fast-axis stride in pixels
    s2: int  # slow-axis stride in pixels
    L1: int  # fast kernel cell count (includes fractional-shift slack)
    L2: int  # slow kernel cell count
    P1: int
    P2: int
    amp: float
    m1_lo: int
    m1_hi: int
    m2_lo: int
    m2_hi: int


def _check_grid_compat(system: ShearletSystem, n: int) -> None:
    check_int(n, "n", minimum=2)
    if n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    finest = system.c * n * 2.0 ** (-system.J)
    if finest < 1.0:
        raise ResolutionTooCoarse(
            f"finest translation stride is {finest} pixels at n = {n}, "
            f"J = {system.J}, c = {system.c}; need at least 1"
        )


def _build_plan(system: ShearletSystem, n: int, cone: str, j: int, k: int) -> _Plan:
    W = system.support_width
    if cone == "coarse":
        s1 = s2 = round(n * system.c)
        L2 = math.ceil(W * n)
        amp = 1.0
    else:
        s1 = round(n * system.step_fast(j))
        s2 = round(n * system.step_slow(j))
        L2 = math.ceil(W * n * 2.0 ** (-j / 2.0))
        amp = 2.0 ** (0.75 * j)
    L1 = (math.ceil(W * n * 2.0 ** (-j)) if cone != "coarse" else L2) + 1
    m1_lo, m1_hi, m2_lo, m2_hi = slab_rect(system, cone, j, k)
    return _Plan(
        cone=cone,
        j=j,
        k=k,
        s1=s1,
        s2=s2,
        L1=L1,
        L2=L2,
        P1=next_fast_len(n + L1 + 1),
        P2=next_fast_len(n + L2 + 1),
        amp=amp,
        m1_lo=m1_lo,
        m1_hi=m1_hi,
        m2_lo=m2_lo,
        m2_hi=m2_hi,
    )


def _row_shifts(plan: _Plan, n: int):
    """Per transverse row: integer kernel displacement d and fractional
    part tau of the shear shift, both in fast-axis pixels."""
    rows = np.arange(n, dtype=np.float64)
    if plan.cone == "coarse" or plan.k == 0:
        delta = np.zeros(n)
    else:
        delta = -plan.k * 2.0 ** (-plan.j / 2.0) * (rows + 0.5)
    d = np.floor(delta)
    tau = delta - d
    return d.astype(np.int64), tau


def _fast_kernel_classes(system: ShearletSystem, plan: _Plan, n: int, tau: np.ndarray):
    """Exact pixel-integral kernels for every distinct fractional shift.

    Returns (kernel value rows, rfft of kernel rows, class id per image row).
    The kernel for fractional shift tau occupies cells 0..L1-1 relative to
    the integer displacement; cell r integrates the scaled generator over
    the pixel [r - tau, r + 1 - tau] (fast-axis pixel units).
    """
    gens = system.generators
    tab = gens.phi1d if plan.cone == "coarse" else gens.psi1
    h = (2.0**plan.j) / n  # generator units per pixel
    q = 2.0 ** (-plan.j)
    uniq, class_of = np.unique(np.round(tau, 12), return_inverse=True)
    rho = np.arange(plan.L1 + 1, dtype=np.float64)
    edges = h * (rho[None, :] - uniq[:, None])
    anti = tab.antiderivative(edges)
    kernels = q * (anti[:, 1:] - anti[:, :-1])
    padded = np.zeros((kernels.shape[0], plan.P1))
    padded[:, : plan.L1] = kernels
    return kernels, rfft(padded, axis=1), class_of


def _slow_kernel(system: ShearletSystem, plan: _Plan, n: int):
    gens = system.generators
    tab = gens.phi1d if plan.cone == "coarse" else gens.psi2
    h = 2.0 ** (plan.j / 2.0) / n
    q = 2.0 ** (-plan.j / 2.0)
    edges = h * np.arange(plan.L2 + 1, dtype=np.float64)
    anti = tab.antiderivative(edges)
    kernel = q * (anti[1:] - anti[:-1])
    padded = np.zeros(plan.P2)
    padded[: plan.L2] = kernel
    return kernel, rfft(padded)


def _source_array(grid: np.ndarray, cone: str) -> np.ndarray:
    """Rows of the working array index the transverse axis, columns the
    fast axis: x1 is fast for horizontal/coarse slabs, x2 for vertical."""
    if cone == "vertical":
        return grid
    return np.ascontiguousarray(grid.T)


class _RfftCache:
    """Most-recent rfft of the source rows per (orientation, length).

    Consecutive slabs share (j, cone), hence padded length, so a two-entry
    cache captures nearly all reuse without holding large spectra alive.
    """

    def __init__(self, capacity: int = 2):
        self.capacity = capacity
        self._store = {}

    def get(self, key, compute):
        if key in self._store:
            return self._store[key]
        value = compute()
        if len(self._store) >= self.capacity:
            self._store.pop(next(iter(self._store)))
        self._store[key] = value
        return value


def _chunk_rows(n: int, width: int) -> int:
    return max(1, min(n, _CHUNK_BYTES // max(1, 16 * width)))


# ---------------------------------------------------------------------------
# analysis


def analyze(grid: np.ndarray, system: ShearletSystem) -> CoefficientSet:
    """Shearlet coefficients of a square grid.

    Exact quadrature of grid-as-piecewise-constant against every atom;
    cost is a fixed number of FFT passes per (cone, j, k) slab.
    """
    grid = check_square_grid(grid, "grid")
    n = grid.shape[0]
    _check_grid_compat(system, n)
    cache = _RfftCache()
    slabs = {}
    for cone, j, k in slab_keys(system):
        plan = _build_plan(system, n, cone, j, k)
        slabs[(cone, j, k)] = _analyze_slab(grid, system, plan, n, cache)
    return CoefficientSet(system, slabs)


def _analyze_slab(
    grid: np.ndarray, system: ShearletSystem, plan: _Plan, n: int, cache: _RfftCache
) -> Slab:
    src = _source_array(grid, plan.cone)
    d, tau = _row_shifts(plan, n)
    _, khat, class_of = _fast_kernel_classes(system, plan, n, tau)
    _, k2hat = _slow_kernel(system, plan, n)

    m1s = np.arange(plan.m1_lo, plan.m1_hi + 1, dtype=np.int64)
    m2s = np.arange(plan.m2_lo, plan.m2_hi + 1, dtype=np.int64)
    X = np.empty((m1s.size, n))

    orientation = "v" if plan.cone == "vertical" else "h"
    src_hat = cache.get(
        (orientation, plan.P1),
        lambda: rfft(src, n=plan.P1, axis=1),
    )

    chunk = _chunk_rows(n, plan.P1)
    targets = plan.s1 * m1s[:, None] + d[None, :]  # (M1, n)
    valid = (targets >= -(plan.L1 + 1)) & (targets < n)
    tmod = np.mod(targets, plan.P1)
    for r0 in range(0, n, chunk):
        r1 = min(r0 + chunk, n)
        spec = src_hat[r0:r1] * np.conj(khat[class_of[r0:r1]])
        Z = irfft(spec, n=plan.P1, axis=1)
        rows = np.arange(r1 - r0)[None, :]
        X[:, r0:r1] = np.where(
            valid[:, r0:r1], Z[rows, tmod[:, r0:r1]], 0.0
        )

    Zc = irfft(rfft(X, n=plan.P2, axis=1) * np.conj(k2hat[None, :]), n=plan.P2, axis=1)
    t2 = plan.s2 * m2s
    data = plan.amp * Zc[:, np.mod(t2, plan.P2)]
    return Slab(plan.cone, plan.j, plan.k, plan.m1_lo, plan.m2_lo, data)


# ---------------------------------------------------------------------------
# synthesis (exact adjoint)


def synthesize(coeffs: CoefficientSet, system: ShearletSystem, n: int) -> np.ndarray:
    """Adjoint of :func:`analyze`: sum of coefficient-weighted atom
    quadrature functionals, returned as a grid."""
    _check_grid_compat(system, n)
    _check_same_system(coeffs.system, system)
    out_h = np.zeros((n, n))  # transposed orientation (rows = x2)
    out_v = np.zeros((n, n))
    for key in slab_keys(system):
        slab = coeffs.slabs.get(key)
        if slab is None:
            continue
        plan = _build_plan(system, n, *key)
        target = out_v if plan.cone == "vertical" else out_h
        _synthesize_slab(slab, system, plan, n, target)
    return out_h.T + out_v


def _synthesize_slab(
    slab: Slab, system: ShearletSystem, plan: _Plan, n: int, out: np.ndarray
) -> None:
    d, tau = _row_shifts(plan, n)
    _, khat, class_of = _fast_kernel_classes(system, plan, n, tau)
    _, k2hat = _slow_kernel(system, plan, n)

    m1s = np.arange(plan.m1_lo, plan.m1_hi + 1, dtype=np.int64)
    m2s = np.arange(plan.m2_lo, plan.m2_hi + 1, dtype=np.int64)

    # adjoint of stage 2: scatter columns, circular convolution, truncate
    buf = np.zeros((m1s.size, plan.P2))
    buf[:, np.mod(plan.s2 * m2s, plan.P2)] = plan.amp * slab.data
    U = irfft(rfft(buf, axis=1) * k2hat[None, :], n=plan.P2, axis=1)[:, :n]

    # adjoint of stage 1: masked scatter, circular convolution, truncate
    targets = plan.s1 * m1s[:, None] + d[None, :]
    valid = (targets >= -(plan.L1 + 1)) & (targets < n)
    tmod = np.mod(targets, plan.P1)
    chunk = _chunk_rows(n, plan.P1)
    for r0 in range(0, n, chunk):
        r1 = min(r0 + chunk, n)
        V = np.zeros((r1 - r0, plan.P1))
        rows = np.arange(r1 - r0)[None, :]
        sel = valid[:, r0:r1]
        V[np.broadcast_to(rows, sel.shape)[sel], tmod[:, r0:r1][sel]] = U[:, r0:r1][sel]
        spec = rfft(V, axis=1) * khat[class_of[r0:r1]]
        out[r0:r1] += irfft(spec, n=plan.P1, axis=1)[:, :n]


def _check_same_system(a: ShearletSystem, b: ShearletSystem) -> None:
    if a is b:
        return
    same = (
        a.c == b.c
        and a.J == b.J
        and a.support_width == b.support_width
        and a.atom_resolution == b.atom_resolution
    )
    if not same:
        raise ValueError("coefficient set belongs to a different system")


def frame_apply(grid: np.ndarray, system: ShearletSystem) -> np.ndarray:
    """Frame operator: synthesize(analyze(grid)) at the grid's resolution."""
    grid = check_square_grid(grid, "grid")
    return synthesize(analyze(grid, system), system, grid.shape[0])


# ---------------------------------------------------------------------------
# frame bounds and dual reconstruction


@dataclass(frozen=True)
class FrameBounds:
    """Certified extremal eigenvalues of the discrete frame operator.

    ``residual_*`` are relative eigen-residuals ``||S u - lam u|| / lam``
    for the returned unit Ritz vectors; a residual r certifies that lam
    lies within r*lam of a true eigenvalue of the operator.
    """

    lower: float
    upper: float
    iterations_lower: int
    iterations_upper: int
    residual_lower: float
    residual_upper: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper):
            raise ValueError("frame bounds must satisfy 0 < lower <= upper")

    @property
    def ratio(self) -> float:
        return self.upper / self.lower


@dataclass(frozen=True)
class Reconstruction:
    """Dual-frame reconstruction result."""

    grid: np.ndarray
    iterations: int
    residual: float
    converged: bool


def _operator_for(system, n: int):
    """Frame-operator closure: a ShearletSystem, or any object exposing
    ``frame_apply(grid) -> grid`` (used by small reference systems in
    tests)."""
    if isinstance(system, ShearletSystem):
        return lambda g: frame_apply(g, system)
    if hasattr(system, "frame_apply"):
        return system.frame_apply
    raise TypeError("system must be a ShearletSystem or expose frame_apply()")


def _conjugate_residual(op, b, tol, max_iter, x0=None):
    """Residual-minimizing conjugate direction solver for SPD operators.

    The 2-norm of the residual is non-increasing by construction.  Returns
    (x, iterations, relative residual, converged, residual history).
    """
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0, True, [0.0]
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - op(x) if x0 is not None else b.copy()
    history = [float(np.linalg.norm(r)) / b_norm]
    if history[0] <= tol:
        return x, 0, history[0], True, history
    p = r.copy()
    Sr = op(r)
    Sp = Sr.copy()
    rSr = float(np.vdot(r, Sr))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        SpSp = float(np.vdot(Sp, Sp))
        if SpSp == 0.0 or rSr == 0.0:
            break
        alpha = rSr / SpSp
        x += alpha * p
        r -= alpha * Sp
        rel = float(np.linalg.norm(r)) / b_norm
        history.append(rel)
        if rel <= tol:
            return x, iterations, rel, True, history
        Sr_new = op(r)
        rSr_new = float(np.vdot(r, Sr_new))
        beta = rSr_new / rSr
        p = r + beta * p
        Sp = Sr_new + beta * Sp
        rSr = rSr_new
    return x, iterations, history[-1], False, history


_RITZ_WINDOW = 12  # subspace width kept by both eigenvalue loops


def _ritz_extreme(vecs, images, largest):
    """Extreme Rayleigh-Ritz pair of the operator on span(vecs).

    vecs/images are matching lists of vectors and their operator images.
    Returns (lam, u, su, rho) with u a unit Ritz vector, su its operator
    image, and rho the exact eigen-residual ||S u - lam u||, assembled
    from the stored images so no extra operator application is needed.
    Returns None when the window is numerically degenerate.
    """
    basis = np.stack([v.ravel() for v in vecs], axis=1)
    mapped = np.stack([sv.ravel() for sv in images], axis=1)
    gram = basis.T @ basis
    inter = basis.T @ mapped
    inter = 0.5 * (inter + inter.T)
    gv, gu = np.linalg.eigh(gram)
    # near-collinear directions poison the whitened projection: 1/sqrt(gv)
    # amplifies the gram's own roundoff, so anything below ~1e-10 of the top
    # is noise, not information
    keep = gv > 1e-10 * gv[-1]
    if not np.any(keep):
        return None
    # whiten the window basis, then solve the small symmetric problem
    white = gu[:, keep] / np.sqrt(gv[keep])
    small = white.T @ inter @ white
    small = 0.5 * (small + small.T)
    ev, eu = np.linalg.eigh(small)
    y = white @ eu[:, -1 if largest else 0]
    lam = float(ev[-1] if largest else ev[0])
    u = basis @ y
    su = mapped @ y
    rho = float(np.linalg.norm(su - lam * u))
    return lam, u.reshape(vecs[0].shape), su.reshape(vecs[0].shape), rho


def estimate_frame_bounds(system, n: int, tol: float = 1e-3, *,
                          seed: int = 0, max_iter: int = 200) -> FrameBounds:
    """Certified extremal frame-operator eigenvalues on the n x n grid.

    The upper bound comes from power iteration and the lower bound from
    inverse iteration with conjugate-residual inner solves.  Both loops
    keep a short window of iterates and report the extreme Rayleigh-Ritz
    value over it; a bound is accepted once its eigen-residual
    ``||S u - lam u||`` falls below tol*lam, which certifies that the
    reported value lies within tol*lam of a true eigenvalue.

    The inverse iteration starts from the frame-operator image of noise,
    which confines it to the span the system can analyze.  Bounds are
    grid-dependent and reported per (n, J) configuration.  When the finest
    scale reaches the grid Nyquist rate (n of order 2**(J+1) for the
    default generators) the discrete system is a genuine frame on all
    pixel grids and both bounds are certified eigenvalues.  On coarser
    systems the spectrum decays continuously toward the roundoff floor
    (grid content outside the generators' frequency coverage), there is no
    certifiable smallest eigenvalue, and NotAFrame is raised; the same
    exception covers a certified estimate below 1e-10 of the upper bound
    (numerically rank-deficient discretization either way).
    """
    check_in_range(tol, "tol", 0.0, 1.0, inclusive=(False, False))
    check_int(max_iter, "max_iter", minimum=1)
    op = _operator_for(system, n)
    rng = np.random.Generator(np.random.Philox(seed))

    # Upper bound: power iteration, expanding the window along the
    # residual direction (Lanczos-style) for clustered top spectra.
    v = rng.standard_normal((n, n))
    v /= np.linalg.norm(v)
    vecs, images = [v], [op(v)]
    it_hi = 1
    lam_hi, u, su, rho_hi = _ritz_extreme(vecs, images, largest=True)
    if lam_hi <= 0:
        raise NotAFrame("frame operator is zero on the start vector")
    res_hi = rho_hi / lam_hi
    while it_hi < max_iter and not (res_hi <= tol and it_hi >= 2):
        r = su - lam_hi * u
        nrm = float(np.linalg.norm(r))
        if nrm == 0.0:
            break
        v = r / nrm
        vecs.append(v)
        images.append(op(v))
        # retain the current Ritz vector so window trimming never loses it,
        # with a fresh operator image: reusing the recombined ``su`` lets
        # roundoff compound geometrically through the whitened projections
        vecs = [u] + vecs[-(_RITZ_WINDOW - 1):]
        images = [op(u)] + images[-(_RITZ_WINDOW - 1):]
        it_hi += 1
        lam_hi, u, su, rho_hi = _ritz_extreme(vecs, images, largest=True)
        res_hi = rho_hi / lam_hi

    # Lower bound: inverse iteration on the analyzable span.
    seedvec = op(rng.standard_normal((n, n)))
    nrm = float(np.linalg.norm(seedvec))
    if nrm == 0.0:
        raise NotAFrame("frame operator annihilates random input",
                        upper=lam_hi, residual_upper=res_hi)
    u = seedvec / nrm
    vecs, images = [u], [op(u)]
    it_lo = 1
    lam_lo, u, su, rho_lo = _ritz_extreme(vecs, images, largest=False)
    res_lo = rho_lo / max(lam_lo, 1e-300)
    inner_tol = min(1e-2, 10.0 * tol)
    inner_cap = min(10 * max_iter, 200)
    best_res = res_lo
    lam_hist = [lam_lo]
    stagnant = 0
    while it_lo < max_iter:
        # accept only after a few solves have had the chance to pull the
        # estimate down; the certificate alone proves lam_lo is *an*
        # eigenvalue, not that it is the smallest reachable one
        if (res_lo <= tol and it_lo >= 4
                and abs(lam_lo - lam_hist[-2]) <= tol * lam_lo):
            break
        if lam_lo <= 0 or lam_lo < 1e-10 * lam_hi:
            raise NotAFrame(
                f"lower bound estimate {lam_lo:.3e} below 1e-10 of upper "
                f"{lam_hi:.3e}",
                upper=lam_hi, residual_upper=res_hi,
            )
        z, _, _, _, _ = _conjugate_residual(
            op, u, inner_tol, max_iter=inner_cap, x0=u / lam_lo
        )
        nrm = float(np.linalg.norm(z))
        if nrm == 0.0:
            break
        z /= nrm
        vecs.append(z)
        images.append(op(z))
        r = su - lam_lo * u
        nrm = float(np.linalg.norm(r))
        if nrm > 0.0:
            # the residual direction is the in-window complement of u;
            # adding it lets the small problem split near-degenerate pairs
            r /= nrm
            vecs.append(r)
            images.append(op(r))
        # fresh image for the retained vector (see the upper loop)
        vecs = [u] + vecs[-(_RITZ_WINDOW - 1):]
        images = [op(u)] + images[-(_RITZ_WINDOW - 1):]
        it_lo += 1
        lam_lo, u, su, rho_lo = _ritz_extreme(vecs, images, largest=False)
        res_lo = rho_lo / max(lam_lo, 1e-300)
        lam_hist.append(lam_lo)
        if res_lo < 0.9 * best_res:
            best_res = res_lo
            stagnant = 0
        else:
            stagnant += 1
        # A certificate that never takes hold while the Ritz value keeps
        # sliding down multiplicatively is the fingerprint of a spectrum
        # that is numerically a continuum reaching the roundoff floor.
        if (stagnant >= 8 and best_res >= 0.25
                and lam_hist[-1] <= 0.8 * lam_hist[-9]):
            raise NotAFrame(
                f"no certifiable smallest eigenvalue: estimate slid to "
                f"{lam_lo:.3e} ({lam_lo / lam_hi:.1e} of the upper bound) "
                f"with eigen-residual stuck near {res_lo:.2f}; the "
                f"discretized system is numerically rank-deficient",
                upper=lam_hi, residual_upper=res_hi,
            )

    if lam_lo <= 0 or lam_lo < 1e-10 * lam_hi:
        raise NotAFrame(
            f"lower bound estimate {lam_lo:.3e} below 1e-10 of upper "
            f"{lam_hi:.3e}",
            upper=lam_hi, residual_upper=res_hi,
        )
    return FrameBounds(
        lower=min(lam_lo, lam_hi),
        upper=lam_hi,
        iterations_lower=it_lo,
        iterations_upper=it_hi,
        residual_lower=res_lo,
        residual_upper=res_hi,
    )


def dual_reconstruct(coeffs: CoefficientSet, system: ShearletSystem, n: int,
                     tol: float = 1e-8, max_iter: int = 500,
                     *, x0: np.ndarray | None = None) -> Reconstruction:
    """Canonical-dual reconstruction: solve S x = synthesize(coeffs).

    Raises MaxIterExceeded when the iteration budget runs out; the
    exception carries the best iterate as a Reconstruction with
    ``converged=False``.
    """
    check_in_range(tol, "tol", 0.0, 1.0, inclusive=(False, False))
    check_int(max_iter, "max_iter", minimum=1)
    op = _operator_for(system, n)
    b = synthesize(coeffs, system, n)
    x, iterations, rel, converged, _ = _conjugate_residual(
        op, b, tol, max_iter, x0=x0
    )
    result = Reconstruction(grid=x, iterations=iterations, residual=rel,
                            converged=converged)
    if not converged:
        raise MaxIterExceeded(
            f"dual reconstruction at {rel:.3e} relative residual after "
            f"{iterations} iterations (tol {tol})",
            best=result,
        )
    return result
