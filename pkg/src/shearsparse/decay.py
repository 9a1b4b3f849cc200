"""Edge-coefficient decay probes, smooth-part bounds, and significance counts.

The probes quantify three behaviors of the coefficient set of a cartoon
image near its jump curve and away from it:

* ``edge_coefficient_decay`` tracks the largest coefficient magnitude per
  (scale, shear) among atoms whose support meets the jump curve inside a
  small dyadic probe cube, normalized by the expected decay law so a
  bounded ratio sequence certifies the law empirically;
* ``smooth_bessel_check`` and ``smooth_part_rate`` measure the edge-free
  part: a scale-weighted coefficient energy against the closed-form second
  derivative of the patch, and the pure coefficient-tail rate;
* ``significant_count`` / ``per_cube_count`` count coefficients above a
  threshold, globally and within one probe cube.

Geometry convention: the probe cube at scale ``j`` has side ``2 * 2^(-j/2)``
and sits on the half-side lattice, so cubes at one scale overlap their
neighbors.  Support/edge intersection is decided conservatively through the
atom's axis-aligned support bounding box and a dense sampling of the
boundary curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .approximation import ErrorCurve, RateReport, fit_rate, system_config_hash
from .cartoon import (
    CartoonImage,
    RadiusProfile,
    SmoothPatch,
    boundary_point,
    make_radius_profile,
    patch_derivative,
    rasterize,
    tangent_slope,
)
from .errors import NoIntersectingShearlets
from .system import ShearletSystem, _m1_window, _m2_range, shear_bound
from .transform import CoefficientSet, analyze
from .validation import check_int

__all__ = [
    "EdgeProbe",
    "DecayRow",
    "DecayTable",
    "CountReport",
    "CubeCountRow",
    "PerCubeReport",
    "edge_coefficient_decay",
    "smooth_bessel_check",
    "smooth_part_rate",
    "significant_count",
    "per_cube_count",
]

# dense boundary sampling density for intersection tests
_BOUNDARY_SAMPLES = 8192


# ---------------------------------------------------------------------------
# probe geometry


@dataclass(frozen=True)
class EdgeProbe:
    """A point on a jump curve together with a dyadic probe cube.

    The cube at scale ``j`` anchored at lattice position ``p`` is
    ``[-2^(-j/2), 2^(-j/2)]^2 + 2^(-j/2) p``.  The probe point (boundary
    position at ``theta``) must lie in the cube's interior.  ``padding``
    scales the cube's half-side for intersection searches, standing in for
    the unspecified constant in front of the cube size; the default of 3 is
    our choice and is recorded with every report.
    """

    boundary: RadiusProfile
    theta: float
    cube_j: int
    cube_p: tuple
    padding: float = 3.0

    def __post_init__(self):
        check_int(self.cube_j, "cube_j", minimum=0)
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.padding < 1.0:
            raise ValueError("padding must be >= 1")
        if len(self.cube_p) != 2:
            raise ValueError("cube_p must be a lattice pair (p1, p2)")
        x1, x2 = self.point
        h = 2.0 ** (-self.cube_j / 2.0)
        if not (abs(x1 - h * self.cube_p[0]) < h and abs(x2 - h * self.cube_p[1]) < h):
            raise ValueError(
                f"probe point ({x1:.6g}, {x2:.6g}) is not interior to the "
                f"cube at scale {self.cube_j}, lattice {self.cube_p}"
            )

    @classmethod
    def at_angle(cls, boundary: RadiusProfile, theta: float, cube_j: int,
                 padding: float = 3.0) -> "EdgeProbe":
        """Probe at the boundary point for ``theta``, in the nearest cube."""
        x1, x2 = boundary_point(boundary, theta)
        h = 2.0 ** (-cube_j / 2.0)
        p = (math.floor(x1 / h + 0.5), math.floor(x2 / h + 0.5))
        return cls(boundary, theta, cube_j, p, padding)

    @property
    def point(self) -> tuple:
        return boundary_point(self.boundary, self.theta)

    @property
    def slope(self) -> float:
        """Edge slope dx1/dx2 at the probe point; may be ``inf``."""
        return tangent_slope(self.boundary, self.theta)

    def _center_at(self, j: int) -> tuple:
        h = 2.0 ** (-j / 2.0)
        if j == self.cube_j:
            p1, p2 = self.cube_p
        else:
            x1, x2 = self.point
            p1 = math.floor(x1 / h + 0.5)
            p2 = math.floor(x2 / h + 0.5)
        return h * p1, h * p2

    def cube_at(self, j: int) -> tuple:
        """Probe cube at scale ``j``: ((x1_lo, x1_hi), (x2_lo, x2_hi)).

        At the probe's own scale the stored lattice anchor is used; at other
        scales the cube recenters onto the probe point.
        """
        h = 2.0 ** (-j / 2.0)
        c1, c2 = self._center_at(j)
        return ((c1 - h, c1 + h), (c2 - h, c2 + h))

    def window_at(self, j: int) -> tuple:
        """Padded search window around the cube; membership tests never use
        it, so any padding >= 1 yields identical results."""
        half = self.padding * 2.0 ** (-j / 2.0)
        c1, c2 = self._center_at(j)
        return ((c1 - half, c1 + half), (c2 - half, c2 + half))


def _boundary_samples(profile: RadiusProfile, samples: int = _BOUNDARY_SAMPLES):
    """Dense midpoint sampling of the boundary curve."""
    theta = (np.arange(samples) + 0.5) * (2.0 * math.pi / samples)
    r = profile.radius(theta)
    x1 = profile.translate[0] + r * np.cos(theta)
    x2 = profile.translate[1] + r * np.sin(theta)
    return x1, x2


# ---------------------------------------------------------------------------
# slab geometry: vectorized support boxes for the oscillatory-in-x1 cone


def _slab_boxes(system: ShearletSystem, j: int, k: int):
    """Translation indices and support bounding boxes of one fine slab.

    Returns ``(m1, m2, x1_lo, x1_hi, x2_lo, x2_hi)`` arrays over the tight
    trapezoidal window of domain-meeting translations.
    """
    W = system.support_width
    e1 = 2.0 ** (-j)
    e2 = 2.0 ** (-j / 2.0)
    s1 = system.step_fast(j)
    s2 = system.step_slow(j)
    m1s, m2s = [], []
    lo2, hi2 = _m2_range(system, j)
    for m2 in range(lo2, hi2 + 1):
        lo1, hi1 = _m1_window(system, j, k, m2)
        m1s.extend(range(lo1, hi1 + 1))
        m2s.extend([m2] * (hi1 - lo1 + 1))
    m1 = np.asarray(m1s, dtype=np.int64)
    m2 = np.asarray(m2s, dtype=np.int64)
    x2_lo = s2 * m2
    x2_hi = x2_lo + W * e2
    v1 = -k * e2 * x2_lo
    v2 = -k * e2 * x2_hi
    vmin = np.minimum(v1, v2)
    vmax = np.maximum(v1, v2)
    x1_lo = s1 * m1 + vmin
    x1_hi = s1 * m1 + W * e1 + vmax
    return m1, m2, x1_lo, x1_hi, x2_lo, x2_hi


def _cube_hits(system: ShearletSystem, j: int, k: int, cube: tuple,
               window: tuple, b1: np.ndarray, b2: np.ndarray):
    """Translations whose support box contains a boundary point lying inside
    the probe cube (the triple intersection: support, cube, edge).  The
    padded window only prefilters support boxes, which is sound because the
    deciding sample is always inside the cube and hence the window."""
    (q1_lo, q1_hi), (q2_lo, q2_hi) = cube
    sel = (b1 > q1_lo) & (b1 < q1_hi) & (b2 > q2_lo) & (b2 < q2_hi)
    if not np.any(sel):
        return np.empty(0, np.int64), np.empty(0, np.int64)
    p1 = b1[sel]
    p2 = b2[sel]
    (w1_lo, w1_hi), (w2_lo, w2_hi) = window
    m1, m2, x1_lo, x1_hi, x2_lo, x2_hi = _slab_boxes(system, j, k)
    near = (x1_lo < w1_hi) & (x1_hi > w1_lo) & (x2_lo < w2_hi) & (x2_hi > w2_lo)
    if not np.any(near):
        return np.empty(0, np.int64), np.empty(0, np.int64)
    idx = np.nonzero(near)[0]
    inside = (
        (p1[None, :] > x1_lo[idx, None])
        & (p1[None, :] < x1_hi[idx, None])
        & (p2[None, :] > x2_lo[idx, None])
        & (p2[None, :] < x2_hi[idx, None])
    )
    hit = idx[np.any(inside, axis=1)]
    return m1[hit], m2[hit]


def _slab_magnitudes(coeffs: CoefficientSet, j: int, k: int,
                     m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    slab = coeffs.slabs[("horizontal", j, k)]
    return np.abs(slab.data[m1 - slab.m1_lo, m2 - slab.m2_lo])


# ---------------------------------------------------------------------------
# edge decay table


@dataclass(frozen=True)
class DecayRow:
    """Per-(scale, shear) summary at one probe."""

    j: int
    k: int
    regime: int
    n_hits: int
    max_coeff: float
    shear_offset: float
    ratio: float


@dataclass(frozen=True)
class DecayTable:
    """Decay rows for one probe, plus the probe geometry that made them."""

    slope: float
    regimes: tuple
    rows: tuple
    padding: float

    def per_scale_max(self, regime: int) -> tuple:
        """Largest normalized ratio per scale, ascending in ``j``."""
        best = {}
        for row in self.rows:
            if row.regime == regime:
                best[row.j] = max(best.get(row.j, 0.0), row.ratio)
        return tuple(sorted(best.items()))

    def spread(self, regime: int, scales: int = 3) -> float:
        """Max/min of the per-scale maxima over the finest ``scales`` levels."""
        per = self.per_scale_max(regime)[-scales:]
        if not per:
            raise NoIntersectingShearlets(f"no regime-{regime} rows recorded")
        vals = [r for _, r in per]
        top = max(vals)
        if top == 0.0:
            return 0.0
        bot = min(vals)
        return math.inf if bot == 0.0 else top / bot


def edge_coefficient_decay(f: CartoonImage, system: ShearletSystem, n: int,
                           probe: EdgeProbe, j_range, *, oversample: int = 8,
                           coeffs: CoefficientSet | None = None) -> DecayTable:
    """Largest coefficient per (j, k) among atoms meeting the edge at the probe.

    For each scale in ``j_range`` the probe cube recenters on the probe
    point and every shear line of the oscillatory-in-x1 cone is scanned.
    The slope regimes select which normalizations apply: ``|s| <= 3`` rates
    the decay against ``2^(-3j/4) / |k + 2^(j/2) s|^3`` (regime 1) and
    ``|s| > 3/2`` or a vertical-in-x2 tangent against ``2^(-9j/4)``
    (regime 2); in the overlap both rows are emitted.
    """
    j_list = sorted(set(int(j) for j in j_range))
    if not j_list:
        raise ValueError("j_range is empty")
    for j in j_list:
        if not 0 <= j <= system.J:
            raise ValueError(f"scale {j} outside the system's range [0, {system.J}]")
    s = probe.slope
    regimes = []
    if math.isfinite(s) and abs(s) <= 3.0:
        regimes.append(1)
    if (not math.isfinite(s)) or abs(s) > 1.5:
        regimes.append(2)
    if coeffs is None:
        coeffs = analyze(rasterize(f, n, oversample), system)
    b1, b2 = _boundary_samples(probe.boundary)
    rows = []
    for j in j_list:
        cube = probe.cube_at(j)
        window = probe.window_at(j)
        bound = shear_bound(j)
        for k in range(-bound, bound + 1):
            m1, m2 = _cube_hits(system, j, k, cube, window, b1, b2)
            if m1.size == 0:
                continue
            cmax = float(np.max(_slab_magnitudes(coeffs, j, k, m1, m2)))
            if 1 in regimes:
                offset = abs(k + 2.0 ** (j / 2.0) * s)
                rows.append(DecayRow(j, k, 1, int(m1.size), cmax, offset,
                                     cmax * offset**3 * 2.0 ** (0.75 * j)))
            if 2 in regimes:
                offset = math.inf if not math.isfinite(s) else abs(k + 2.0 ** (j / 2.0) * s)
                rows.append(DecayRow(j, k, 2, int(m1.size), cmax, offset,
                                     cmax * 2.0 ** (2.25 * j)))
    if not rows:
        raise NoIntersectingShearlets(
            "no atom support meets the edge inside the probe cube over "
            f"scales {j_list}"
        )
    return DecayTable(slope=s, regimes=tuple(regimes), rows=tuple(rows),
                      padding=probe.padding)


# ---------------------------------------------------------------------------
# smooth-part checks


def _patch_grid(g: SmoothPatch, n: int, oversample: int) -> np.ndarray:
    # a throwaway region: with no jump component the region is never queried
    image = CartoonImage(region=make_radius_profile(0.25), f0=g, f1=None)
    return rasterize(image, n, oversample)


def smooth_bessel_check(g: SmoothPatch, system: ShearletSystem, n: int,
                        J: int, *, oversample: int = 8, samples: int = 1024,
                        coeffs: CoefficientSet | None = None) -> np.ndarray:
    """Scale-weighted coefficient energy against the second-derivative norm.

    Returns the partial sums, over the oscillatory-in-x1 cone up to each
    scale ``j <= J``, of ``2^(4j) |c|^2``, divided by the midpoint-quadrature
    value of ``||d^2 g / dx1^2||_2^2`` from the patch's closed-form second
    derivative.  The sequence is non-decreasing by construction; a leveling
    tail certifies the weighted bound on desk scales.  The patch should
    vanish at the square's frame (windowed patches do); otherwise the cutoff
    at the frame acts as an artificial jump and pollutes fine scales.
    """
    check_int(J, "J", minimum=0, maximum=system.J)
    if coeffs is None:
        coeffs = analyze(_patch_grid(g, n, oversample), system)
    t = (np.arange(samples) + 0.5) / samples
    d2 = patch_derivative(g, t[:, None], t[None, :], order=(2, 0))
    denom = float(np.sum(d2**2)) / samples**2
    weighted = np.zeros(J + 1)
    for (cone, j, k), slab in coeffs.slabs.items():
        if cone == "horizontal" and j <= J:
            weighted[j] += 2.0 ** (4 * j) * float(np.sum(slab.data**2))
    sums = np.cumsum(weighted)
    if denom == 0.0:
        if sums[-1] != 0.0:
            raise ValueError("second derivative vanishes but coefficients do not")
        return np.zeros(J + 1)
    return sums / denom


def smooth_part_rate(g: SmoothPatch, system: ShearletSystem, n: int, Ns,
                     *, oversample: int = 8, fit_range: tuple | None = None,
                     coeffs: CoefficientSet | None = None) -> RateReport:
    """Pure power fit of the coefficient-tail sums of an edge-free patch.

    The tail at ``N`` is the energy of all but the ``N`` largest coefficient
    magnitudes; no reconstruction is involved.
    """
    if coeffs is None:
        coeffs = analyze(_patch_grid(g, n, oversample), system)
    Ns = [int(N) for N in Ns]
    mags2 = np.sort(coeffs.flatten() ** 2)[::-1]
    suffix = np.concatenate([np.cumsum(mags2[::-1])[::-1], [0.0]])
    points = []
    for N in Ns:
        if N < 0:
            raise ValueError("N must be >= 0")
        points.append((N, float(suffix[min(N, mags2.size)])))
    curve = ErrorCurve(points=tuple(points),
                       metadata=system_config_hash(system, n, extra="tail"))
    return fit_rate(curve, "pure-power", fit_range=fit_range)


# ---------------------------------------------------------------------------
# significance counting


def _fine_rescale(system: ShearletSystem) -> float:
    """Unit-mass convention for counting: rescale so the oscillatory
    generator's L1 norm is at most one, making peak coefficient magnitudes
    scale-bounded by 2^(-3j/4)."""
    gens = system.generators
    l1 = gens.psi1.norm_l1() * gens.psi2.norm_l1()
    return 1.0 / max(1.0, l1)


def _coarse_rescale(system: ShearletSystem) -> float:
    l1 = system.generators.phi1d.norm_l1() ** 2
    return 1.0 / max(1.0, l1)


def _rescaled_magnitudes(coeffs: CoefficientSet) -> np.ndarray:
    rf = _fine_rescale(coeffs.system)
    rc = _coarse_rescale(coeffs.system)
    parts = []
    for slab in coeffs.canonical_slabs():
        r = rc if slab.cone == "coarse" else rf
        parts.append(np.abs(slab.data.ravel()) * r)
    return np.concatenate(parts)


@dataclass(frozen=True)
class CountReport:
    """Counts of coefficients above each threshold, with fitted growth.

    ``exponent`` is the pure-power slope of ``log count`` against
    ``log(1/eps)``; ``exponent_with_log`` and ``log_coefficient`` come from
    the fit that adds a ``log log(1/eps)`` column.  Thresholds descend, so
    counts must not decrease along the list.
    """

    epsilons: tuple
    counts: tuple
    exponent: float
    exponent_with_log: float
    log_coefficient: float

    def __post_init__(self):
        eps = self.epsilons
        if len(eps) != len(self.counts):
            raise ValueError("epsilons and counts must have equal length")
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly descending")
        if any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(c2 < c1 for c1, c2 in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be non-decreasing as thresholds shrink")


def significant_count(f: CartoonImage, system: ShearletSystem, n: int,
                      epsilons, *, oversample: int = 8,
                      coeffs: CoefficientSet | None = None) -> CountReport:
    """Count coefficients with rescaled magnitude above each threshold."""
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps):
        raise ValueError("epsilons must be positive")
    if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly descending")
    if coeffs is None:
        coeffs = analyze(rasterize(f, n, oversample), system)
    mags = np.sort(_rescaled_magnitudes(coeffs))
    counts = [int(mags.size - np.searchsorted(mags, e, side="right"))
              for e in eps]
    x = []
    y = []
    for e, c in zip(eps, counts):
        if c > 0 and e < 1.0:
            x.append(math.log(1.0 / e))
            y.append(math.log(c))
    exponent = exponent_log = logcoef = math.nan
    if len(x) >= 2:
        design = np.stack([np.ones(len(x)), np.asarray(x)], axis=1)
        sol = np.linalg.lstsq(design, np.asarray(y), rcond=None)[0]
        exponent = float(sol[1])
    usable = [(xi, yi) for xi, yi in zip(x, y) if xi > 1e-9]
    if len(usable) >= 3:
        xs = np.asarray([u[0] for u in usable])
        ys = np.asarray([u[1] for u in usable])
        design = np.stack([np.ones(xs.size), xs, np.log(xs)], axis=1)
        sol = np.linalg.lstsq(design, ys, rcond=None)[0]
        exponent_log = float(sol[1])
        logcoef = float(sol[2])
    return CountReport(epsilons=tuple(eps), counts=tuple(counts),
                       exponent=exponent, exponent_with_log=exponent_log,
                       log_coefficient=logcoef)


# ---------------------------------------------------------------------------
# per-cube counting


@dataclass(frozen=True)
class CubeCountRow:
    """Counts at one shear line of the probe's scale."""

    j: int
    k: int
    intersecting: int
    significant: int
    shear_offset: float
    count_ratio: float


@dataclass(frozen=True)
class PerCubeReport:
    """Counting results within one probe cube, plus cube-cover statistics.

    ``rows`` hold, per shear line, how many translates meet the edge inside
    the (padded) cube and how many of those exceed the threshold.
    ``cube_counts`` records ``(scale, crossing cubes, crossing / 2^(j/2))``
    over all system scales.
    """

    j: int
    epsilon: float
    rows: tuple
    intersecting_total: int
    significant_total: int
    case1_bound: float
    case2b_bound: float
    cube_counts: tuple
    padding: float

    @property
    def case1_ratio(self) -> float:
        return self.significant_total / self.case1_bound

    @property
    def case2b_ratio(self) -> float:
        return self.significant_total / self.case2b_bound


def _crossing_cubes(b1: np.ndarray, b2: np.ndarray, j: int) -> int:
    """Number of scale-j cubes whose interior meets the sampled boundary."""
    h = 2.0 ** (-j / 2.0)
    q1 = b1 / h
    q2 = b2 / h
    offs = np.array([-1, 0, 1], dtype=np.int64)
    c1 = np.floor(q1).astype(np.int64)[:, None] + offs[None, :]
    c2 = np.floor(q2).astype(np.int64)[:, None] + offs[None, :]
    ok1 = np.abs(q1[:, None] - c1) < 1.0
    ok2 = np.abs(q2[:, None] - c2) < 1.0
    pair_ok = ok1[:, :, None] & ok2[:, None, :]
    p1 = np.broadcast_to(c1[:, :, None], pair_ok.shape)[pair_ok]
    p2 = np.broadcast_to(c2[:, None, :], pair_ok.shape)[pair_ok]
    # lattice indices stay tiny; pack the pair into one integer key
    return int(np.unique(p1 * (1 << 32) + p2).size)


def per_cube_count(f: CartoonImage, system: ShearletSystem, n: int,
                   probe: EdgeProbe, epsilon: float, *, oversample: int = 8,
                   coeffs: CoefficientSet | None = None) -> PerCubeReport:
    """Count edge-meeting and significant translates inside the probe cube.

    At the probe's scale, each shear line reports the number of translates
    whose support meets the edge inside the padded cube, its ratio to
    ``|k + 2^(j/2) s| + 1``, and how many of those have rescaled coefficient
    magnitude above ``epsilon``.  The totals are compared against the two
    crude per-cube ceilings ``(eps^(-1/3) 2^(-j/4) + 1)^2`` and ``2^j``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    j = probe.cube_j
    if j > system.J:
        raise ValueError(f"probe scale {j} exceeds the system's J = {system.J}")
    if coeffs is None:
        coeffs = analyze(rasterize(f, n, oversample), system)
    rf = _fine_rescale(system)
    s = probe.slope
    b1, b2 = _boundary_samples(probe.boundary)
    cube = probe.cube_at(j)
    window = probe.window_at(j)
    rows = []
    for k in range(-shear_bound(j), shear_bound(j) + 1):
        m1, m2 = _cube_hits(system, j, k, cube, window, b1, b2)
        if m1.size == 0:
            continue
        mags = _slab_magnitudes(coeffs, j, k, m1, m2) * rf
        offset = abs(k + 2.0 ** (j / 2.0) * s) if math.isfinite(s) else math.inf
        ratio = 0.0 if math.isinf(offset) else m1.size / (offset + 1.0)
        rows.append(CubeCountRow(j, k, int(m1.size),
                                 int(np.count_nonzero(mags > epsilon)),
                                 offset, ratio))
    total = sum(r.intersecting for r in rows)
    if total == 0:
        raise NoIntersectingShearlets(
            f"no atom support meets the edge inside the probe cube at scale {j}"
        )
    sig = sum(r.significant for r in rows)
    cube_counts = []
    for jj in range(system.J + 1):
        count = _crossing_cubes(b1, b2, jj)
        cube_counts.append((jj, count, count / 2.0 ** (jj / 2.0)))
    return PerCubeReport(
        j=j, epsilon=float(epsilon), rows=tuple(rows),
        intersecting_total=total, significant_total=sig,
        case1_bound=(epsilon ** (-1.0 / 3.0) * 2.0 ** (-j / 4.0) + 1.0) ** 2,
        case2b_bound=2.0**j, cube_counts=tuple(cube_counts),
        padding=probe.padding,
    )
