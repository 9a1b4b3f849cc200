"""Cone-adapted shearlet index sets and transported atoms on the unit square.

An atom at scale ``j``, shear ``k`` and translation ``(m1, m2)`` in the
horizontal cone is

    2^(3j/4) * psi1(2^j x1 + k 2^(j/2) x2 - c m1) * psi2(2^(j/2) x2 - ct m2)

built from the validated 1-D generator pair.  The vertical cone swaps the
roles of ``x1`` and ``x2``; the coarse layer consists of plain scaling-
function translates ``phi(x1 - c m1) phi(x2 - c m2)``.

Translation steps are parabolic and pixel-aligned: ``x1`` advances by
``c 2^-j`` per ``m1`` and ``x2`` by ``c 2^-ceil(j/2)`` per ``m2`` (so
``ct = c`` at even scales and ``c / sqrt(2)`` at odd ones, a slight
oversampling that keeps every stride an exact binary fraction).  At even
scales the family coincides with translating on the classical sheared
lattice.  Because the shear term references absolute ``x2``, the set of
translations meeting the domain is an exact rectangle in ``(m1, m2)`` for
every ``(cone, j, k)`` slab.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionTooCoarse
from .generators import GeneratorSet
from .validation import check_dyadic, check_int

__all__ = [
    "CONES",
    "ShearletIndex",
    "ShearletSystem",
    "Atom",
    "shear_bound",
    "parabolic_matrix",
    "shear_matrix",
    "slab_keys",
    "slab_rect",
    "enumerate_indices",
    "atom",
]

CONES = ("coarse", "horizontal", "vertical")
CONE_RANK = {"coarse": 0, "horizontal": 1, "vertical": 2}


def shear_bound(j: int) -> int:
    """Largest admissible |shear| at scale j: ``ceil(2^(j/2))`` exactly."""
    s = math.isqrt(1 << j)
    return s if s * s == (1 << j) else s + 1


def parabolic_matrix(j: int, cone: str) -> np.ndarray:
    """Anisotropic dilation: diag(2^j, 2^(j/2)) or its axis swap."""
    if j < 0:
        raise ValueError("scale j must be >= 0")
    a, b = float(2**j), 2.0 ** (j / 2.0)
    if cone == "horizontal":
        return np.array([[a, 0.0], [0.0, b]])
    if cone == "vertical":
        return np.array([[b, 0.0], [0.0, a]])
    raise ValueError(f"no parabolic matrix for cone {cone!r}")


def shear_matrix(k: int, cone: str) -> np.ndarray:
    """Unit-determinant shear along x1 (horizontal) or x2 (vertical)."""
    kf = float(k)
    if cone == "horizontal":
        return np.array([[1.0, kf], [0.0, 1.0]])
    if cone == "vertical":
        return np.array([[1.0, 0.0], [kf, 1.0]])
    raise ValueError(f"no shear matrix for cone {cone!r}")


@dataclass(frozen=True)
class ShearletIndex:
    """Position of one atom: cone, scale, shear and translation integers.

    ``m1`` steps the oscillatory direction by ``c 2^-j``; ``m2`` steps the
    transverse direction by ``c 2^-ceil(j/2)``.  For the vertical cone the
    two directions are the image axes swapped.  Coarse indices carry only
    the translation pair (``j = k = 0``).
    """

    cone: str
    j: int
    k: int
    m1: int
    m2: int

    def __post_init__(self):
        if self.cone not in CONES:
            raise ValueError(f"unknown cone {self.cone!r}")
        if self.cone == "coarse" and (self.j != 0 or self.k != 0):
            raise ValueError("coarse indices carry only translations")
        if self.j < 0:
            raise ValueError("scale j must be >= 0")
        if abs(self.k) > shear_bound(self.j):
            raise ValueError(
                f"|k| = {abs(self.k)} exceeds the scale-{self.j} shear bound "
                f"{shear_bound(self.j)}"
            )

    @property
    def m(self) -> tuple:
        return (self.m1, self.m2)

    def sort_key(self) -> tuple:
        return (CONE_RANK[self.cone], self.j, self.k, self.m1, self.m2)


@dataclass(frozen=True)
class ShearletSystem:
    """Immutable description of a finite shearlet family over [0, 1]^2.

    Parameters
    ----------
    generators : validated 1-D generator pair (wavelet + scaling function).
    c : translation sampling constant; must be an exact binary fraction so
        all coefficient strides land on pixel boundaries.
    J : finest scale; scales 0..J enter both cones.
    atom_resolution : guaranteed minimum samples per unit length of every
        atom tabulation grid (the transported generator grid is always at
        least this dense; raise otherwise).
    """

    generators: GeneratorSet
    c: float = 1.0
    J: int = 4
    atom_resolution: int = 0

    def __post_init__(self):
        check_dyadic(self.c, "c")
        check_int(self.J, "J", minimum=0)
        depth = self.generators.spec.cascade_depth
        resolution = self.atom_resolution
        if resolution == 0:
            resolution = 1 << min(self.J + 4, depth)
            object.__setattr__(self, "atom_resolution", resolution)
        check_int(resolution, "atom_resolution", minimum=1)
        if resolution > (1 << depth):
            raise ResolutionTooCoarse(
                f"generator tabulation has 2^{depth} samples per unit but "
                f"atom_resolution = {resolution} was requested"
            )

    # translation steps along the cone's own axes
    def step_fast(self, j: int) -> float:
        """x-step of m1 (the 2^-j direction)."""
        return self.c * 2.0 ** (-j)

    def step_slow(self, j: int) -> float:
        """x-step of m2 (the 2^-j/2 direction, binary-fraction aligned)."""
        return self.c * 2.0 ** (-((j + 1) // 2))

    def shear_step(self, j: int) -> float:
        """Translation step of m2 as seen inside the psi2 argument."""
        return self.step_slow(j) * 2.0 ** (j / 2.0)

    @property
    def support_width(self) -> int:
        return self.generators.spec.support_width


# ---------------------------------------------------------------------------
# index enumeration


def slab_keys(system: ShearletSystem) -> list:
    """Canonical (cone, j, k) slab order: coarse, then each cone by (j, k)."""
    keys = [("coarse", 0, 0)]
    for cone in ("horizontal", "vertical"):
        for j in range(system.J + 1):
            bound = shear_bound(j)
            for k in range(-bound, bound + 1):
                keys.append((cone, j, k))
    return keys


def _coarse_range(system: ShearletSystem) -> tuple:
    W = system.support_width
    lo = math.floor(-W / system.c) + 1
    hi = math.ceil(1.0 / system.c) - 1
    return lo, hi


def _m2_range(system: ShearletSystem, j: int) -> tuple:
    W = system.support_width
    sigma2 = system.step_slow(j)
    e2 = 2.0 ** (-j / 2.0)
    lo = math.floor(-W * e2 / sigma2) + 1
    hi = math.ceil(1.0 / sigma2) - 1
    return lo, hi


def _m1_window(system: ShearletSystem, j: int, k: int, m2: int) -> tuple:
    """Valid m1 interval for one transverse position: the atom's support
    slab must overlap the open unit interval in the fast direction."""
    W = system.support_width
    e1 = 2.0 ** (-j)
    e2 = 2.0 ** (-j / 2.0)
    sigma1 = system.step_fast(j)
    sigma2 = system.step_slow(j)
    x2_lo = sigma2 * m2
    x2_hi = x2_lo + W * e2
    v1 = -k * e2 * x2_lo
    v2 = -k * e2 * x2_hi
    vmin, vmax = (v1, v2) if v1 <= v2 else (v2, v1)
    lo = math.floor((-e1 * W - vmax) / sigma1) + 1
    hi = math.ceil((1.0 - vmin) / sigma1) - 1
    return lo, hi


def slab_rect(system: ShearletSystem, cone: str, j: int, k: int) -> tuple:
    """Tight bounding rectangle (m1_lo, m1_hi, m2_lo, m2_hi) of the slab's
    domain-meeting translations.  Slab coefficient arrays use this shape;
    entries whose support misses the domain are structurally zero."""
    if cone == "coarse":
        lo, hi = _coarse_range(system)
        return (lo, hi, lo, hi)
    m2_lo, m2_hi = _m2_range(system, j)
    a_lo, a_hi = _m1_window(system, j, k, m2_lo)
    b_lo, b_hi = _m1_window(system, j, k, m2_hi)
    return (min(a_lo, b_lo), max(a_hi, b_hi), m2_lo, m2_hi)


def _slab_indices(system: ShearletSystem, cone: str, j: int, k: int) -> list:
    if cone == "coarse":
        lo, hi = _coarse_range(system)
        return [
            ShearletIndex("coarse", 0, 0, m1, m2)
            for m1 in range(lo, hi + 1)
            for m2 in range(lo, hi + 1)
        ]
    m2_lo, m2_hi = _m2_range(system, j)
    pairs = []
    for m2 in range(m2_lo, m2_hi + 1):
        lo, hi = _m1_window(system, j, k, m2)
        pairs.extend((m1, m2) for m1 in range(lo, hi + 1))
    pairs.sort()
    return [ShearletIndex(cone, j, k, m1, m2) for m1, m2 in pairs]


def enumerate_indices(system: ShearletSystem) -> list:
    """Every index whose atom support meets the open unit square, in the
    deterministic canonical order (cone rank, j, k, m1, m2)."""
    out = []
    for cone, j, k in slab_keys(system):
        out.extend(_slab_indices(system, cone, j, k))
    return out


# ---------------------------------------------------------------------------
# atoms


class Atom:
    """One shearlet atom as an exactly transported tabulation.

    Values come from the 1-D generator tabulations composed with the atom's
    affine coordinates, so the atom is identically zero outside
    ``support_box`` and its quadrature norm on the transported grid equals
    the generator product norm to machine precision.
    """

    __slots__ = ("system", "index", "support_box", "norm_l2")

    def __init__(self, system: ShearletSystem, index: ShearletIndex):
        self.system = system
        self.index = index
        gens = system.generators
        if index.cone == "coarse":
            self.norm_l2 = gens.phi_norm_l2()
        else:
            self.norm_l2 = gens.psi_norm_l2()
        self.support_box = _support_box(system, index)

    def _axis_arguments(self, x1, x2):
        """Generator-coordinate arguments (y1, y2) at the given points."""
        idx = self.index
        sys_ = self.system
        if idx.cone == "vertical":
            x1, x2 = x2, x1
        if idx.cone == "coarse":
            return x1 - sys_.c * idx.m1, x2 - sys_.c * idx.m2
        j, k = idx.j, idx.k
        r2 = 2.0 ** (j / 2.0)
        y1 = (2.0**j) * x1 + k * r2 * x2 - sys_.c * idx.m1
        y2 = r2 * x2 - sys_.shear_step(j) * idx.m2
        return y1, y2

    def evaluate(self, x1, x2) -> np.ndarray:
        """Atom values at arbitrary points (piecewise-constant tabulation)."""
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        gens = self.system.generators
        y1, y2 = self._axis_arguments(x1, x2)
        idx = self.index
        if idx.cone == "coarse":
            return gens.phi1d(y1) * gens.phi1d(y2)
        amp = 2.0 ** (0.75 * idx.j)
        return amp * gens.psi1(y1) * gens.psi2(y2)

    def on_grid(self, n: int, oversample: int = 1) -> np.ndarray:
        """Pixel grid of the atom: midpoint samples, or pixel averages of
        ``oversample^2`` midpoint subsamples when ``oversample > 1``."""
        check_int(n, "n", minimum=1)
        check_int(oversample, "oversample", minimum=1)
        fine = n * oversample
        t = (np.arange(fine) + 0.5) / fine
        (x1_lo, x1_hi), (x2_lo, x2_hi) = self.support_box
        out = np.zeros((n, n))
        # evaluate only rows/columns meeting the support box
        rows = np.nonzero((t > x1_lo) & (t < x1_hi))[0]
        cols = np.nonzero((t > x2_lo) & (t < x2_hi))[0]
        if rows.size == 0 or cols.size == 0:
            return out
        vals = self.evaluate(t[rows][:, None], t[cols][None, :])
        full = np.zeros((fine, fine))
        full[np.ix_(rows, cols)] = vals
        return full.reshape(n, oversample, n, oversample).mean(axis=(1, 3))

    def norm_quadrature(self) -> float:
        """L2 norm by quadrature on the atom's transported tabulation grid.

        The affine change of variables is exact for the piecewise-constant
        tabulation: the Jacobian cancels the 2^(3j/4) normalization, leaving
        the plain product of the 1-D generator norms.
        """
        gens = self.system.generators
        if self.index.cone == "coarse":
            q = np.sum(gens.phi1d.cells**2) * gens.phi1d.dx
            return float(q)
        q1 = np.sum(gens.psi1.cells**2) * gens.psi1.dx
        q2 = np.sum(gens.psi2.cells**2) * gens.psi2.dx
        return float(np.sqrt(q1 * q2))


def _support_box(system: ShearletSystem, idx: ShearletIndex) -> tuple:
    W = system.support_width
    c = system.c
    if idx.cone == "coarse":
        b1 = (c * idx.m1, c * idx.m1 + W)
        b2 = (c * idx.m2, c * idx.m2 + W)
        return (b1, b2)
    j, k = idx.j, idx.k
    e1 = 2.0 ** (-j)
    e2 = 2.0 ** (-j / 2.0)
    sigma1 = system.step_fast(j)
    sigma2 = system.step_slow(j)
    x2_lo = sigma2 * idx.m2
    x2_hi = x2_lo + W * e2
    v1 = -k * e2 * x2_lo
    v2 = -k * e2 * x2_hi
    vmin, vmax = (v1, v2) if v1 <= v2 else (v2, v1)
    fast = (sigma1 * idx.m1 + vmin, sigma1 * idx.m1 + e1 * W + vmax)
    slow = (x2_lo, x2_hi)
    if idx.cone == "vertical":
        return (slow, fast)
    return (fast, slow)


def atom(system: ShearletSystem, idx: ShearletIndex) -> Atom:
    """Materialize one enumerated atom; rejects indices outside the system."""
    if idx.j > system.J:
        raise ValueError(f"scale {idx.j} exceeds the system's J = {system.J}")
    if idx.cone == "coarse":
        lo, hi = _coarse_range(system)
        if not (lo <= idx.m1 <= hi and lo <= idx.m2 <= hi):
            raise ValueError(f"coarse translation {idx.m} outside [{lo}, {hi}]^2")
    else:
        m2_lo, m2_hi = _m2_range(system, idx.j)
        if not (m2_lo <= idx.m2 <= m2_hi):
            raise ValueError(f"m2 = {idx.m2} outside [{m2_lo}, {m2_hi}]")
        lo, hi = _m1_window(system, idx.j, idx.k, idx.m2)
        if not (lo <= idx.m1 <= hi):
            raise ValueError(f"m1 = {idx.m1} outside [{lo}, {hi}] at m2 = {idx.m2}")
    return Atom(system, idx)
