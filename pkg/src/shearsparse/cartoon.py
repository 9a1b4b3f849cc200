"""Cartoon-like test images: smooth parts plus a jump across a star-shaped set.

An image is ``f = f0 + f1 * chi_B`` on the unit square, where ``f0`` and
``f1`` are C^2 patches with closed-form derivatives and ``B`` is a
star-shaped set given in polar form by a trigonometric radius profile
``rho(theta)`` around a translate point.  The curvature proxy is
``sup |rho''|``, bounded by the model parameter ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CurvatureExceeded, DegenerateTangent, OutOfUnitSquare
from .validation import check_in_range, check_int, check_power_of_two, check_positive

__all__ = [
    "RadiusProfile",
    "SmoothPatch",
    "CartoonImage",
    "make_radius_profile",
    "boundary_point",
    "boundary_tangent",
    "tangent_slope",
    "contains",
    "evaluate",
    "rasterize",
    "patch_value",
    "patch_derivative",
    "c2_norm",
    "normalize_c2",
    "standard_scene",
]


# ---------------------------------------------------------------------------
# radius profiles


@dataclass(frozen=True)
class RadiusProfile:
    """Polar radius ``rho(theta) = r0 + sum_m a_m cos(m theta) + b_m sin(m theta)``.

    ``harmonics[m-1] = (a_m, b_m)``.  ``translate`` is the star center; the
    boundary curve is ``translate + rho(theta) (cos theta, sin theta)``.
    """

    base_radius: float
    harmonics: tuple = ()
    translate: tuple = (0.5, 0.5)
    rho0: float = 0.45
    nu: float = 1.0

    def radius(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        rho = np.full(theta.shape, self.base_radius)
        for m, (a, b) in enumerate(self.harmonics, start=1):
            rho += a * np.cos(m * theta) + b * np.sin(m * theta)
        return rho

    def radius_d1(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        out = np.zeros(theta.shape)
        for m, (a, b) in enumerate(self.harmonics, start=1):
            out += m * (-a * np.sin(m * theta) + b * np.cos(m * theta))
        return out

    def radius_d2(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        out = np.zeros(theta.shape)
        for m, (a, b) in enumerate(self.harmonics, start=1):
            out -= m * m * (a * np.cos(m * theta) + b * np.sin(m * theta))
        return out


def make_radius_profile(
    base_radius: float,
    harmonics=(),
    translate=(0.5, 0.5),
    *,
    nu: float = 1.0,
    rho0: float = 0.45,
    samples: int = 4096,
) -> RadiusProfile:
    """Validated star-shaped boundary profile.

    Raises
    ------
    CurvatureExceeded
        If ``sup |rho''| > nu`` on the ``samples``-point check grid.
    OutOfUnitSquare
        If any boundary point leaves ``[0, 1]^2``.
    ValueError
        If ``rho`` leaves ``(0, rho0]`` anywhere.
    """
    check_in_range(base_radius, "base_radius", 0.0, 1.0, inclusive=(False, False))
    check_in_range(rho0, "rho0", 0.0, 1.0, inclusive=(False, False))
    check_positive(nu, "nu")
    samples = check_int(samples, "samples", minimum=4096)
    profile = RadiusProfile(
        base_radius=float(base_radius),
        harmonics=tuple((float(a), float(b)) for a, b in harmonics),
        translate=(float(translate[0]), float(translate[1])),
        rho0=float(rho0),
        nu=float(nu),
    )

    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    curv = np.max(np.abs(profile.radius_d2(theta)))
    if curv > nu:
        raise CurvatureExceeded(f"sup |rho''| = {curv:.6g} exceeds nu = {nu}")

    rho = profile.radius(theta)
    if np.min(rho) <= 0 or np.max(rho) > rho0:
        raise ValueError(
            f"rho must stay in (0, rho0={rho0}]; range is "
            f"[{np.min(rho):.6g}, {np.max(rho):.6g}]"
        )

    x1 = profile.translate[0] + rho * np.cos(theta)
    x2 = profile.translate[1] + rho * np.sin(theta)
    if x1.min() < 0 or x1.max() > 1 or x2.min() < 0 or x2.max() > 1:
        raise OutOfUnitSquare("boundary leaves the unit square")
    return profile


def boundary_point(profile: RadiusProfile, theta: float) -> tuple[float, float]:
    """Boundary point at polar angle ``theta``."""
    rho = float(profile.radius(theta))
    return (
        profile.translate[0] + rho * math.cos(theta),
        profile.translate[1] + rho * math.sin(theta),
    )


def boundary_tangent(profile: RadiusProfile, theta: float) -> tuple[float, float]:
    """Unnormalized tangent vector ``d/dtheta`` of the boundary curve."""
    rho = float(profile.radius(theta))
    d1 = float(profile.radius_d1(theta))
    c, s = math.cos(theta), math.sin(theta)
    return (d1 * c - rho * s, d1 * s + rho * c)


def tangent_slope(profile: RadiusProfile, theta: float) -> float:
    """Edge orientation ``s = dx1/dx2`` at the boundary point for ``theta``.

    Horizontal-cone estimates parametrize edges by how fast ``x1`` moves per
    unit ``x2``; a vertical tangent direction (``dx2 = 0``) maps to
    ``s = inf``.  For the unit disk: ``theta = 0 -> 0``,
    ``theta = pi/2 -> inf``, ``theta = pi/4 -> -1``.
    """
    t1, t2 = boundary_tangent(profile, theta)
    norm = math.hypot(t1, t2)
    if norm < 1e-14:
        raise DegenerateTangent(f"tangent vanishes at theta = {theta}")
    if abs(t2) < 1e-14 * norm:
        return math.inf
    return t1 / t2


def contains(profile: RadiusProfile, x1, x2) -> np.ndarray:
    """Boundary-inclusive membership test for the star-shaped set.

    The comparison carries a 1e-12 relative slack so that points constructed
    with :func:`boundary_point` test inside despite roundoff, while any
    genuine radial push of 1e-6 or more stays outside.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    d1 = x1 - profile.translate[0]
    d2 = x2 - profile.translate[1]
    r = np.hypot(d1, d2)
    theta = np.arctan2(d2, d1)
    return r <= profile.radius(theta) * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# smooth patches


def _window(t: np.ndarray) -> np.ndarray:
    """C^2 bump on [0, 1] peaking at 1: ``64 (t (1-t))^3``."""
    u = t * (1.0 - t)
    out = 64.0 * u**3
    return np.where((t > 0) & (t < 1), out, 0.0)


def _window_d1(t: np.ndarray) -> np.ndarray:
    u = t * (1.0 - t)
    out = 192.0 * u**2 * (1.0 - 2.0 * t)
    return np.where((t > 0) & (t < 1), out, 0.0)


def _window_d2(t: np.ndarray) -> np.ndarray:
    u = t * (1.0 - t)
    out = 384.0 * u * (1.0 - 2.0 * t) ** 2 - 384.0 * u**2
    return np.where((t > 0) & (t < 1), out, 0.0)


_WINDOW = {0: _window, 1: _window_d1, 2: _window_d2}


@dataclass(frozen=True)
class SmoothPatch:
    """C^2 patch on the unit square with closed-form derivatives.

    Two kinds:

    ``"polynomial"``
        ``sum_k coef_k x1^a_k x2^b_k`` with ``monomials = ((a, b, coef), …)``.
    ``"gaussian-bump-sum"``
        ``sum_k amp_k exp(-((x1-cx)^2 + (x2-cy)^2) / (2 sigma^2))`` with
        ``bumps = ((amp, cx, cy, sigma), …)``.

    With ``windowed=True`` (the default) the patch is multiplied by a C^2
    window vanishing to second order on the square's boundary, making the
    support compact.
    """

    kind: str
    monomials: tuple = ()
    bumps: tuple = ()
    windowed: bool = True

    def __post_init__(self):
        if self.kind not in ("polynomial", "gaussian-bump-sum"):
            raise ValueError(f"unknown patch kind {self.kind!r}")

    def scaled(self, factor: float) -> "SmoothPatch":
        if self.kind == "polynomial":
            mono = tuple((a, b, coef * factor) for (a, b, coef) in self.monomials)
            return replace(self, monomials=mono)
        bumps = tuple((amp * factor, cx, cy, s) for (amp, cx, cy, s) in self.bumps)
        return replace(self, bumps=bumps)


def _poly_partial(monomials, dx1: int, dx2: int):
    """Monomial list of the (dx1, dx2) partial derivative."""
    out = []
    for a, b, coef in monomials:
        if a < dx1 or b < dx2:
            continue
        c = coef
        for i in range(dx1):
            c *= a - i
        for i in range(dx2):
            c *= b - i
        out.append((a - dx1, b - dx2, c))
    return out


def _poly_eval(monomials, x1, x2):
    out = np.zeros(np.broadcast(x1, x2).shape)
    for a, b, coef in monomials:
        out += coef * x1**a * x2**b
    return out


def _gauss_eval(bumps, x1, x2, dx1: int, dx2: int):
    out = np.zeros(np.broadcast(x1, x2).shape)
    for amp, cx, cy, sigma in bumps:
        u = (x1 - cx) / sigma
        v = (x2 - cy) / sigma
        core = amp * np.exp(-0.5 * (u**2 + v**2))
        # 1-D Hermite factors for each axis
        fac = 1.0
        if dx1 == 1:
            fac = fac * (-u / sigma)
        elif dx1 == 2:
            fac = fac * (u**2 - 1.0) / sigma**2
        if dx2 == 1:
            fac = fac * (-v / sigma)
        elif dx2 == 2:
            fac = fac * (v**2 - 1.0) / sigma**2
        out += core * fac
    return out


def patch_derivative(patch: SmoothPatch, x1, x2, order=(0, 0)) -> np.ndarray:
    """Evaluate ``D^order patch`` (closed form, |order| <= 2)."""
    dx1, dx2 = order
    if dx1 + dx2 > 2 or dx1 < 0 or dx2 < 0:
        raise ValueError("only derivatives up to total order 2 are available")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)

    def base(d1, d2):
        if patch.kind == "polynomial":
            return _poly_eval(_poly_partial(patch.monomials, d1, d2), x1, x2)
        return _gauss_eval(patch.bumps, x1, x2, d1, d2)

    if not patch.windowed:
        return base(dx1, dx2)

    # Leibniz rule against the tensor window
    out = np.zeros(np.broadcast(x1, x2).shape)
    for i in range(dx1 + 1):
        for j in range(dx2 + 1):
            w = _WINDOW[dx1 - i](x1) * _WINDOW[dx2 - j](x2)
            out += math.comb(dx1, i) * math.comb(dx2, j) * base(i, j) * w
    return out


def patch_value(patch: SmoothPatch, x1, x2) -> np.ndarray:
    return patch_derivative(patch, x1, x2, (0, 0))


def c2_norm(patch: SmoothPatch, samples: int = 128) -> float:
    """``sum_{|order| <= 2} sup |D^order patch|`` on a ``samples^2`` grid."""
    t = (np.arange(samples) + 0.5) / samples
    X1, X2 = np.meshgrid(t, t, indexing="ij")
    total = 0.0
    for order in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
        total += float(np.max(np.abs(patch_derivative(patch, X1, X2, order))))
    return total


def normalize_c2(patch: SmoothPatch, target: float = 1.0) -> SmoothPatch:
    """Rescale so the C^2 norm is ``target`` (no-op for a zero patch)."""
    norm = c2_norm(patch)
    if norm == 0:
        return patch
    return patch.scaled(target / norm)


# ---------------------------------------------------------------------------
# cartoon images


@dataclass(frozen=True)
class CartoonImage:
    """``f = f0 + f1 * chi_B`` with ``B`` star-shaped."""

    region: RadiusProfile
    f0: SmoothPatch | None = None
    f1: SmoothPatch | None = None
    name: str = "cartoon"


def evaluate(image: CartoonImage, x1, x2) -> np.ndarray:
    """Pointwise image values (vectorized)."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    out = np.zeros(np.broadcast(x1, x2).shape)
    if image.f0 is not None:
        out = out + patch_value(image.f0, x1, x2)
    if image.f1 is not None:
        out = out + patch_value(image.f1, x1, x2) * contains(image.region, x1, x2)
    return out


def rasterize(image: CartoonImage, n: int, oversample: int = 8) -> np.ndarray:
    """Area-sampled pixel grid: ``grid[i1, i2]`` averages ``oversample^2``
    midpoint subsamples of the pixel ``[(i1, i1+1)/n] x [(i2, i2+1)/n]``.

    The grid convention throughout the package is axis 0 = x1, axis 1 = x2,
    pixel centers at ``(i + 0.5) / n``.
    """
    n = check_power_of_two(n, "n")
    oversample = check_int(oversample, "oversample", minimum=1)
    fine = n * oversample
    sub = (np.arange(fine) + 0.5) / fine
    out = np.empty((n, n))
    # row blocks keep the fine evaluation below ~8M points at a time
    block = max(1, (1 << 23) // fine // oversample)
    for start in range(0, n, block):
        stop = min(start + block, n)
        x1 = sub[start * oversample : stop * oversample]
        X1 = x1[:, None]
        X2 = sub[None, :]
        vals = evaluate(image, X1, X2)
        pooled = vals.reshape(stop - start, oversample, n, oversample).mean(axis=(1, 3))
        out[start:stop] = pooled
    return out


# ---------------------------------------------------------------------------
# standard scenes


def standard_scene(name: str) -> CartoonImage:
    """Built-in test scenes: ``disk``, ``star``, ``ellipse``.

    All use C^2-normalized patches: a windowed constant jump plus a gentle
    two-bump smooth background.
    """
    background = normalize_c2(
        SmoothPatch(
            kind="gaussian-bump-sum",
            bumps=((1.0, 0.3, 0.7, 0.18), (-0.6, 0.72, 0.3, 0.22)),
        ),
        target=0.5,
    )
    jump = normalize_c2(
        SmoothPatch(kind="polynomial", monomials=((0, 0, 1.0),), windowed=True)
    )
    if name == "disk":
        region = make_radius_profile(0.25, translate=(0.5, 0.5), nu=1.0)
    elif name == "star":
        region = make_radius_profile(
            0.25,
            harmonics=((0, 0), (0, 0), (0, 0), (0, 0), (0.05, 0.0), (0, 0), (0.0, 0.02)),
            translate=(0.5, 0.5),
            nu=10.0,
        )
    elif name == "ellipse":
        region = make_radius_profile(
            0.21,
            harmonics=((0, 0), (0.055, 0.0)),
            translate=(0.55, 0.42),
            nu=1.0,
        )
    else:
        raise ValueError(f"unknown scene {name!r}; try disk, star or ellipse")
    return CartoonImage(region=region, f0=background, f1=jump, name=name)
