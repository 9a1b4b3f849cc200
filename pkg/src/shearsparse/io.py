"""File formats: grids, coefficient dumps, scene descriptions, CSV reports.

Binary formats
--------------
Raw grid (``.shsp``): 8-byte magic ``SHSPGRID``, then rows (u32 LE),
cols (u32 LE), then float64 LE values in row-major order.

Coefficient dump: 8-byte magic ``SHSPCOEF``, version (u32 LE), sampling
constant c (f64 LE), finest scale J (u32 LE), slab count (u32 LE); per
slab a header (cone u8, j u16 LE, k i32 LE, m1_lo i64, m1_hi i64,
m2_lo i64, m2_hi i64, hi exclusive) followed by the float64 LE slab data
in row-major (m1, m2) order.  Round-trips are bit exact.

PGM export is binary P5 with maxval 65535; sample bytes are big-endian
per the Netpbm convention.

Text formats
------------
Scene and generator descriptions are INI files (see ``read_scene`` /
``read_generator_spec`` for the grammar).  CSV reports print floats with
``repr``, which round-trips float64 exactly, so identical numbers yield
identical bytes.  The artifact manifest has one line per artifact:
``relative-path<TAB>byte-size<TAB>16-hex-digit blake2b hash``.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import struct
from pathlib import Path

import numpy as np

from .cartoon import CartoonImage, RadiusProfile, SmoothPatch, make_radius_profile
from .errors import ManifestCorrupt
from .generators import GeneratorSpec
from .transform import CoefficientSet, Slab

__all__ = [
    "read_coefficients", "read_generator_spec", "read_grid", "read_pgm16",
    "read_scene", "verify_manifest", "write_bessel_csv", "write_coefficients",
    "write_count_fit_csv", "write_counts_csv", "write_decay_table_csv",
    "write_error_curve_csv", "write_frame_csv", "write_generator_spec",
    "write_grid", "write_manifest", "write_per_cube_csv", "write_pgm16",
    "write_rate_report_csv", "write_scene", "write_timings_csv",
    "artifact_hash", "fmt",
]

GRID_MAGIC = b"SHSPGRID"
COEF_MAGIC = b"SHSPCOEF"
COEF_VERSION = 1
_CONE_CODE = {"coarse": 0, "horizontal": 1, "vertical": 2}
_CODE_CONE = {v: k for k, v in _CONE_CODE.items()}


def fmt(x) -> str:
    """Full-precision deterministic float rendering (exact round-trip)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# ---------------------------------------------------------------------------
# grids


def write_grid(path, grid) -> None:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError("grid must be 2-D")
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<II", grid.shape[0], grid.shape[1]))
        fh.write(grid.astype("<f8").tobytes())


def read_grid(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != GRID_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:8]!r}")
    rows, cols = struct.unpack("<II", raw[8:16])
    data = np.frombuffer(raw[16:], dtype="<f8")
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values, got {data.size}")
    return data.reshape(rows, cols).copy()


def write_pgm16(path, grid, lo=None, hi=None) -> None:
    """16-bit binary PGM; values mapped linearly from [lo, hi] to 0..65535."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError("grid must be 2-D")
    lo = float(grid.min()) if lo is None else float(lo)
    hi = float(grid.max()) if hi is None else float(hi)
    if hi > lo:
        scaled = np.clip((grid - lo) / (hi - lo), 0.0, 1.0)
    else:
        scaled = np.zeros_like(grid)
    words = np.round(scaled * 65535.0).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{grid.shape[1]} {grid.shape[0]}\n65535\n".encode())
        fh.write(words.tobytes())


def read_pgm16(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(f) for f in fields[1:])
    if maxval != 65535:
        raise ValueError(f"{path}: expected 16-bit maxval, got {maxval}")
    data = np.frombuffer(raw[pos + 1:], dtype=">u2", count=rows * cols)
    return data.reshape(rows, cols).astype(np.float64) / 65535.0


# ---------------------------------------------------------------------------
# coefficient dumps


def write_coefficients(path, coeffs: CoefficientSet) -> None:
    slabs = list(coeffs.canonical_slabs())
    with open(path, "wb") as fh:
        fh.write(COEF_MAGIC)
        fh.write(struct.pack("<I", COEF_VERSION))
        fh.write(struct.pack("<dII", coeffs.system.c, coeffs.system.J,
                             len(slabs)))
        for slab in slabs:
            fh.write(struct.pack(
                "<BHi4q", _CONE_CODE[slab.cone], slab.j,
                slab.k, slab.m1_lo, slab.m1_lo + slab.data.shape[0],
                slab.m2_lo, slab.m2_lo + slab.data.shape[1]))
            fh.write(np.ascontiguousarray(slab.data, dtype="<f8").tobytes())


def read_coefficients(path, system) -> CoefficientSet:
    """Rebuild a coefficient set; the system must match the stored (c, J)."""
    with open(path, "rb") as fh:
        if fh.read(8) != COEF_MAGIC:
            raise ValueError(f"{path}: bad magic")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != COEF_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        c, J, count = struct.unpack("<dII", fh.read(16))
        if c != system.c or J != system.J:
            raise ValueError(
                f"{path}: dump was written for c={c}, J={J}; "
                f"system has c={system.c}, J={system.J}")
        slabs = {}
        header = struct.Struct("<BHi4q")
        for _ in range(count):
            cone_code, j, k, m1_lo, m1_hi, m2_lo, m2_hi = header.unpack(
                fh.read(header.size))
            cone = _CODE_CONE[cone_code]
            shape = (m1_hi - m1_lo, m2_hi - m2_lo)
            data = np.frombuffer(
                fh.read(8 * shape[0] * shape[1]), dtype="<f8").reshape(shape)
            slabs[(cone, j, k)] = Slab(cone=cone, j=j, k=k, m1_lo=m1_lo,
                                       m2_lo=m2_lo, data=data.copy())
    return CoefficientSet(system=system, slabs=slabs)


# ---------------------------------------------------------------------------
# scenes and generator specs


def _pairs(text: str, width: int):
    groups = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = tuple(float(v) for v in chunk.split())
        if len(vals) != width:
            raise ValueError(f"expected groups of {width} numbers, got {chunk!r}")
        groups.append(vals)
    return tuple(groups)


def _join_groups(groups) -> str:
    return "; ".join(" ".join(fmt(v) for v in g) for g in groups)


def write_scene(path, image: CartoonImage) -> None:
    cfg = configparser.ConfigParser()
    cfg["scene"] = {"name": image.name}
    r = image.region
    cfg["region"] = {
        "base_radius": fmt(r.base_radius),
        "harmonics": _join_groups(r.harmonics),
        "translate": " ".join(fmt(v) for v in r.translate),
        "rho0": fmt(r.rho0),
        "nu": fmt(r.nu),
    }
    for key, patch in (("f0", image.f0), ("f1", image.f1)):
        if patch is None:
            continue
        cfg[key] = {
            "kind": patch.kind,
            "windowed": str(bool(patch.windowed)).lower(),
            "monomials": _join_groups(patch.monomials),
            "bumps": _join_groups(patch.bumps),
        }
    with open(path, "w") as fh:
        cfg.write(fh)


def _read_patch(section) -> SmoothPatch:
    return SmoothPatch(
        kind=section.get("kind"),
        windowed=section.getboolean("windowed", fallback=True),
        monomials=_pairs(section.get("monomials", ""), 3),
        bumps=_pairs(section.get("bumps", ""), 4),
    )


def read_scene(path) -> CartoonImage:
    """Parse a scene description.

    Grammar (INI): section ``[region]`` with ``base_radius``, ``harmonics``
    (semicolon-separated ``cos sin`` pairs), ``translate`` (two numbers),
    ``rho0``, ``nu``; optional ``[f0]`` / ``[f1]`` patch sections with
    ``kind``, ``windowed``, ``monomials`` (``a b coef`` triples) and
    ``bumps`` (``amp cx cy sigma`` quadruples); optional ``[scene] name``.
    The region is re-validated on load.
    """
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read or "region" not in cfg:
        raise ValueError(f"{path}: not a scene description (no [region])")
    reg = cfg["region"]
    region = make_radius_profile(
        reg.getfloat("base_radius"),
        harmonics=_pairs(reg.get("harmonics", ""), 2),
        translate=tuple(float(v) for v in reg.get("translate", "0.5 0.5").split()),
        nu=reg.getfloat("nu", fallback=1.0),
        rho0=reg.getfloat("rho0", fallback=0.45),
    )
    f0 = _read_patch(cfg["f0"]) if "f0" in cfg else None
    f1 = _read_patch(cfg["f1"]) if "f1" in cfg else None
    name = cfg.get("scene", "name", fallback="cartoon")
    return CartoonImage(region=region, f0=f0, f1=f1, name=name)


def write_generator_spec(path, spec: GeneratorSpec) -> None:
    cfg = configparser.ConfigParser()
    cfg["generator"] = {
        "name": spec.name,
        "taps": " ".join(fmt(t) for t in spec.lowpass_taps),
        "cascade_depth": str(spec.cascade_depth),
        "alpha": fmt(spec.alpha),
        "gamma": fmt(spec.gamma),
    }
    with open(path, "w") as fh:
        cfg.write(fh)


def read_generator_spec(path) -> GeneratorSpec:
    """Parse a generator description.

    Grammar (INI): section ``[generator]`` with either
    ``family = daubechies`` plus ``vanishing_moments``, or explicit
    ``taps`` (whitespace-separated lowpass filter); optional
    ``cascade_depth``, ``alpha``, ``gamma``, ``name``.
    """
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read or "generator" not in cfg:
        raise ValueError(f"{path}: not a generator description")
    g = cfg["generator"]
    depth = g.getint("cascade_depth", fallback=12)
    alpha = g.getfloat("alpha", fallback=5.5)
    gamma = g.getfloat("gamma", fallback=4.0)
    if g.get("taps", "").strip():
        return GeneratorSpec(
            lowpass_taps=tuple(float(t) for t in g.get("taps").split()),
            cascade_depth=depth, alpha=alpha, gamma=gamma,
            name=g.get("name", "custom"))
    family = g.get("family", "daubechies")
    if family != "daubechies":
        raise ValueError(f"{path}: unknown generator family {family!r}")
    return GeneratorSpec.daubechies(
        vanishing_moments=g.getint("vanishing_moments", fallback=6),
        cascade_depth=depth, alpha=alpha, gamma=gamma)


# ---------------------------------------------------------------------------
# CSV reports


def _write_csv(path, header, rows) -> None:
    # newline='' + explicit \n keeps bytes platform-independent
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_error_curve_csv(path, curve) -> None:
    rows = []
    for i, (N, err) in enumerate(curve.points):
        iters = curve.details[i]["reconstruction_iters"] if curve.details else 0
        rows.append((N, fmt(err), iters))
    _write_csv(path, ("N", "squared_error", "reconstruction_iters"), rows)


def write_timings_csv(path, curve) -> None:
    """Wall-clock sidecar; not manifested, so timing noise never breaks
    the byte-identical determinism contract."""
    rows = []
    for i, (N, _) in enumerate(curve.points):
        wall = curve.details[i].get("wall_ms", 0.0) if curve.details else 0.0
        rows.append((N, fmt(wall)))
    _write_csv(path, ("N", "wall_ms"), rows)


def write_rate_report_csv(path, rows) -> None:
    """One row per (image, system, model) fit."""
    out = [(image, system, rep.model, fmt(rep.beta), fmt(rep.log_exponent),
            fmt(rep.residual), rep.fit_range[0], rep.fit_range[1])
           for image, system, rep in rows]
    _write_csv(path, ("image", "system", "model", "beta", "log_exponent",
                      "residual", "fit_lo", "fit_hi"), out)


def write_decay_table_csv(path, table) -> None:
    rows = [(r.j, r.k, r.regime, r.n_hits, fmt(r.max_coeff),
             fmt(r.shear_offset), fmt(r.ratio)) for r in table.rows]
    _write_csv(path, ("j", "k", "regime", "n_hits", "max_coeff",
                      "shear_offset", "ratio"), rows)


def write_counts_csv(path, report) -> None:
    _write_csv(path, ("epsilon", "count"),
               [(fmt(e), c) for e, c in zip(report.epsilons, report.counts)])


def write_count_fit_csv(path, image, system, report) -> None:
    _write_csv(path, ("image", "system", "exponent", "exponent_with_log",
                      "log_coefficient"),
               [(image, system, fmt(report.exponent),
                 fmt(report.exponent_with_log), fmt(report.log_coefficient))])


def write_bessel_csv(path, ratios) -> None:
    _write_csv(path, ("scale", "weighted_sum_over_curvature_norm"),
               [(j, fmt(r)) for j, r in enumerate(ratios)])


def write_frame_csv(path, system_label, n, result) -> None:
    """``result`` is a FrameBounds, or a NotAFrame error instance."""
    if hasattr(result, "lower"):
        row = (system_label, n, "frame", fmt(result.lower), fmt(result.upper),
               fmt(result.residual_lower), fmt(result.residual_upper))
    else:
        upper = result.upper if result.upper is not None else float("nan")
        res = (result.residual_upper if result.residual_upper is not None
               else float("nan"))
        row = (system_label, n, "not-a-frame", "", fmt(upper), "", fmt(res))
    _write_csv(path, ("system", "n", "status", "lower", "upper",
                      "residual_lower", "residual_upper"), [row])


def write_per_cube_csv(path, report) -> None:
    rows = [(r.j, r.k, r.intersecting, r.significant,
             fmt(r.shear_offset), fmt(r.count_ratio)) for r in report.rows]
    _write_csv(path, ("j", "k", "intersecting", "significant", "shear_offset",
                      "count_ratio"), rows)


# ---------------------------------------------------------------------------
# manifests


def artifact_hash(path) -> str:
    digest = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(root, rel_paths, name="manifest.txt") -> Path:
    """List artifacts as ``relpath<TAB>bytes<TAB>hash`` lines."""
    root = Path(root)
    lines = []
    for rel in sorted(str(p) for p in rel_paths):
        full = root / rel
        lines.append(f"{rel}\t{full.stat().st_size}\t{artifact_hash(full)}")
    target = root / name
    target.write_text("".join(line + "\n" for line in lines))
    return target


def verify_manifest(path):
    """Check every listed artifact; returns (root, [(rel, size, hash)])."""
    path = Path(path)
    root = path.parent
    entries = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestCorrupt(f"{path}: {exc}") from exc
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ManifestCorrupt(f"{path}:{ln}: expected 3 tab-separated "
                                  f"fields, got {len(parts)}")
        rel, size_text, digest = parts
        full = root / rel
        if not full.is_file():
            raise ManifestCorrupt(f"{path}:{ln}: missing artifact {rel}")
        size = full.stat().st_size
        if str(size) != size_text:
            raise ManifestCorrupt(
                f"{path}:{ln}: {rel} is {size} bytes, manifest says {size_text}")
        actual = artifact_hash(full)
        if actual != digest:
            raise ManifestCorrupt(
                f"{path}:{ln}: {rel} hash {actual} != manifest {digest}")
        entries.append((rel, size, digest))
    return root, entries
