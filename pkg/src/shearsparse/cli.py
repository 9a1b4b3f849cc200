"""Batch experiment runner.

Subcommands: ``run`` (execute one experiment config and write an artifact
manifest), ``summarize`` (join rate / frame / count reports from several
manifests into one table), ``verify-generators`` (decay-condition and
moment report for a generator description), ``dump-atoms`` (export single
atoms as grids for inspection).

Configs are INI files with sections ``[experiment]``, ``[tolerance]`` and
``[options]``; any value can be overridden on the command line with
``--set section.key=value`` (bare keys default to the experiment
section).  ``SHEARSPARSE_OUT`` overrides the output directory.

Determinism contract: identical config + seed produce byte-identical CSV
artifacts for any ``--workers`` count.  Parallel work is an ordered map
of pure tasks over a shared immutable coefficient set, so scheduling
cannot change any value.  All pseudorandomness derives from the root
seed through counter-based bit streams (one stream index per task), so
draws are independent of execution order too.  Wall-clock timings go to
an unmanifested sidecar (``timings.csv``), never into manifested CSVs.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .approximation import fit_rate, threshold_topN, ErrorCurve, wavelet_baseline
from .cartoon import rasterize
from .decay import (
    EdgeProbe,
    _rescaled_magnitudes,
    edge_coefficient_decay,
    significant_count,
    smooth_bessel_check,
)
from .errors import (
    ConfigInvalid,
    ExperimentFailed,
    ManifestCorrupt,
    NotAFrame,
    ShearsparseError,
)
from .generators import build_generators, verify_decay_conditions
from .plots import REFERENCE_GUIDES, loglog_svg
from .system import ShearletSystem, _m1_window, _m2_range, atom
from .transform import analyze, dual_reconstruct, estimate_frame_bounds
from .validation import check_power_of_two

__all__ = ["ExperimentConfig", "main", "parse_config", "run_experiment",
           "summarize"]

KINDS = ("nterm", "baseline-compare", "edge-decay", "bessel", "counting",
         "frame-bounds")


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Counter-based stream: draws depend on (seed, stream) only."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def ordered_parallel_map(fn, items, workers: int) -> list:
    """Map a pure function over items, gathering results in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    kind: str
    out: Path
    scene: Path | None = None
    generators: Path | None = None
    n: int = 64
    J: int = 2
    c: float = 1.0
    oversample: int = 8
    seed: int = 0
    tol: float = 1e-5
    max_iter: int = 500
    options: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigInvalid(
                "kind", f"must be one of {', '.join(KINDS)}; got {self.kind!r}")
        try:
            check_power_of_two(self.n, "n")
        except ValueError as exc:
            raise ConfigInvalid("n", str(exc)) from exc
        if self.J < 0:
            raise ConfigInvalid("J", f"must be >= 0, got {self.J}")
        if self.c <= 0:
            raise ConfigInvalid("c", f"must be positive, got {self.c}")
        if self.oversample < 1:
            raise ConfigInvalid("oversample",
                                f"must be >= 1, got {self.oversample}")
        if self.tol <= 0:
            raise ConfigInvalid("tolerance.tol",
                                f"must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigInvalid("tolerance.max_iter",
                                f"must be >= 1, got {self.max_iter}")
        needs_scene = self.kind in ("nterm", "baseline-compare", "edge-decay",
                                    "bessel", "counting")
        if needs_scene:
            if self.scene is None:
                raise ConfigInvalid("scene",
                                    f"required for kind {self.kind}")
            if not self.scene.is_file():
                raise ConfigInvalid("scene", f"file not found: {self.scene}")
        if self.generators is not None and not self.generators.is_file():
            raise ConfigInvalid("generators",
                                f"file not found: {self.generators}")
        return self


def _apply_overrides(cfg: configparser.ConfigParser, overrides) -> None:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigInvalid("--set", f"expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, _, name = key.strip().rpartition(".")
        section = section or "experiment"
        if section not in cfg:
            cfg[section] = {}
        cfg[section][name.strip()] = value.strip()


def parse_config(path, overrides=()) -> ExperimentConfig:
    path = Path(path)
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise ConfigInvalid("config", f"cannot read config file {path}")
    _apply_overrides(cfg, overrides)
    if "experiment" not in cfg:
        raise ConfigInvalid("experiment",
                            f"{path}: missing [experiment] section")
    exp = cfg["experiment"]
    tolerance = cfg["tolerance"] if "tolerance" in cfg else {}
    base = path.parent

    def _path(key):
        raw = exp.get(key, "").strip()
        return (base / raw) if raw else None

    try:
        out = Path(os.environ.get("SHEARSPARSE_OUT") or exp.get("out", "out"))
        if not out.is_absolute() and "SHEARSPARSE_OUT" not in os.environ:
            out = base / out
        config = ExperimentConfig(
            kind=exp.get("kind", ""),
            out=out,
            scene=_path("scene"),
            generators=_path("generators"),
            n=exp.getint("n", fallback=64),
            J=exp.getint("J", fallback=2),
            c=exp.getfloat("c", fallback=1.0),
            oversample=exp.getint("oversample", fallback=8),
            seed=exp.getint("seed", fallback=0),
            tol=float(tolerance.get("tol", "1e-5")),
            max_iter=int(tolerance.get("max_iter", "500")),
            options=dict(cfg["options"]) if "options" in cfg else {},
        )
    except ValueError as exc:
        raise ConfigInvalid("config", f"{path}: {exc}") from exc
    return config.validate()


def _opt_floats(config, key, default=None):
    raw = config.options.get(key, "").strip()
    if not raw:
        return default
    return [float(v) for v in raw.replace(",", " ").split()]


def _opt_ints(config, key, default=None):
    vals = _opt_floats(config, key, None)
    return default if vals is None else [int(v) for v in vals]


# ---------------------------------------------------------------------------
# experiment bodies


def _build(config: ExperimentConfig):
    if config.generators is not None:
        spec = sio.read_generator_spec(config.generators)
    else:
        from .generators import GeneratorSpec
        spec = GeneratorSpec.daubechies()
    gens = build_generators(spec)
    system = ShearletSystem(generators=gens, c=config.c, J=config.J)
    scene = sio.read_scene(config.scene) if config.scene else None
    return gens, system, scene


def _system_label(system, n: int) -> str:
    return f"shearlet-{system.generators.spec.name}-J{system.J}-n{n}"


def _experiment_echo(config: ExperimentConfig, system, extra=()) -> str:
    lines = [
        f"kind = {config.kind}",
        f"scene = {config.scene.name if config.scene else ''}",
        f"generator = {system.generators.spec.name}",
        f"n = {config.n}",
        f"J = {config.J}",
        f"c = {sio.fmt(config.c)}",
        f"oversample = {config.oversample}",
        f"seed = {config.seed}",
        f"tol = {sio.fmt(config.tol)}",
        f"max_iter = {config.max_iter}",
    ]
    lines.extend(extra)
    return "".join(line + "\n" for line in lines)


def _default_ns(total: int) -> list:
    top = max(8, min(total // 2, 4096))
    return [2 ** e for e in range(2, int(math.log2(top)) + 1)]


def _run_nterm(config, system, scene, workers):
    grid = rasterize(scene, config.n, oversample=config.oversample)
    coeffs = analyze(grid, system)
    Ns = _opt_ints(config, "ns", _default_ns(coeffs.total_count))
    inv_area = 1.0 / (config.n * config.n)

    def point(N):
        selected = threshold_topN(coeffs, N)
        rec = dual_reconstruct(selected, system, config.n, tol=config.tol,
                               max_iter=config.max_iter)
        err = float(np.sum((grid - rec.grid) ** 2)) * inv_area
        return N, err, rec.iterations

    results = ordered_parallel_map(point, Ns, workers)
    curve = ErrorCurve(
        points=tuple((N, err) for N, err, _ in results),
        metadata=f"nterm|{scene.name}|{_system_label(system, config.n)}",
        details=tuple({"reconstruction_iters": it, "wall_ms": 0.0}
                      for _, _, it in results),
    )
    report = fit_rate(curve, "pure-power")
    label = _system_label(system, config.n)
    sio.write_error_curve_csv(config.out / "errors.csv", curve)
    sio.write_timings_csv(config.out / "timings.csv", curve)
    sio.write_rate_report_csv(config.out / "rate.csv",
                              [(scene.name, label, report)])
    sio.write_coefficients(config.out / "coeffs.shsp", coeffs)
    loglog_svg(
        [(label, [p[0] for p in curve.points], [p[1] for p in curve.points])],
        title=f"N-term error: {scene.name}",
        references=REFERENCE_GUIDES,
        path=config.out / "curve.svg",
    )
    return ["errors.csv", "rate.csv", "coeffs.shsp", "curve.svg"], (
        f"ns = {' '.join(str(N) for N in Ns)}",
    )


def _run_baseline(config, system, scene, workers):
    Ns = _opt_ints(config, "ns", _default_ns(config.n * config.n))
    moments = system.generators.spec.name.removeprefix("db")
    vm = int(moments) if moments.isdigit() else 6
    curve = wavelet_baseline(scene, config.n, Ns, vanishing_moments=vm,
                             oversample=config.oversample)
    report = fit_rate(curve, "pure-power")
    label = f"wavelet-db{vm}-n{config.n}"
    sio.write_error_curve_csv(config.out / "errors.csv", curve)
    sio.write_timings_csv(config.out / "timings.csv", curve)
    sio.write_rate_report_csv(config.out / "rate.csv",
                              [(scene.name, label, report)])
    loglog_svg(
        [(label, [p[0] for p in curve.points], [p[1] for p in curve.points])],
        title=f"wavelet baseline: {scene.name}",
        references=REFERENCE_GUIDES,
        path=config.out / "curve.svg",
    )
    return ["errors.csv", "rate.csv", "curve.svg"], (
        f"ns = {' '.join(str(N) for N in Ns)}",
        f"vanishing_moments = {vm}",
    )


def _run_edge_decay(config, system, scene, workers):
    theta = _opt_floats(config, "theta", [0.0])[0]
    cube_j = _opt_ints(config, "cube_j", [config.J])[0]
    j_lo = _opt_ints(config, "j_lo", [0])[0]
    j_hi = _opt_ints(config, "j_hi", [config.J])[0]
    probe = EdgeProbe.at_angle(scene.region, theta, cube_j)
    table = edge_coefficient_decay(scene, system, config.n, probe,
                                   range(j_lo, j_hi + 1),
                                   oversample=config.oversample)
    sio.write_decay_table_csv(config.out / "decay.csv", table)
    summary = [(regime, sio.fmt(table.spread(regime, scales=3)))
               for regime in table.regimes]
    with open(config.out / "decay_summary.csv", "w", newline="") as fh:
        fh.write("regime,spread_top3\n")
        for regime, spread in summary:
            fh.write(f"{regime},{spread}\n")
    return ["decay.csv", "decay_summary.csv"], (
        f"theta = {sio.fmt(theta)}",
        f"cube_j = {cube_j}",
        f"slope = {sio.fmt(probe.slope)}",
        f"probe_point = {sio.fmt(probe.point[0])} {sio.fmt(probe.point[1])}",
        f"j_range = {j_lo}..{j_hi}",
        f"padding = {sio.fmt(probe.padding)}",
    )


def _run_bessel(config, system, scene, workers):
    if scene.f0 is None:
        raise ExperimentFailed("bessel", "scene has no smooth part (f0)")
    ratios = smooth_bessel_check(scene.f0, system, config.n, config.J,
                                 oversample=config.oversample)
    sio.write_bessel_csv(config.out / "bessel.csv", ratios)
    final = ((ratios[-1] - ratios[-2]) / ratios[-2]
             if len(ratios) > 1 and ratios[-2] else float("nan"))
    return ["bessel.csv"], (f"final_increment = {sio.fmt(final)}",)


def _run_counting(config, system, scene, workers):
    coeffs = analyze(rasterize(scene, config.n, oversample=config.oversample),
                     system)
    eps = _opt_floats(config, "epsilons", None)
    if eps is None:
        top = float(_rescaled_magnitudes(coeffs).max()) / 3.0
        eps = list(np.logspace(math.log10(top), math.log10(top) - 3.0, 13))
    report = significant_count(scene, system, config.n, eps, coeffs=coeffs)
    label = _system_label(system, config.n)
    sio.write_counts_csv(config.out / "counts.csv", report)
    sio.write_count_fit_csv(config.out / "count_fit.csv", scene.name, label,
                            report)
    loglog_svg(
        [(label, [1.0 / e for e in report.epsilons], list(report.counts))],
        title=f"significant coefficients: {scene.name}",
        xlabel="1/epsilon", ylabel="count",
        references=(("slope 2/3", -2.0 / 3.0, 0.0),),
        path=config.out / "counts.svg",
    )
    return ["counts.csv", "count_fit.csv", "counts.svg"], (
        f"epsilons = {' '.join(sio.fmt(e) for e in eps)}",
    )


def _run_frame_bounds(config, system, scene, workers):
    label = _system_label(system, config.n)
    try:
        result = estimate_frame_bounds(system, config.n, config.tol,
                                       seed=config.seed,
                                       max_iter=config.max_iter)
    except NotAFrame as exc:
        result = exc
    sio.write_frame_csv(config.out / "frame.csv", label, config.n, result)
    return ["frame.csv"], ()


_BODIES = {
    "nterm": _run_nterm,
    "baseline-compare": _run_baseline,
    "edge-decay": _run_edge_decay,
    "bessel": _run_bessel,
    "counting": _run_counting,
    "frame-bounds": _run_frame_bounds,
}


def run_experiment(config: ExperimentConfig, workers: int = 1) -> Path:
    """Execute one experiment; returns the manifest path."""
    config.validate()
    config.out.mkdir(parents=True, exist_ok=True)
    gens, system, scene = _build(config)
    try:
        artifacts, extra = _BODIES[config.kind](config, system, scene, workers)
    except (ConfigInvalid, ExperimentFailed):
        raise
    except ShearsparseError as exc:
        raise ExperimentFailed(config.kind, str(exc)) from exc
    echo = _experiment_echo(config, system, extra)
    (config.out / "experiment.txt").write_text(echo)
    artifacts = list(artifacts) + ["experiment.txt"]
    return sio.write_manifest(config.out, artifacts)


# ---------------------------------------------------------------------------
# summarize


_SUMMARY_COLUMNS = ("image", "system", "beta_shearlet", "beta_wavelet",
                    "delta_beta", "frame_lower", "frame_upper",
                    "count_exponent")


def _read_csv_rows(path: Path) -> list:
    import csv as _csv

    with open(path, newline="") as fh:
        return list(_csv.DictReader(fh))


def summarize(manifest_paths) -> tuple:
    """Join reports from several manifests; returns (csv_text, table_text).

    Verifies every manifest first (raises ManifestCorrupt on any
    mismatch), then collects rate, count and frame reports into one row
    per image.
    """
    images: dict = {}
    frames: dict = {}
    for man in manifest_paths:
        root, entries = sio.verify_manifest(man)
        names = {rel for rel, _, _ in entries}
        for rel in sorted(names):
            if not rel.endswith(".csv"):
                continue
            full = root / rel
            base = Path(rel).name
            if base in ("rate.csv", "rates.csv"):
                for row in _read_csv_rows(full):
                    rec = images.setdefault(row["image"], {})
                    beta = float(row["beta"])
                    if row["system"].startswith("wavelet"):
                        rec["beta_wavelet"] = beta
                    else:
                        rec["beta_shearlet"] = beta
                        rec["system"] = row["system"]
            elif base == "count_fit.csv":
                for row in _read_csv_rows(full):
                    rec = images.setdefault(row["image"], {})
                    rec["count_exponent"] = float(row["exponent"])
                    rec.setdefault("system", row["system"])
            elif base == "frame.csv":
                for row in _read_csv_rows(full):
                    frames[row["system"]] = (row["lower"], row["upper"])
    rows = []
    for image in sorted(images):
        rec = images[image]
        system = rec.get("system", "")
        lower, upper = frames.get(system, ("", ""))
        bs = rec.get("beta_shearlet")
        bw = rec.get("beta_wavelet")
        delta = (sio.fmt(bs - bw) if bs is not None and bw is not None else "")
        rows.append((
            image, system,
            sio.fmt(bs) if bs is not None else "",
            sio.fmt(bw) if bw is not None else "",
            delta, lower, upper,
            sio.fmt(rec["count_exponent"]) if "count_exponent" in rec else "",
        ))
    used = {row[1] for row in rows}
    for system in sorted(frames):
        if system not in used:
            lower, upper = frames[system]
            rows.append(("", system, "", "", "", lower, upper, ""))

    csv_lines = [",".join(_SUMMARY_COLUMNS)]
    csv_lines += [",".join(row) for row in rows]
    csv_text = "".join(line + "\n" for line in csv_lines)

    widths = [len(c) for c in _SUMMARY_COLUMNS]
    for row in rows:
        widths = [max(w, len(v)) for w, v in zip(widths, row)]
    header = "  ".join(c.ljust(w) for c, w in zip(_SUMMARY_COLUMNS, widths))
    rule = "  ".join("-" * w for w in widths)
    body = [
        "  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows
    ]
    table_text = "".join(line.rstrip() + "\n"
                         for line in [header, rule] + body)
    return csv_text, table_text


# ---------------------------------------------------------------------------
# other subcommands


def _cmd_verify_generators(args) -> int:
    spec = sio.read_generator_spec(args.spec)
    gens = build_generators(spec)
    moments = gens.moment_residuals()
    report = verify_decay_conditions(gens)
    print(f"generator {spec.name}: {len(spec.lowpass_taps)} taps, "
          f"cascade depth {spec.cascade_depth}")
    print(f"psi1 L2 norm  {sio.fmt(gens.psi_norm_l2())}")
    print(f"phi  L2 norm  {sio.fmt(gens.phi_norm_l2())}")
    for ell, residual in sorted(moments.items()):
        flag = "pass" if residual <= 1e-8 else "FAIL"
        print(f"moment residual ell={ell}  {residual:.3e}  {flag}")
    print("condition,region,fitted_exponent,C1,pass")
    for row in report.rows:
        print(f"{row.condition},{row.region},{sio.fmt(row.fitted_exponent)},"
              f"{sio.fmt(row.c1)},{'pass' if row.passed else 'fail'}")
    met = sum(1 for r in report.rows if r.passed)
    print(f"summary: {met}/{len(report.rows)} envelope conditions met, "
          f"C1 = {sio.fmt(report.c1)}")
    moments_ok = all(r <= 1e-8 for r in moments.values())
    if args.strict and not (moments_ok and report.passed):
        return 5
    return 0 if moments_ok else 5


def _cmd_dump_atoms(args) -> int:
    spec = sio.read_generator_spec(args.spec)
    gens = build_generators(spec)
    J = max(args.j, 0)
    system = ShearletSystem(generators=gens, c=args.c, J=J)
    m2_lo, m2_hi = _m2_range(system, args.j)
    m2 = args.m2 if args.m2 is not None else (m2_lo + m2_hi) // 2
    m1_lo, m1_hi = _m1_window(system, args.j, args.k, m2)
    m1 = args.m1 if args.m1 is not None else (m1_lo + m1_hi) // 2
    out = Path(os.environ.get("SHEARSPARSE_OUT", args.out))
    out.mkdir(parents=True, exist_ok=True)
    from .system import ShearletIndex

    written = []
    for cone in args.cones:
        idx = ShearletIndex(cone, args.j, args.k, m1, m2)
        a = atom(system, idx)
        grid = a.on_grid(args.n, oversample=args.oversample)
        stem = f"atom-{cone}-j{args.j}-k{args.k}-m{m1}_{m2}"
        sio.write_grid(out / f"{stem}.shsp", grid)
        sio.write_pgm16(out / f"{stem}.pgm", grid)
        box = a.support_box
        print(f"{cone}: support x1 [{sio.fmt(box[0][0])}, {sio.fmt(box[0][1])}]"
              f" x2 [{sio.fmt(box[1][0])}, {sio.fmt(box[1][1])}]"
              f" quadrature norm {sio.fmt(a.norm_quadrature())}")
        written += [f"{stem}.shsp", f"{stem}.pgm"]
    for name in written:
        print(out / name)
    return 0


# ---------------------------------------------------------------------------
# entry point


def _error_record(exc) -> str:
    record = {"status": "error", "error": type(exc).__name__,
              "message": str(exc)}
    for attr in ("field", "stage"):
        if hasattr(exc, attr):
            record[attr] = getattr(exc, attr)
    return json.dumps(record, sort_keys=True)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearsparse",
        description="sparse approximation experiments on cartoon images")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE")
    p_run.add_argument("--workers", type=int, default=1)

    p_sum = sub.add_parser("summarize", help="join manifests into one table")
    p_sum.add_argument("manifests", nargs="*")

    p_ver = sub.add_parser("verify-generators",
                           help="decay/moment report for a generator spec")
    p_ver.add_argument("spec")
    p_ver.add_argument("--strict", action="store_true",
                       help="nonzero exit if any envelope condition fails")

    p_dump = sub.add_parser("dump-atoms", help="export atoms as grids")
    p_dump.add_argument("spec")
    p_dump.add_argument("--j", type=int, required=True)
    p_dump.add_argument("--k", type=int, required=True)
    p_dump.add_argument("--m1", type=int, default=None)
    p_dump.add_argument("--m2", type=int, default=None)
    p_dump.add_argument("--n", type=int, default=256)
    p_dump.add_argument("--c", type=float, default=1.0)
    p_dump.add_argument("--oversample", type=int, default=4)
    p_dump.add_argument("--cones", nargs="+", default=["horizontal"],
                        choices=["horizontal", "vertical"])
    p_dump.add_argument("--out", default="atoms")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            config = parse_config(args.config, args.overrides)
            manifest = run_experiment(config, workers=max(1, args.workers))
            print(manifest)
            return 0
        if args.command == "summarize":
            csv_text, table_text = summarize(args.manifests)
            print(csv_text, end="")
            print()
            print(table_text, end="")
            return 0
        if args.command == "verify-generators":
            return _cmd_verify_generators(args)
        if args.command == "dump-atoms":
            return _cmd_dump_atoms(args)
        raise ConfigInvalid("command", f"unknown command {args.command!r}")
    except ConfigInvalid as exc:
        print(_error_record(exc), file=sys.stderr)
        return 2
    except ManifestCorrupt as exc:
        print(_error_record(exc), file=sys.stderr)
        return 3
    except ShearsparseError as exc:
        print(_error_record(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(_error_record(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
