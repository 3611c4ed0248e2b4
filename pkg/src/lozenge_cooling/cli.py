"""Command-line entry point.

Every subcommand writes its outputs to the paths it is given and refuses to
replace existing files unless ``--force`` is passed.  Next to the first output
the full configuration is echoed as ``<output>.config.json`` (for directories,
``config.json`` inside them), so any result can be regenerated.

Exit status: 0 on success, 1 on errors (including usage errors), 2 when a
verification suite finds a failing instance.  Errors are reported on stderr
as one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__

EXIT_OK, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2
SHAPES = ("honeycomb", "box", "triangle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_domain_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--side", type=_positive, help="size parameter of a --shape domain")
    g.add_argument("--domain", type=Path, help="domain file (format 'domain v1')")
    p.add_argument("--shape", choices=SHAPES, default="honeycomb",
                   help="honeycomb: hexagon of side K made of unit hexagons (n = 3(3K^2-3K+1)); "
                        "box: the K,K,K hexagon (n = 3K^2); triangle: triangle of K(K+1)/2 "
                        "unit hexagons (default: honeycomb)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lozenge-cooling", description="Zero-temperature cooling of lozenge tilings.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one cooling run")
    _add_domain_args(p, required=False)
    p.add_argument("--init", default="max",
                   help="max | uniform | errorfree | file:PATH (default: max)")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--step-limit", type=int, default=None, help="0 for unlimited (default: 100 n^2)")
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--trajectory", type=Path, help="trajectory CSV")
    p.add_argument("--svg-dir", type=Path, help="directory for snapshot SVGs")
    p.add_argument("--svg-mode", choices=("plain", "shaded", "height"), default="height")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("scale", help="cooling-time scaling experiment")
    p.add_argument("--mode", choices=("worst", "average"), required=True)
    p.add_argument("--sides", type=_int_list, required=True)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", type=Path, required=True, help="per-trial CSV")
    p.add_argument("--summary", type=Path, help="per-size summary CSV")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("exact", help="exact expected cooling times by enumeration")
    _add_domain_args(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--cap", type=_positive, default=None, help="maximum number of states")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("hull", help="triconvex hull of a tiling")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("verify", help="property suites")
    p.add_argument("--suite", choices=("lemmas", "lattice", "hull", "prop1", "sampler"), required=True)
    _add_domain_args(p)
    p.add_argument("--seed", type=_seed, help="required for randomized checks and sampling")
    p.add_argument("--instances", type=_positive, default=100_000,
                   help="instances for randomized suites (default: 100000)")
    p.add_argument("--samples", type=_positive, default=100_000,
                   help="uniform samples for the chi-square test (default: 100000)")
    p.add_argument("--cap", type=_positive, default=20_000,
                   help="largest state space checked exhaustively (default: 20000)")
    p.add_argument("--report", type=Path, help="write the report here as well")
    p.add_argument("--failures-dir", type=Path, default=Path("verify-failures"),
                   help="failing instances are saved here (default: ./verify-failures)")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("render", help="SVG picture of a tiling")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--mode", choices=("plain", "shaded", "height"), default="shaded")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--errors", action="store_true", help="overdraw error edges")
    p.add_argument("--scale", type=float, default=10.0)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("observables", help="volume, energy and levels of uniform samples")
    p.add_argument("--sides", type=_int_list, required=True)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--force", action="store_true")
    return parser


# -- helpers ------------------------------------------------------------------

def _domain(args):
    from .lattice import make_box_domain, make_hexagon_domain, make_triangle_domain, parse_domain

    if getattr(args, "domain", None) is not None:
        return parse_domain(args.domain.read_text())
    if args.side is None:
        raise UsageError("one of --side or --domain is required")
    if args.shape == "box":
        return make_box_domain(args.side, args.side, args.side)
    if args.shape == "triangle":
        return make_triangle_domain(args.side)
    return make_hexagon_domain(args.side)


def _domain_label(args) -> str:
    if getattr(args, "domain", None) is not None:
        return str(args.domain)
    return f"{args.shape}-{args.side}"


def _claim(paths: Sequence[Path | None], force: bool) -> None:
    for p in paths:
        if p is not None and p.exists() and not force:
            raise FileExistsError(f"{p} exists; pass --force to replace it")


def _echo_config(args, target: Path) -> None:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    cfg["version"] = __version__
    where = target / "config.json" if target.is_dir() else target.with_name(target.name + ".config.json")
    where.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- subcommands --------------------------------------------------------------

def cmd_run(args) -> int:
    from .cooling import run
    from .reporting import render_strip, render_svg
    from .rng import derive_seed
    from .sampling import SamplerConfig, initial_state

    _claim([args.trajectory], args.force)
    if args.svg_dir is not None and args.svg_dir.exists() and any(args.svg_dir.iterdir()) and not args.force:
        raise FileExistsError(f"{args.svg_dir} is not empty; pass --force to write into it")
    # the sampler and the chain draw from independent streams of one seed
    init = args.init
    if init.startswith("file:"):
        config = SamplerConfig(mode="file", path=init[5:])
        domain = _domain(args) if (args.side or args.domain) else None
    elif init in ("max", "uniform", "errorfree"):
        config = SamplerConfig(mode=init, seed=derive_seed(args.seed, 0))
        domain = _domain(args)
    else:
        raise UsageError(f"--init must be max, uniform, errorfree or file:PATH, not {init!r}")
    start = initial_state(domain, config)
    frames = []

    def hook(t, tiling):
        frames.append((t, tiling.copy()))

    snap = args.snapshot_every if args.svg_dir is not None else 0
    traj = run(start, derive_seed(args.seed, 1), args.step_limit,
               snapshot_every=snap, hook=hook if snap else None)
    if args.trajectory is not None:
        _write(args.trajectory, traj.to_csv())
        _echo_config(args, args.trajectory)
    if args.svg_dir is not None:
        args.svg_dir.mkdir(parents=True, exist_ok=True)
        if not frames:
            frames = [(0, start), (traj.T, None)]
        for t, tiling in frames:
            if tiling is not None:
                (args.svg_dir / f"step_{t:09d}.svg").write_text(render_svg(tiling, args.svg_mode))
        shots = [t for _, t in frames if t is not None]
        (args.svg_dir / "strip.svg").write_text(render_strip(shots, args.svg_mode))
        _echo_config(args, args.svg_dir)
    final = traj.records[-1]
    print(f"T={traj.T} stop={traj.stop_reason} energy={int(final[1])} volume={int(final[2])} "
          f"n={start.domain.n_tiles}")
    return EXIT_OK


def cmd_scale(args) -> int:
    from .reporting import (REFERENCE_CONSTANTS, fit_scaling, scaling_csv, scaling_experiment,
                            summary_csv)

    _claim([args.out, args.summary], args.force)
    points, results = scaling_experiment(args.mode, args.sides, args.trials, args.seed,
                                         jobs=args.jobs, timing=args.timing)
    _write(args.out, scaling_csv(results))
    _echo_config(args, args.out)
    if args.summary is not None:
        _write(args.summary, summary_csv(args.mode, points))
    for p in points:
        print(f"side={p.side} n={p.n} trials={p.trials} mean_T={p.mean_T:.1f} stderr={p.stderr_T:.1f}")
    if len(points) >= 3:
        fit = fit_scaling(points)
        ref = REFERENCE_CONSTANTS[args.mode]
        print(f"exponent={fit.exponent:.4f} constant={fit.constant:.4g} r2={fit.r2:.5f} "
              f"(reference constant {ref:g}, ratio {fit.constant / ref:.3g})")
    return EXIT_OK


def cmd_exact(args) -> int:
    from .exact import DEFAULT_CAP, count_by_determinant, enumerate_space, exact_csv, exact_times

    _claim([args.out], args.force)
    domain = _domain(args)
    cap = args.cap or DEFAULT_CAP
    total = count_by_determinant(domain)
    if total > cap:
        raise ValueError(f"{total} tilings exceed the cap of {cap}")
    space = enumerate_space(domain, cap)
    times = exact_times(space)
    _write(args.out, exact_csv(space, times))
    _echo_config(args, args.out)
    print(f"states={space.size} worst_T={float(times.worst):.6g} average_T={float(times.average):.6g}")
    return EXIT_OK


def cmd_hull(args) -> int:
    from .hull import triconvex_hull
    from .tiling import parse_tiling, serialize_tiling, volume

    _claim([args.out], args.force)
    t = parse_tiling(args.inp.read_text())
    h = triconvex_hull(t)
    _write(args.out, serialize_tiling(h))
    _echo_config(args, args.out)
    print(f"volume {volume(t)} -> {volume(h)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .exact import count_by_determinant, enumerate_space
    from .verify import EXHAUSTIVE_SUITES, RANDOMIZED_SUITES

    _claim([args.report], args.force)
    domain = _domain(args)
    label = _domain_label(args)
    total = count_by_determinant(domain)
    if total <= args.cap:
        space = enumerate_space(domain, args.cap)
        if args.suite == "sampler":
            if args.seed is None:
                raise UsageError("--seed is required for the sampler suite")
            report = EXHAUSTIVE_SUITES["sampler"](space, label, samples=args.samples, seed=args.seed)
        else:
            report = EXHAUSTIVE_SUITES[args.suite](space, label)
        mode = f"exhaustive over {space.size} tilings"
    else:
        if args.seed is None:
            raise UsageError(f"{total} tilings are too many to enumerate; randomized checks need --seed")
        report = RANDOMIZED_SUITES[args.suite](domain, args.instances, args.seed, label)
        mode = f"randomized, {args.instances} instances"
    lines = [f"suite {args.suite} on {label} (n={domain.n_tiles}, {mode})", *report.lines()]
    failing = [c for c in report.checks if c.gating and c.examples]
    if failing:
        args.failures_dir.mkdir(parents=True, exist_ok=True)
        for c in failing:
            for k, text in enumerate(c.examples):
                path = args.failures_dir / f"{args.suite}-{c.name}-{k}.tiling"
                path.write_text(text)
                lines.append(f"saved failing instance {path}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.report is not None:
        _write(args.report, text)
        _echo_config(args, args.report)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_render(args) -> int:
    from .reporting import render_svg
    from .tiling import parse_tiling

    _claim([args.out], args.force)
    t = parse_tiling(args.inp.read_text())
    _write(args.out, render_svg(t, args.mode, scale=args.scale, errors=args.errors))
    return EXIT_OK


def cmd_observables(args) -> int:
    from .reporting import observables_csv, observables_experiment, observables_fits

    _claim([args.out], args.force)
    obs = observables_experiment(args.sides, args.trials, args.seed, jobs=args.jobs)
    _write(args.out, observables_csv(obs))
    _echo_config(args, args.out)
    if len({o.side for o in obs}) >= 2:
        for name, fit in observables_fits(obs).items():
            print(f"{name}: slope={fit.slope:.4g} intercept={fit.intercept:.4g} r2={fit.r2:.5f}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run, "scale": cmd_scale, "exact": cmd_exact, "hull": cmd_hull,
    "verify": cmd_verify, "render": cmd_render, "observables": cmd_observables,
}


def _fail(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return EXIT_ERROR


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc))
    except (OSError, ValueError, RuntimeError) as exc:
        return _fail(type(exc).__name__, str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
