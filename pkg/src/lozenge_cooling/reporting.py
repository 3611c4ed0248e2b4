"""Experiments, statistics, power-law fits, CSV output and SVG rendering.

Every trial's randomness is derived from ``(seed, side, trial)`` only, so the
CSV output depends on nothing but the configuration: worker count and
scheduling order do not matter.  Wall-clock times are left blank unless
explicitly requested, to keep the files byte-identical between runs.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .cooling import run
from .lattice import Domain, make_hexagon_domain
from .rng import derive_seed
from .tiling import Tiling, energy, extremal_tiling, max_level, tile_levels, volume
from .sampling import sample_uniform

SCALING_COLUMNS = ("mode", "side", "n", "trial", "seed", "T", "final_energy", "wall_ms")
SUMMARY_COLUMNS = ("mode", "side", "n", "trials", "mean_T", "stderr_T")
OBSERVABLE_COLUMNS = ("side", "n", "trial", "V", "E", "H")

# Constants of the fitted curves c n^2 (worst case) and c n^1.5 (average case)
# quoted with the original experiments; reported for comparison only.
REFERENCE_CONSTANTS = {"worst": 6.689e-3, "average": 1.669e-2}


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class TrialResult:
    mode: str
    side: int
    n: int
    trial: int
    seed: int
    T: int
    final_energy: int
    initial_volume: int
    initial_energy: int
    initial_levels: int
    wall_ms: float | None = None


@dataclass(frozen=True)
class ScalingPoint:
    side: int
    n: int
    trials: int
    mean_T: float
    stderr_T: float
    mean_V0: float
    mean_E0: float


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    constant: float
    r2: float


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


# -- statistics ---------------------------------------------------------------

def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error (unbiased variance)."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        raise DegenerateInput("no values")
    if len(x) == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or len(x) != len(y) or np.ptp(x) == 0:
        raise DegenerateInput("need at least two distinct x values")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


def fit_power_law(points: Iterable[tuple[float, float]]) -> PowerLawFit:
    """Least squares on ``(log x, log y)``: ``y ~ constant * x ** exponent``."""
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateInput("a power-law fit needs at least three points")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DegenerateInput("power-law fits need positive data")
    lf = linear_fit(np.log(x), np.log(y))
    return PowerLawFit(lf.slope, math.exp(lf.intercept), lf.r2)


# -- trials -------------------------------------------------------------------

def trial_seed(seed: int, side: int, trial: int) -> int:
    return derive_seed(derive_seed(seed, side), trial)


_DOMAINS: dict[int, Domain] = {}


def _domain(side: int) -> Domain:
    if side not in _DOMAINS:
        _DOMAINS[side] = make_hexagon_domain(side)
    return _DOMAINS[side]


def _initial(mode: str, side: int, seed: int) -> Tiling:
    d = _domain(side)
    if mode == "worst":
        return extremal_tiling(d, "max")
    if mode == "average":
        return sample_uniform(d, derive_seed(seed, 0))
    raise ValueError(f"unknown mode {mode!r}")


def run_trial(args: tuple[str, int, int, int, bool]) -> TrialResult:
    mode, side, trial, seed, timing = args
    s = trial_seed(seed, side, trial)
    start = time.perf_counter()
    t0 = _initial(mode, side, s)
    tr = run(t0, derive_seed(s, 1), record=False)
    wall = (time.perf_counter() - start) * 1000 if timing else None
    return TrialResult(
        mode=mode, side=side, n=t0.domain.n_tiles, trial=trial, seed=s, T=tr.T,
        final_energy=int(tr.records[-1, 1]), initial_volume=volume(t0),
        initial_energy=energy(t0), initial_levels=max_level(t0), wall_ms=wall,
    )


def _map(func, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(func, tasks, chunksize=1))


def scaling_experiment(
    mode: Literal["worst", "average"],
    sides: Sequence[int],
    trials: int,
    seed: int,
    *,
    jobs: int = 1,
    timing: bool = False,
) -> tuple[list[ScalingPoint], list[TrialResult]]:
    """Cooling times from the maximal tiling (worst) or uniform samples (average)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if list(sides) != sorted(sides):
        raise ValueError("sides must be ascending")
    tasks = [(mode, k, j, seed, timing) for k in sides for j in range(trials)]
    # largest sides first so parallel workers finish together
    order = sorted(range(len(tasks)), key=lambda i: -tasks[i][1])
    done = _map(run_trial, [tasks[i] for i in order], jobs)
    results = sorted(done, key=lambda r: (r.side, r.trial))
    return summarize(results), results


def summarize(results: Sequence[TrialResult]) -> list[ScalingPoint]:
    points = []
    for side in sorted({r.side for r in results}):
        rs = [r for r in results if r.side == side]
        m, se = mean_stderr([r.T for r in rs])
        points.append(ScalingPoint(
            side=side, n=rs[0].n, trials=len(rs), mean_T=m, stderr_T=se,
            mean_V0=float(np.mean([r.initial_volume for r in rs])),
            mean_E0=float(np.mean([r.initial_energy for r in rs])),
        ))
    return points


def fit_scaling(points: Sequence[ScalingPoint]) -> PowerLawFit:
    return fit_power_law((p.n, p.mean_T) for p in points)


def _fmt(x: float) -> str:
    return repr(float(x))


def scaling_csv(results: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCALING_COLUMNS)
    for r in results:
        wall = "" if r.wall_ms is None else f"{r.wall_ms:.3f}"
        w.writerow([r.mode, r.side, r.n, r.trial, r.seed, r.T, r.final_energy, wall])
    return buf.getvalue()


def summary_csv(mode: str, points: Sequence[ScalingPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for p in points:
        w.writerow([mode, p.side, p.n, p.trials, _fmt(p.mean_T), _fmt(p.stderr_T)])
    return buf.getvalue()


# -- observables --------------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    side: int
    n: int
    trial: int
    V: int
    E: int
    H: int


def _observe(args: tuple[int, int, int]) -> Observation:
    side, trial, seed = args
    # same draw as the initial state of average-case trial (seed, side, trial)
    t = sample_uniform(_domain(side), derive_seed(trial_seed(seed, side, trial), 0))
    return Observation(side, t.domain.n_tiles, trial, volume(t), energy(t), max_level(t))


def observables_experiment(sides: Sequence[int], trials: int, seed: int, *,
                           jobs: int = 1) -> list[Observation]:
    """Volume, energy and number of levels ``H = max |tile level|`` of uniform samples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(k, j, seed) for k in sides for j in range(trials)]
    order = sorted(range(len(tasks)), key=lambda i: -tasks[i][0])
    done = _map(_observe, [tasks[i] for i in order], jobs)
    return sorted(done, key=lambda o: (o.side, o.trial))


def observations_from_trials(results: Sequence[TrialResult]) -> list[Observation]:
    """Observables of the initial states of average-case trials."""
    return [
        Observation(r.side, r.n, r.trial, r.initial_volume, r.initial_energy, r.initial_levels)
        for r in results if r.mode == "average"
    ]


def observables_csv(obs: Sequence[Observation]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OBSERVABLE_COLUMNS)
    for o in obs:
        w.writerow([o.side, o.n, o.trial, o.V, o.E, o.H])
    return buf.getvalue()


def observables_fits(obs: Sequence[Observation]) -> dict[str, LinearFit]:
    """Linear fits of mean V and mean E against n, and of mean H against log n."""
    sides = sorted({o.side for o in obs})
    n = np.array([next(o.n for o in obs if o.side == k) for k in sides], dtype=float)

    def means(attr: str) -> np.ndarray:
        return np.array([np.mean([getattr(o, attr) for o in obs if o.side == k]) for k in sides])

    return {
        "V_vs_n": linear_fit(n, means("V")),
        "E_vs_n": linear_fit(n, means("E")),
        "H_vs_log_n": linear_fit(np.log(n), means("H")),
    }


# -- SVG ----------------------------------------------------------------------

SQRT3_2 = math.sqrt(3) / 2
SHADES = ("#f2f2f2", "#9e9e9e", "#4a4a4a")  # by diagonal class
# level palette: negative levels cool, positive levels warm, 0 neutral
LEVEL_PALETTE = {
    -4: "#08306b", -3: "#2171b5", -2: "#6baed6", -1: "#c6dbef", 0: "#ffffff",
    1: "#fdd0a2", 2: "#fd8d3c", 3: "#d94801", 4: "#7f2704",
}


def level_colour(level: int) -> str:
    return LEVEL_PALETTE[max(-4, min(4, level))]


def embed(v: tuple[int, int], scale: float = 10.0) -> tuple[float, float]:
    """Planar position of a lattice vertex (y grows downwards, as in SVG)."""
    a, b = v
    return scale * (a + 0.5 * b), -scale * SQRT3_2 * b


def _lozenge_polygons(tiling: Tiling, scale: float):
    loz, levels = tile_levels(tiling)
    out = []
    for (t, c), lv in zip(loz, levels.tolist()):
        u = t.partner(c)
        p, q = sorted(set(t.vertices) & set(u.vertices))
        (a1,) = set(t.vertices) - {p, q}
        (a2,) = set(u.vertices) - {p, q}
        out.append(([embed(x, scale) for x in (a1, p, a2, q)], c, lv))
    return out


def _error_segments(tiling: Tiling, scale: float):
    d = tiling.domain
    idx = d.index
    h = tiling.h
    segs = []
    for t in sorted(d.triangles):
        for u, _ in t.neighbours():
            if t.kind == "U" or u not in d.triangles:
                p, q = sorted(set(t.vertices) & set(u.vertices))
                (a,) = set(t.vertices) - {p, q}
                (b,) = set(u.vertices) - {p, q}
                if h[idx[a]] != h[idx[b]]:
                    segs.append((embed(p, scale), embed(q, scale)))
    return segs


def _bbox(tiling: Tiling, scale: float) -> tuple[float, float, float, float]:
    pts = [embed(v, scale) for v in tiling.domain.vertices]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    return min(xs), min(ys), max(xs), max(ys)


def _group(tiling: Tiling, mode: str, scale: float, errors: bool, dx: float = 0.0) -> list[str]:
    if mode not in ("plain", "shaded", "height"):
        raise ValueError(f"unknown render mode {mode!r}")
    x0, y0, _, _ = _bbox(tiling, scale)
    parts = [f'<g transform="translate({dx - x0 + scale:.3f},{-y0 + scale:.3f})">']
    for pts, c, lv in _lozenge_polygons(tiling, scale):
        if mode == "plain":
            fill = "none"
        elif mode == "shaded":
            fill = SHADES[c]
        else:
            fill = level_colour(lv)
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        parts.append(
            f'<polygon class="lozenge" data-level="{lv}" points="{coords}" fill="{fill}" '
            f'stroke="#000000" stroke-width="{scale * 0.05:.3f}"/>'
        )
    if errors:
        for (ax, ay), (bx, by) in _error_segments(tiling, scale):
            parts.append(
                f'<line class="error" x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}" '
                f'stroke="#d62728" stroke-width="{scale * 0.15:.3f}"/>'
            )
    parts.append("</g>")
    return parts


def render_svg(tiling: Tiling, mode: str = "shaded", *, scale: float = 10.0,
               errors: bool = False) -> str:
    """SVG 1.1 document with one polygon per lozenge.

    ``plain`` draws outlines, ``shaded`` fills by diagonal direction (the cube
    picture) and ``height`` fills by tile level using :data:`LEVEL_PALETTE`.
    """
    x0, y0, x1, y1 = _bbox(tiling, scale)
    w, h = x1 - x0 + 2 * scale, y1 - y0 + 2 * scale
    body = _group(tiling, mode, scale, errors)
    return _document(w, h, body)


def render_strip(frames: Sequence[Tiling], mode: str = "height", *, scale: float = 4.0,
                 errors: bool = False) -> str:
    """Several tilings side by side, e.g. snapshots of one cooling run."""
    if not frames:
        raise ValueError("no frames")
    x0, y0, x1, y1 = _bbox(frames[0], scale)
    fw, fh = x1 - x0 + 2 * scale, y1 - y0 + 2 * scale
    body = []
    for k, t in enumerate(frames):
        body.extend(_group(t, mode, scale, errors, dx=k * fw))
    return _document(fw * len(frames), fh, body)


def _document(w: float, h: float, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w:.3f}" height="{h:.3f}" viewBox="0 0 {w:.3f} {h:.3f}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


__all__ = [
    "ScalingPoint", "PowerLawFit", "LinearFit", "TrialResult", "Observation", "DegenerateInput",
    "mean_stderr", "linear_fit", "fit_power_law", "trial_seed", "run_trial",
    "scaling_experiment", "summarize", "fit_scaling", "scaling_csv", "summary_csv",
    "observables_experiment", "observations_from_trials", "observables_csv", "observables_fits",
    "render_svg", "render_strip", "embed", "level_colour", "LEVEL_PALETTE",
    "SCALING_COLUMNS", "SUMMARY_COLUMNS", "OBSERVABLE_COLUMNS", "REFERENCE_CONSTANTS",
]
