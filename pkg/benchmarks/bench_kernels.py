"""Compare the compiled and pure-Python kernels.

Usage: python3 benchmarks/bench_kernels.py [--side 16] [--repeat 3]

Each kernel is run on identical inputs under both backends; the outputs are
checked for equality before timings are reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lozenge_cooling import kernels
from lozenge_cooling.hull import _hull_tables
from lozenge_cooling.lattice import make_hexagon_domain
from lozenge_cooling.rng import seed_state
from lozenge_cooling.sampling import sample_uniform
from lozenge_cooling.tiling import (_triangle_levels, _triangle_tables, energy, errorfree_reference,
                                    extremal_tiling, join, volume)


def best_of(repeat: int, func) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = func()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_cooling(mod, domain, steps: int, repeat: int):
    top = extremal_tiling(domain, "max")

    def go():
        h = top.h.copy()
        k = mod.CoolingKernel(h, domain.h0, domain.neighbour_table, domain.nnn_table,
                              domain.interior_index, energy(top), volume(top), seed_state(1))
        k.run(steps)
        return k.steps, h.tobytes()

    secs, (done, h) = best_of(repeat, go)
    return secs, done, h


def bench_monotone(mod, domain, updates: int, repeat: int):
    top, bot = extremal_tiling(domain, "max"), extremal_tiling(domain, "min")

    def go():
        a, b = top.h.copy(), bot.h.copy()
        mod.monotone_updates(a, b, domain.neighbour_table, domain.interior_index, seed_state(2), updates)
        return a.tobytes() + b.tobytes()

    secs, out = best_of(repeat, go)
    return secs, updates, out


def bench_hull(mod, domain, tilings, repeat: int):
    p, q, plain, _, lidx, loff, fixed = _hull_tables(domain)

    def go():
        outs = []
        for t in tilings:
            g = t.h.copy()
            mod.hull_up(g, domain.h0, p, q, *plain, lidx, loff, fixed)
            outs.append(g.tobytes())
        return b"".join(outs)

    secs, out = best_of(repeat, go)
    return secs, len(tilings), out


def bench_labels(mod, domain, tilings, repeat: int):
    tt = _triangle_tables(domain)
    masks = [(_triangle_levels(t, tt)[0] >= 1).view(np.uint8) for t in tilings]

    def go():
        return [mod.label_regions(tt.nbr, m, True)[0].tobytes() for m in masks]

    secs, out = best_of(repeat, go)
    return secs, len(masks), out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=20_000, help="cooling steps per run")
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; nothing to compare")

    domain = make_hexagon_domain(args.side)
    ref = errorfree_reference(domain)
    tilings = [join(sample_uniform(domain, s), ref) for s in range(5)]
    rows = []
    cases = [
        ("cooling steps", lambda m: bench_cooling(m, domain, args.steps, args.repeat)),
        ("CFTP updates", lambda m: bench_monotone(m, domain, 20 * args.steps, args.repeat)),
        ("hulls", lambda m: bench_hull(m, domain, tilings, args.repeat)),
        ("region labellings", lambda m: bench_labels(m, domain, tilings, args.repeat)),
    ]
    for name, fn in cases:
        c_secs, c_n, c_out = fn(kernels.compiled)
        p_secs, p_n, p_out = fn(kernels.py)
        if c_out != p_out or c_n != p_n:
            raise SystemExit(f"{name}: backends disagree")
        rows.append((name, c_n, c_n / c_secs, p_n / p_secs, p_secs / c_secs))

    print(f"hexagon side {args.side}, n = {domain.n_tiles}, best of {args.repeat}")
    print(f"{'kernel':<20}{'units':>10}{'cython/s':>14}{'python/s':>14}{'speedup':>10}")
    for name, n, c_rate, p_rate, speed in rows:
        print(f"{name:<20}{n:>10}{c_rate:>14.4g}{p_rate:>14.4g}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
