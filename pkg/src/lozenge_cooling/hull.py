"""Triconvexity, triconvex hulls and the potential phi = 4V + E.

A tiling is *triconvex* when, along every line of next-nearest-neighbour
vertices (the three families of :func:`lattice.nnn_lines`), the modulus of the
relative height has no interior dip: a vertex between ``x`` and ``y`` is never
lower than both.  Positive and negative parts are tested separately.

The triconvex hull is the smallest triconvex tiling above a given one in the
modulus order.  It is computed by alternating two monotone operators until
neither changes anything (the loop lives in the kernel backend):

* valley filling, which raises each vertex on a line to
  ``min(running max from the left, running max from the right)``;
* projection, which raises heights to the smallest valid height function
  above them by propagating the edge constraints
  ``h(p) >= h(p + u) - 1`` and ``h(p + u) >= h(p) - 2``.

Both operators are increasing and inflationary, and any triconvex tiling
above the input is a fixed point of both, so the limit is the least one.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from . import kernels
from .lattice import Domain, Vertex, add, triangles_around, NNN_STEPS
from .tiling import (
    Tiling,
    allowed_flips,
    apply_flip,
    energy,
    flips,
    island_components,
    island_levels,
    triangles_of,
    undo_flip,
    volume,
)


class HullNotFound(RuntimeError):
    pass


class NotClosed(ValueError):
    pass


class Frozen(ValueError):
    """No cooling-allowed flip exists."""


class MixedSignWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TriconvexityReport:
    is_triconvex: bool
    witness: tuple[int, int, Vertex, Vertex, Vertex] | None = None  # family, line, x, z, y

    def __bool__(self) -> bool:
        return self.is_triconvex


@dataclass(frozen=True)
class PotentialValue:
    V: int
    E: int

    @property
    def phi(self) -> int:
        return 4 * self.V + self.E


# -- triconvexity -------------------------------------------------------------

def _families(domain: Domain) -> list[list[np.ndarray]]:
    return domain.vertex_line_families()


def _dip(values: np.ndarray) -> tuple[int, int, int] | None:
    """First interior dip (x, z, y) of a non-negative sequence."""
    pre = np.maximum.accumulate(values)
    suf = np.maximum.accumulate(values[::-1])[::-1]
    bad = np.nonzero(values < np.minimum(pre, suf))[0]
    if len(bad) == 0:
        return None
    z = int(bad[0])
    x = int(np.argmax(values[:z]))
    y = z + 1 + int(np.argmax(values[z + 1 :]))
    return x, z, y


def is_triconvex(tiling: Tiling) -> TriconvexityReport:
    d = tiling.domain
    full = (tiling.h - d.h0) // 3
    verts = d.ext_vertices
    for fam, lines in enumerate(_families(d)):
        for k, line in enumerate(lines):
            r = full[line]
            for part in (np.maximum(r, 0), np.maximum(-r, 0)):
                hit = _dip(part)
                if hit is not None:
                    x, z, y = (verts[line[j]] for j in hit)
                    return TriconvexityReport(False, (fam, k, x, z, y))
    return TriconvexityReport(True)


# -- hull ---------------------------------------------------------------------

_TABLES: dict[Domain, tuple] = {}


def _hull_tables(domain: Domain) -> tuple:
    """Edge bounds (plain and mirrored), flattened lines and fixed vertices."""
    if domain not in _TABLES:
        h0 = domain.h0
        e = np.array(domain.domain_edges, dtype=np.int64).reshape(-1, 2)
        p, q = np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])
        lines = list(domain.lines)
        lidx = np.concatenate(lines).astype(np.int64) if lines else np.zeros(0, np.int64)
        loff = np.cumsum([0] + [len(x) for x in lines]).astype(np.int64)
        fixed = np.setdiff1d(np.arange(len(h0)), domain.interior_index).astype(np.int64)
        plain = (np.full(len(p), -2, np.int64), np.full(len(p), 1, np.int64))
        # reflecting h -> 2 h0 - h turns h[q] - h[p] in [-2, 1] into
        # g[q] - g[p] in [2 d0 - 1, 2 d0 + 2] with d0 = h0[q] - h0[p]
        d0 = h0[q] - h0[p]
        mirrored = (2 * d0 - 1, 2 * d0 + 2)
        _TABLES[domain] = (p, q, plain, mirrored, lidx, loff, fixed)
    return _TABLES[domain]


def _hull_up(domain: Domain, h: np.ndarray, mirrored: bool = False) -> np.ndarray:
    """Least triconvex valid height function above ``h`` (heights >= h0).

    With ``mirrored`` the heights are those of a reflected non-positive
    tiling and the edge rule is reversed accordingly.
    """
    p, q, plain, mirr, lidx, loff, fixed = _hull_tables(domain)
    lo, hi = mirr if mirrored else plain
    g = np.ascontiguousarray(h, dtype=np.int64).copy()
    if not kernels.hull_up(g, domain.h0, p, q, lo, hi, lidx, loff, fixed):
        raise HullNotFound("the hull would move a boundary vertex")
    return g


def sign_of(tiling: Tiling) -> int:
    """+1 / -1 for single-sign tilings, 0 for the reference, 2 when mixed."""
    r = tiling.rel
    pos, neg = bool(np.any(r > 0)), bool(np.any(r < 0))
    if pos and neg:
        return 2
    return 1 if pos else (-1 if neg else 0)


def triconvex_hull(tiling: Tiling) -> Tiling:
    """Smallest triconvex tiling above ``tiling`` in the modulus order.

    Mixed-sign input is handled by taking the hulls of the positive and
    negative parts separately; a :class:`MixedSignWarning` is issued because
    minimality is then not guaranteed.
    """
    d = tiling.domain
    h0 = d.h0
    s = sign_of(tiling)
    if s == 0:
        return tiling.copy()
    if s == 1:
        return Tiling(d, _hull_up(d, tiling.h), check=False)
    if s == -1:
        return Tiling(d, _mirror(d, _hull_up_mirrored(d, tiling.h)), check=False)
    warnings.warn("hull of a mixed-sign tiling", MixedSignWarning, stacklevel=2)
    up = _hull_up(d, np.maximum(tiling.h, h0))
    down = _mirror(d, _hull_up_mirrored(d, np.minimum(tiling.h, h0)))
    h = up + down - h0
    try:
        return Tiling(d, h, check=True)
    except ValueError as exc:
        raise HullNotFound("positive and negative hulls overlap") from exc


def _mirror(domain: Domain, h: np.ndarray) -> np.ndarray:
    return 2 * domain.h0 - h


def _hull_up_mirrored(domain: Domain, h: np.ndarray) -> np.ndarray:
    """Hull of a non-positive tiling, computed on the reflected heights."""
    return _hull_up(domain, _mirror(domain, h), mirrored=True)


# -- potential ----------------------------------------------------------------

def phi(tiling: Tiling) -> PotentialValue:
    return PotentialValue(volume(tiling), energy(tiling))


def phi_bar(tiling: Tiling) -> PotentialValue:
    return phi(triconvex_hull(tiling))


def flip_deltas(tiling: Tiling, functional: Literal["phi", "phi_bar"] = "phi",
                *, allowed_only: bool = True) -> dict[Vertex, int]:
    """Change of the functional under each (allowed) flip, applied and undone."""
    t = tiling.copy()
    base = phi(t).phi if functional == "phi" else phi_bar(t).phi
    sites = allowed_flips(t) if allowed_only else flips(t)
    out = {}
    for s in sites:
        tok = apply_flip(t, s)
        val = phi(t).phi if functional == "phi" else phi_bar(t).phi
        out[s.vertex] = val - base
        undo_flip(t, tok)
    return out


def expected_delta(tiling: Tiling, functional: Literal["phi", "phi_bar"] = "phi") -> Fraction:
    """Exact mean change of ``functional`` over the cooling-allowed flips."""
    deltas = flip_deltas(tiling, functional)
    if not deltas:
        raise Frozen("no cooling-allowed flip")
    return Fraction(sum(deltas.values()), len(deltas))


# -- boundary angles ----------------------------------------------------------

_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))  # counter-clockwise


def boundary_angles(cycle: list[Vertex]) -> tuple[int, int]:
    """(salient, reflex) angle counts of a closed clockwise boundary.

    Turns are measured in units of 60 degrees: a right turn of ``k`` units adds
    ``k`` salient angles, a left turn adds reflex ones.  For a simple closed
    clockwise curve the total turning is six units to the right, so
    ``salient - reflex == 6``.
    """
    if len(cycle) < 3:
        raise NotClosed("a boundary needs at least three vertices")
    dirs = []
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        step = (b[0] - a[0], b[1] - a[1])
        if step not in _DIRS:
            raise NotClosed(f"{a} and {b} are not adjacent")
        dirs.append(_DIRS.index(step))
    salient = reflex = 0
    for d_in, d_out in zip(dirs, dirs[1:] + dirs[:1]):
        turn = (d_out - d_in) % 6  # counter-clockwise units
        if turn == 3:
            raise NotClosed("boundary doubles back on itself")
        if turn > 3:
            salient += 6 - turn
        else:
            reflex += turn
    if salient - reflex != 6:
        raise NotClosed(f"turning number mismatch: {salient} salient, {reflex} reflex")
    return salient, reflex


# -- lemma helpers ------------------------------------------------------------

def is_single_island(tiling: Tiling) -> bool:
    return len(island_levels(tiling)) == 1


def has_equal_level_islands(tiling: Tiling) -> bool:
    levels = island_levels(tiling)
    return bool(levels) and len(set(levels)) == 1


def _drift_check(tiling: Tiling, functional: str, count: str) -> tuple[bool, Fraction, int]:
    deltas = flip_deltas(tiling, functional)  # type: ignore[arg-type]
    if not deltas:
        raise Frozen("no cooling-allowed flip")
    mean = Fraction(sum(deltas.values()), len(deltas))
    if count == "all":
        f = len(flips(tiling))
    elif count == "allowed":
        f = len(deltas)
    else:
        raise ValueError(count)
    return mean <= Fraction(-12, f), mean, f


def lemma1_holds(tiling: Tiling, count: Literal["all", "allowed"] = "all") -> tuple[bool, Fraction, int]:
    """``E[d phi] <= -12 / F``; returns (ok, E[d phi], F).

    The expectation is over the cooling-allowed flips (the chain's move set).
    ``F`` counts every performable flip by default; ``count="allowed"`` uses
    the allowed flips instead, under which the bound fails for an isolated
    one-hexagon island (``E[d phi] = -10`` with a single allowed flip).
    """
    return _drift_check(tiling, "phi", count)


def lemma2_sums(tiling: Tiling) -> tuple[int, int]:
    """(sum over allowed flips of w of d phi_bar, sum over allowed flips of
    hull(w) of d phi)."""
    lhs = sum(flip_deltas(tiling, "phi_bar").values())
    rhs = sum(flip_deltas(triconvex_hull(tiling), "phi").values())
    return lhs, rhs


def lemma3_holds(tiling: Tiling, count: Literal["all", "allowed"] = "all") -> tuple[bool, Fraction, int]:
    """``E[d phi_bar] <= -12 / F`` with the conventions of :func:`lemma1_holds`."""
    return _drift_check(tiling, "phi_bar", count)


def is_stick(triangles: set) -> bool:
    """Whether a triangle set is a row of aligned six-triangle hexagons."""
    verts = {v for t in triangles for v in t.vertices}
    centres = sorted(v for v in verts if all(t in triangles for t in triangles_around(v)))
    if not centres or 6 * len(centres) != len(triangles):
        return False
    covered = {t for c in centres for t in triangles_around(c)}
    if covered != triangles:
        return False
    if len(centres) == 1:
        return True
    step = (centres[1][0] - centres[0][0], centres[1][1] - centres[0][1])
    if step not in NNN_STEPS:
        return False
    return all(centres[i] == add(centres[0], step, i) for i in range(len(centres)))


def _island_tri_sets(tiling: Tiling, level: int) -> list[frozenset[int]]:
    return [frozenset(c.tolist()) for c in island_components(tiling, level)]


def merge_events(tiling: Tiling) -> list[tuple[Vertex, int, bool]]:
    """Allowed flips of ``tiling`` that merge islands of its hull.

    For every cooling-allowed flip, the hull islands (at the common island
    level) before and after the flip are compared; each island after the
    flip that contains two or more former hull islands is a merge.  Returns
    ``(vertex, number merged, all merged islands stick-shaped)``.
    """
    levels = set(island_levels(tiling))
    if len(levels) != 1:
        raise ValueError("merge analysis needs equal-level islands")
    (level,) = levels
    hull = triconvex_hull(tiling)
    before = _island_tri_sets(hull, level)
    out = []
    t = tiling.copy()
    for s in allowed_flips(t):
        tok = apply_flip(t, s)
        after = _island_tri_sets(triconvex_hull(t), level)
        undo_flip(t, tok)
        for isl in after:
            inside = [b for b in before if b <= isl]
            if len(inside) >= 2:
                sticks = all(is_stick(triangles_of(tiling, b)) for b in inside)
                out.append((s.vertex, len(inside), sticks))
    return out


__all__ = [
    "TriconvexityReport", "PotentialValue", "is_triconvex", "triconvex_hull", "sign_of",
    "phi", "phi_bar", "flip_deltas", "expected_delta", "boundary_angles",
    "island_levels", "is_single_island", "has_equal_level_islands",
    "lemma1_holds", "lemma2_sums", "lemma3_holds", "is_stick", "merge_events",
    "HullNotFound", "NotClosed", "Frozen", "MixedSignWarning",
]
