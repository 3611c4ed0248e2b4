"""Tilings as height functions.

A tiling of a domain is stored through the integer lift height
``h = phi_1 + phi_2 + phi_3`` of every vertex: along a tiling edge in direction
``+u_k`` the height rises by 1, across a lozenge diagonal in direction ``+u_k``
it drops by 2.  The matching is recovered from the heights (an edge is a
diagonal iff its height difference is 2), so heights are the single source of
truth.  The exterior of the domain is frozen at the reference heights.

Relative heights ``(h - h0) / 3`` count stacked cubes above the error-free
reference ``h0``; tile levels are lozenge-centre heights relative to the
reference tile height.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal

import numpy as np

from . import kernels
from .lattice import (
    Domain,
    Triangle,
    Vertex,
    add,
    parse_domain,
    residue,
    serialize_domain,
    MalformedLine,
)


class TilingError(ValueError):
    pass


class ReferenceNotErrorFree(TilingError):
    pass


class InconsistentLift(TilingError):
    pass


class OpenErrorPath(TilingError):
    pass


class DomainMismatch(TilingError):
    pass


class StaleSite(TilingError):
    pass


@dataclass(frozen=True)
class FlipSite:
    vertex: Vertex
    upward: bool  # volume +1 (adds a cube away from the reference)
    delta_e: int
    dh: int  # height change at the vertex, +3 or -3

    @property
    def delta_v(self) -> int:
        return 1 if self.upward else -1


@dataclass
class Region:
    kind: Literal["island", "hole"]
    level: int
    area: int
    tiles: frozenset[int]
    boundary: list[Vertex]  # closed clockwise vertex cycle, first vertex not repeated


@dataclass
class IslandDecomposition:
    regions: list[Region] = field(default_factory=list)
    volume: int = 0

    @property
    def islands(self) -> list[Region]:
        return [r for r in self.regions if r.kind == "island"]

    @property
    def holes(self) -> list[Region]:
        return [r for r in self.regions if r.kind == "hole"]


class Tiling:
    """Mutable tiling state: the heights of every (domain and ghost) vertex.

    Energy, volume and the flip-site index are cached lazily and kept up to
    date by :func:`apply_flip`.
    """

    __slots__ = ("domain", "h", "_energy", "_volume", "_sites")

    def __init__(self, domain: Domain, heights, *, check: bool = True):
        self.domain = domain
        h = np.array(heights, dtype=np.int64)
        if h.shape != (len(domain.ext_vertices),):
            raise TilingError("height vector does not match domain")
        self.h = h
        self._energy = None
        self._volume = None
        self._sites = None
        if check:
            check_heights(domain, h)

    def copy(self) -> "Tiling":
        t = Tiling.__new__(Tiling)
        t.domain = self.domain
        t.h = self.h.copy()
        t._energy = self._energy
        t._volume = self._volume
        t._sites = None if self._sites is None else dict(self._sites)
        return t

    def key(self) -> bytes:
        return self.h[: self.domain.n_vertices].tobytes()

    def __eq__(self, other):
        if not isinstance(other, Tiling):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.h, other.h)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Tiling(n={self.domain.n_tiles}, E={energy(self)}, V={volume(self)})"

    @property
    def rel(self) -> np.ndarray:
        """Signed relative heights (cubes above the reference) of domain vertices."""
        nv = self.domain.n_vertices
        return (self.h[:nv] - self.domain.h0[:nv]) // 3

    def height(self, v: Vertex) -> int:
        return int(self.h[self.domain.index[v]])


# -- validity and conversions -------------------------------------------------

def check_heights(domain: Domain, h: np.ndarray) -> None:
    h0 = domain.h0
    nv = domain.n_vertices
    if np.any((h - h0) % 3):
        raise InconsistentLift("heights break the 3-colouring congruence")
    if np.any(h[nv:] != h0[nv:]):
        raise InconsistentLift("exterior heights differ from the reference")
    bidx = [domain.index[v] for v in domain.boundary_vertices]
    if np.any(h[bidx] != h0[bidx]):
        raise InconsistentLift("boundary heights differ from the reference")
    for p, q in domain.domain_edges:
        if h[q] - h[p] not in (1, -2):
            raise InconsistentLift(f"edge {domain.ext_vertices[p]}->{domain.ext_vertices[q]}")
    for t in domain.triangles:
        if _diagonal_class(domain, h, t) is None:
            raise InconsistentLift(f"triangle {tuple(t)} has no single diagonal")


def _edges_plus(t: Triangle) -> tuple[tuple[Vertex, Vertex, int], ...]:
    """The three edges of ``t`` oriented along +u, with their direction class."""
    a, b = t.a, t.b
    if t.kind == "U":
        return (((a, b), (a + 1, b), 0), ((a, b + 1), (a, b), 1), ((a + 1, b), (a, b + 1), 2))
    return (
        ((a, b + 1), (a + 1, b + 1), 0),
        ((a + 1, b + 1), (a + 1, b), 1),
        ((a + 1, b), (a, b + 1), 2),
    )


def _diagonal_class(domain: Domain, h, t: Triangle):
    idx = domain.index
    found = [c for p, q, c in _edges_plus(t) if h[idx[q]] - h[idx[p]] == -2]
    return found[0] if len(found) == 1 else None


def matching(tiling: Tiling) -> dict[Triangle, int]:
    """Direction class of the shared (diagonal) edge for every triangle."""
    return {t: _diagonal_class(tiling.domain, tiling.h, t) for t in tiling.domain.triangles}


def lozenges(tiling: Tiling) -> list[tuple[Triangle, int]]:
    """Lozenges as (up triangle, diagonal class), sorted."""
    tt = _triangle_tables(tiling.domain)
    _, cls = _triangle_levels(tiling, tt)
    up = np.nonzero(tt.up_rank >= 0)[0]
    return [(tt.tris[i], c) for i, c in zip(up.tolist(), cls[up].tolist())]


def compute_heights(domain: Domain, match: dict[Triangle, int]) -> np.ndarray:
    """Integrate the lift of a perfect matching, anchored at the base vertex."""
    for t, c in match.items():
        u = t.partner(c)
        if u not in domain.triangles or match.get(u) != c:
            raise TilingError(f"not a perfect matching at {tuple(t)}")
    if set(match) != set(domain.triangles):
        raise TilingError("matching does not cover the domain")
    idx = domain.index
    adj: dict[int, list[tuple[int, int]]] = {}
    for t in domain.triangles:
        diag = match[t]
        for p, q, c in _edges_plus(t):
            step = -2 if c == diag else 1
            ip, iq = idx[p], idx[q]
            adj.setdefault(ip, []).append((iq, step))
            adj.setdefault(iq, []).append((ip, -step))
    h = domain.h0.copy()
    start = idx[domain.base_vertex]
    seen = {start: 0}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j, step in adj[i]:
            val = seen[i] + step
            if j in seen:
                if seen[j] != val:
                    raise InconsistentLift("lift does not close around a triangle")
            else:
                seen[j] = val
                queue.append(j)
    for j, val in seen.items():
        h[j] = val
    if seen[start] != 0:
        raise InconsistentLift("base vertex not at height 0")
    return h


def from_matching(domain: Domain, match: dict[Triangle, int]) -> Tiling:
    return Tiling(domain, compute_heights(domain, match))


def errorfree_reference(domain: Domain) -> Tiling:
    """The reference tiling: every hexagon tiled by three lozenges meeting at
    its centre with the same chirality."""
    match = {}
    for c in domain.hex_centers:
        for k, (t1, t2) in enumerate(_ref_pairs(c)):
            if t1 in domain.triangles:
                cls = next(cc for u, cc in t1.neighbours() if u == t2)
                match[t1] = cls
                match[t2] = cls
    t = from_matching(domain, match)
    if not np.array_equal(t.h, domain.h0):
        raise ReferenceNotErrorFree("reference heights disagree with the decomposition")
    e = energy(t)
    if e != 0:
        raise ReferenceNotErrorFree(f"reference tiling has {e} errors")
    return t


def _ref_pairs(c: Vertex):
    from .lattice import reference_lozenges

    return reference_lozenges(c)


# -- energy, volume, levels ---------------------------------------------------

def energy(tiling: Tiling) -> int:
    """Number of errors: edges whose two lozenges are translates of each other.

    Two lozenges across an edge are translates iff the apexes opposite that
    edge have different heights.
    """
    if tiling._energy is None:
        ap = tiling.domain.apex_pairs
        tiling._energy = int(np.count_nonzero(tiling.h[ap[:, 0]] != tiling.h[ap[:, 1]]))
    return tiling._energy


def volume(tiling: Tiling) -> int:
    """Number of flips separating the tiling from the reference."""
    if tiling._volume is None:
        tiling._volume = int(np.abs(tiling.rel).sum())
    return tiling._volume


def tile_levels(tiling: Tiling) -> tuple[list[tuple[Triangle, int]], np.ndarray]:
    """Lozenges and their levels (centre height minus reference tile height)."""
    tt = _triangle_tables(tiling.domain)
    lv, cls = _triangle_levels(tiling, tt)
    up = np.nonzero(tt.up_rank >= 0)[0]
    loz = [(tt.tris[i], c) for i, c in zip(up.tolist(), cls[up].tolist())]
    return loz, lv[up].astype(np.int64)


def max_level(tiling: Tiling) -> int:
    _, lv = tile_levels(tiling)
    return int(np.abs(lv).max()) if len(lv) else 0


# -- order and lattice --------------------------------------------------------

def _same_domain(t1: Tiling, t2: Tiling) -> None:
    if t1.domain != t2.domain:
        raise DomainMismatch("tilings of different domains")


def leq(t1: Tiling, t2: Tiling) -> bool:
    _same_domain(t1, t2)
    return bool(np.all(t1.h <= t2.h))


def leq_modulus(t1: Tiling, t2: Tiling) -> bool:
    """Comparison of the moduli of the relative heights, vertex by vertex."""
    _same_domain(t1, t2)
    return bool(np.all(np.abs(t1.rel) <= np.abs(t2.rel)))


def join(t1: Tiling, t2: Tiling) -> Tiling:
    _same_domain(t1, t2)
    return Tiling(t1.domain, np.maximum(t1.h, t2.h), check=False)


def meet(t1: Tiling, t2: Tiling) -> Tiling:
    _same_domain(t1, t2)
    return Tiling(t1.domain, np.minimum(t1.h, t2.h), check=False)


_EXTREMAL: dict[tuple[Domain, str], np.ndarray] = {}


def extremal_tiling(domain: Domain, which: Literal["max", "min"] = "max") -> Tiling:
    """Top or bottom of the tiling lattice, by greedy flips from the reference."""
    if which not in ("max", "min"):
        raise ValueError(which)
    if (domain, which) not in _EXTREMAL:
        _EXTREMAL[domain, which] = _extremal_heights(domain, which)
    return Tiling(domain, _EXTREMAL[domain, which].copy(), check=False)


def _extremal_heights(domain: Domain, which: str) -> np.ndarray:
    sign = 1 if which == "max" else -1
    h = [int(x) for x in domain.h0]
    nb = domain.neighbour_table.tolist()
    interior = domain.interior_mask.tolist()
    stack = [int(i) for i in domain.interior_index]
    while stack:
        i = stack.pop()
        hi = h[i]
        row = nb[i]
        if sign > 0:
            ok = all(h[row[3 + k]] == hi + 2 for k in range(3))
        else:
            ok = all(h[row[k]] == hi - 2 for k in range(3))
        if ok:
            h[i] = hi + 3 * sign
            stack.append(i)
            stack.extend(j for j in row if interior[j])
    return np.array(h, dtype=np.int64)


# -- flips --------------------------------------------------------------------

def _local_site(h, i: int, nb_row, nnn_row) -> tuple[int, int] | None:
    hi = int(h[i])
    if h[nb_row[0]] == hi - 2 and h[nb_row[1]] == hi - 2 and h[nb_row[2]] == hi - 2:
        dh = -3
    elif h[nb_row[3]] == hi + 2 and h[nb_row[4]] == hi + 2 and h[nb_row[5]] == hi + 2:
        dh = 3
    else:
        return None
    new = hi + dh
    de = 0
    for j in nnn_row:
        hj = int(h[j])
        de += (new != hj) - (hi != hj)
    return dh, de


def _site_index(tiling: Tiling) -> dict[int, tuple[int, int]]:
    if tiling._sites is None:
        d = tiling.domain
        nb, nnn = d.neighbour_table, d.nnn_table
        h = tiling.h.tolist()
        sites = {}
        for i in d.interior_index.tolist():
            s = _local_site(h, i, nb[i].tolist(), nnn[i].tolist())
            if s is not None:
                sites[i] = s
        tiling._sites = sites
    return tiling._sites


def _make_site(tiling: Tiling, i: int, dh: int, de: int) -> FlipSite:
    d = tiling.domain
    r = (int(tiling.h[i]) - int(d.h0[i])) // 3
    upward = abs(r + dh // 3) > abs(r)
    return FlipSite(d.ext_vertices[i], upward, de, dh)


def descend(tiling: Tiling, steps: int, rng) -> int:
    """Apply up to ``steps`` random volume-decreasing flips in place.

    ``rng`` provides ``bounded(k)``; returns the number of flips made.
    """
    h0 = tiling.domain.h0
    done = 0
    for _ in range(steps):
        sites = _site_index(tiling)
        down = sorted(i for i, (dh, _) in sites.items()
                      if abs((int(tiling.h[i]) - int(h0[i]) + dh) // 3) < abs((int(tiling.h[i]) - int(h0[i])) // 3))
        if not down:
            break
        i = down[rng.bounded(len(down))]
        _flip_index(tiling, i, sites[i])
        done += 1
    return done


def flips(tiling: Tiling) -> list[FlipSite]:
    """Every vertex belonging to exactly three lozenges, with its flip effect."""
    sites = _site_index(tiling)
    return [_make_site(tiling, i, dh, de) for i, (dh, de) in sorted(sites.items())]


def allowed_flips(tiling: Tiling) -> list[FlipSite]:
    """Flips that do not increase the energy."""
    return [s for s in flips(tiling) if s.delta_e <= 0]


def flip_at(tiling: Tiling, v: Vertex) -> FlipSite | None:
    i = tiling.domain.index[v]
    s = _site_index(tiling).get(i)
    return None if s is None else _make_site(tiling, i, *s)


def apply_flip(tiling: Tiling, site: FlipSite) -> tuple[int, int]:
    """Rotate the three lozenges at ``site.vertex`` in place.

    Returns an undo token for :func:`undo_flip`.  Only caches within lattice
    distance 2 of the vertex are touched.
    """
    d = tiling.domain
    i = d.index[site.vertex]
    sites = _site_index(tiling)
    cur = sites.get(i)
    if cur is None or cur[0] != site.dh or cur[1] != site.delta_e:
        raise StaleSite(f"no such flip at {site.vertex}")
    _flip_index(tiling, i, cur)
    return (i, site.dh)


def _flip_index(tiling: Tiling, i: int, cur: tuple[int, int]) -> None:
    d = tiling.domain
    dh, de = cur
    h = tiling.h
    r = (int(h[i]) - int(d.h0[i])) // 3
    h[i] += dh
    if tiling._energy is not None:
        tiling._energy += de
    if tiling._volume is not None:
        tiling._volume += abs(r + dh // 3) - abs(r)
    _refresh_sites(tiling, i)


def _refresh_sites(tiling: Tiling, i: int) -> None:
    d = tiling.domain
    nb, nnn, inner = d.neighbour_table, d.nnn_table, d.interior_mask
    sites = tiling._sites
    h = tiling.h
    touched = [i, *nb[i].tolist(), *nnn[i].tolist()]
    for j in touched:
        if j < 0 or not inner[j]:
            continue
        s = _local_site(h, j, nb[j].tolist(), nnn[j].tolist())
        if s is None:
            sites.pop(j, None)
        else:
            sites[j] = s


def undo_flip(tiling: Tiling, token: tuple[int, int]) -> None:
    i, dh = token
    sites = _site_index(tiling)
    cur = sites.get(i)
    if cur is None or cur[0] != -dh:
        raise StaleSite("undo token does not match the current state")
    _flip_index(tiling, i, cur)


def flipped(tiling: Tiling, site: FlipSite) -> Tiling:
    """A flipped copy, leaving ``tiling`` untouched."""
    t = tiling.copy()
    apply_flip(t, site)
    return t


def neighbours(tiling: Tiling, predicate: Callable[[FlipSite], bool] | None = None):
    for s in flips(tiling):
        if predicate is None or predicate(s):
            yield s, flipped(tiling, s)


# -- islands and holes --------------------------------------------------------

@dataclass(frozen=True)
class _TriangleTables:
    """Static per-domain triangle data for island extraction.

    Slot ``c`` of a triangle is its edge of direction class ``c`` (oriented
    along ``+u``); ``nbr[i, c]`` is the triangle across that edge, or -1
    outside the domain.  Triangles are in sorted order, so the up triangles
    appear in the order of :func:`lozenges`.
    """

    tris: list[Triangle]
    P: np.ndarray
    Q: np.ndarray
    apex: np.ndarray
    nbr: np.ndarray
    up_rank: np.ndarray
    coords: np.ndarray


_TRI_TABLES: dict[Domain, _TriangleTables] = {}


def _triangle_tables(domain: Domain) -> _TriangleTables:
    if domain in _TRI_TABLES:
        return _TRI_TABLES[domain]
    tris = sorted(domain.triangles)
    tid = {t: i for i, t in enumerate(tris)}
    idx = domain.index
    n = len(tris)
    P = np.empty((n, 3), np.int64)
    Q = np.empty((n, 3), np.int64)
    apex = np.empty((n, 3), np.int64)
    nbr = np.full((n, 3), -1, np.int64)
    up_rank = np.full(n, -1, np.int64)
    rank = 0
    for i, t in enumerate(tris):
        if t.kind == "U":
            up_rank[i] = rank
            rank += 1
        vs = set(t.vertices)
        for p, q, c in _edges_plus(t):
            P[i, c], Q[i, c] = idx[p], idx[q]
            (x,) = vs - {p, q}
            apex[i, c] = idx[x]
        for u, c in t.neighbours():
            nbr[i, c] = tid.get(u, -1)
    coords = np.array(domain.ext_vertices, dtype=np.int64)
    tables = _TriangleTables(tris, P, Q, apex, nbr, up_rank, coords)
    _TRI_TABLES[domain] = tables
    return tables


def _triangle_levels(tiling: Tiling, tt: _TriangleTables) -> tuple[np.ndarray, np.ndarray]:
    """Level and diagonal class of the lozenge covering each triangle."""
    h = tiling.h
    hp, hq = h[tt.P], h[tt.Q]
    cls = np.argmax(hq - hp == -2, axis=1)
    rows = np.arange(len(cls))
    mid = (hp[rows, cls] + hq[rows, cls]) // 2
    return mid - (tiling.domain.reference_offset + 1), cls


def _components(tt: _TriangleTables, mask: np.ndarray) -> list[np.ndarray]:
    """Connected components (triangle ids) of the triangles in ``mask``."""
    labels, count = kernels.label_regions(tt.nbr, mask.view(np.uint8), False)
    ids = np.nonzero(mask)[0]
    if len(ids) == 0:
        return []
    lab = labels[ids]
    order = np.argsort(lab, kind="stable")
    splits = np.cumsum(np.bincount(lab, minlength=count))[:-1]
    return [ids[part] for part in np.split(order, splits)]


def _outside(tt: _TriangleTables, blocked: np.ndarray) -> np.ndarray:
    """Triangles reachable from the exterior without entering ``blocked``."""
    labels, _ = kernels.label_regions(tt.nbr, (~blocked).view(np.uint8), True)
    return labels == 0


def _boundary_cycle(tt: _TriangleTables, filled: np.ndarray) -> list[Vertex]:
    """Outer boundary of a filled triangle set, clockwise (region on the right)."""
    ii, cc = np.nonzero(filled[:, None] & ((tt.nbr < 0) | ~filled[np.maximum(tt.nbr, 0)]))
    if len(ii) == 0:
        return []
    p, q, x = tt.coords[tt.P[ii, cc]], tt.coords[tt.Q[ii, cc]], tt.coords[tt.apex[ii, cc]]
    dq, dx = q - p, x - p
    # orient p -> q so the apex (inside) lies to the right
    flip = dq[:, 0] * dx[:, 1] - dq[:, 1] * dx[:, 0] > 0
    src = np.where(flip[:, None], q, p)
    dst = np.where(flip[:, None], p, q)
    succ: dict[Vertex, list[Vertex]] = {}
    for a, b in zip(map(tuple, src.tolist()), map(tuple, dst.tolist())):
        succ.setdefault(a, []).append(b)
    start = min(succ)
    cycle = [start]
    cur = start
    while True:
        nxt = succ[cur]
        if len(nxt) != 1:
            raise OpenErrorPath(f"boundary branches at {cur}")
        cur = nxt[0]
        if cur == start:
            break
        cycle.append(cur)
        if len(cycle) > len(succ):
            raise OpenErrorPath("boundary does not close")
    if len(cycle) != len(succ):
        raise OpenErrorPath("boundary splits into several cycles")
    return cycle


def islands(tiling: Tiling) -> IslandDecomposition:
    """Islands and holes, nested by level.

    An island of level ``l > 0`` is a connected component of the tiles of level
    at least ``l``; its area counts everything it encloses.  A hole of level
    ``l - 1`` is a connected part of the enclosed remainder.  Negative levels
    are treated symmetrically.  Areas are in six-triangle hexagons; tile
    indices refer to the order of :func:`lozenges`.
    """
    tt = _triangle_tables(tiling.domain)
    lv, cls = _triangle_levels(tiling, tt)
    n = len(lv)
    rows = np.arange(n)
    tile_of = np.where(tt.up_rank >= 0, tt.up_rank, tt.up_rank[tt.nbr[rows, cls]])
    out = IslandDecomposition()

    def tiles(ids: np.ndarray) -> frozenset[int]:
        return frozenset(tile_of[ids].tolist())

    for sign in (1, -1):
        slv = sign * lv
        top = max(int(slv.max()), 0) if n else 0
        for ell in range(1, top + 1):
            for comp in _components(tt, slv >= ell):
                in_comp = np.zeros(n, dtype=bool)
                in_comp[comp] = True
                outer = _outside(tt, in_comp)
                filled = ~outer
                across = tt.nbr[comp]
                ext_level = np.where(across < 0, 0, slv[np.maximum(across, 0)])
                touches = (across < 0) | outer[np.maximum(across, 0)]
                if np.any(touches & (ext_level != ell - 1)):
                    raise OpenErrorPath("island boundary is not a single level step")
                area = int(filled.sum())
                if area % 6:
                    raise OpenErrorPath("island is not a union of hexagons")
                out.regions.append(
                    Region("island", sign * ell, area // 6, tiles(comp), _boundary_cycle(tt, filled))
                )
                for hole in _components(tt, filled & ~in_comp):
                    blocked = np.zeros(n, dtype=bool)
                    blocked[hole] = True
                    h_filled = ~_outside(tt, blocked)
                    h_area = int(h_filled.sum())
                    if h_area % 6:
                        raise OpenErrorPath("hole is not a union of hexagons")
                    out.regions.append(
                        Region("hole", sign * (ell - 1), h_area // 6, tiles(hole),
                               _boundary_cycle(tt, h_filled))
                    )
    out.volume = sum(r.area for r in out.islands) - sum(r.area for r in out.holes)
    assert 6 * out.volume == int(np.abs(lv).sum()), "volume formulas disagree"
    return out


def island_components(tiling: Tiling, level: int) -> list[np.ndarray]:
    """Triangle ids (sorted-triangle order) of the islands of a nonzero level,
    without holes or boundaries."""
    if level == 0:
        raise ValueError("islands have nonzero levels")
    tt = _triangle_tables(tiling.domain)
    lv, _ = _triangle_levels(tiling, tt)
    sign = 1 if level > 0 else -1
    return _components(tt, sign * lv >= abs(level))


def island_levels(tiling: Tiling) -> list[int]:
    """Levels of all islands, in the order of :func:`islands`."""
    tt = _triangle_tables(tiling.domain)
    lv, _ = _triangle_levels(tiling, tt)
    out = []
    for sign in (1, -1):
        slv = sign * lv
        for ell in range(1, max(int(slv.max()), 0) + 1 if len(lv) else 1):
            out.extend([sign * ell] * len(_components(tt, slv >= ell)))
    return out


def triangles_of(tiling: Tiling, ids: Iterable[int]) -> set[Triangle]:
    tris = _triangle_tables(tiling.domain).tris
    return {tris[i] for i in ids}


# -- file format --------------------------------------------------------------

def serialize_tiling(tiling: Tiling) -> str:
    lines = ["tiling v1", "domain"]
    lines.extend(serialize_domain(tiling.domain).splitlines())
    lines.append("end")
    for t, c in lozenges(tiling):
        lines.append(f"{t.a} {t.b} {t.kind} {c}")
    return "\n".join(lines) + "\n"


def parse_tiling(text: str) -> Tiling:
    lines = text.splitlines()
    body = [ln.split("#", 1)[0].strip() for ln in lines]
    pos = [i for i, ln in enumerate(body) if ln]
    if len(pos) < 2 or body[pos[0]] != "tiling v1" or body[pos[1]] != "domain":
        raise MalformedLine("expected 'tiling v1' followed by 'domain'")
    try:
        end = body.index("end", pos[1])
    except ValueError:
        raise MalformedLine("missing 'end' after the domain section") from None
    domain = parse_domain("\n".join(lines[pos[1] + 1 : end]))
    match = {}
    for no in range(end + 1, len(lines)):
        tok = body[no].split()
        if not tok:
            continue
        try:
            a, b, kind, c = int(tok[0]), int(tok[1]), tok[2], int(tok[3])
            if kind not in ("U", "D") or c not in (0, 1, 2) or len(tok) != 4:
                raise ValueError
        except (ValueError, IndexError):
            raise MalformedLine(f"line {no + 1}: cannot parse {body[no]!r}") from None
        t = Triangle(a, b, kind)
        match[t] = c
        match[t.partner(c)] = c
    return from_matching(domain, match)


def random_walk(tiling: Tiling, steps: int, rng: np.random.Generator) -> Tiling:
    """Unrestricted random flips; a quick way to reach assorted states in tests."""
    t = tiling.copy()
    for _ in range(steps):
        s = flips(t)
        if not s:
            break
        apply_flip(t, s[int(rng.integers(len(s)))])
    return t


__all__ = [
    "Tiling", "FlipSite", "Region", "IslandDecomposition",
    "errorfree_reference", "compute_heights", "from_matching", "matching", "lozenges",
    "energy", "volume", "tile_levels", "max_level", "islands",
    "leq", "leq_modulus", "join", "meet", "extremal_tiling",
    "flips", "allowed_flips", "flip_at", "apply_flip", "undo_flip", "flipped",
    "serialize_tiling", "parse_tiling",
    "TilingError", "ReferenceNotErrorFree", "InconsistentLift", "OpenErrorPath",
    "DomainMismatch", "StaleSite",
]
