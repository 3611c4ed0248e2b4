"""Triangular-grid geometry and domains.

Coordinates
-----------
A vertex is an integer pair ``(a, b)`` standing for the point ``a*w1 + b*w2``
where ``w1 = (1, 0)`` and ``w2 = (1/2, sqrt(3)/2)`` are unit vectors 60 degrees
apart.  The three lift directions are

    u0 = (1, 0),   u1 = (-1, 1),   u2 = (0, -1)

(unit vectors 120 degrees apart, summing to zero).  They are the directions at
0, 120 and 240 degrees; the classical convention with directions at 30, 150
and 270 degrees is recovered by a global rotation of -30 degrees, which changes
nothing combinatorial.

An up triangle ``(a, b, 'U')`` has vertices (a,b), (a+1,b), (a,b+1); a down
triangle ``(a, b, 'D')`` has vertices (a+1,b), (a,b+1), (a+1,b+1).

Every triangle has exactly one vertex in each residue class of ``(a - b) mod 3``.
A domain carries a *hexagon decomposition*: a residue class whose vertices are
the centres of six-triangle hexagons.  Hexagons cut by the domain boundary are
allowed as long as they consist of whole reference lozenges.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

import numpy as np

Vertex = tuple[int, int]

U = ((1, 0), (-1, 1), (0, -1))
# Directions of the six neighbours, in the order +u0, +u1, +u2, -u0, -u1, -u2.
NEIGHBOUR_STEPS = U + tuple((-x, -y) for x, y in U)
# Next-nearest-neighbour steps u_i - u_j; NNN_STEPS[k] is the apex across the
# hexagon edge (x + u_i, x - u_j).
NNN_STEPS = tuple(
    (U[i][0] - U[j][0], U[i][1] - U[j][1]) for i in range(3) for j in range(3) if i != j
)
# One representative per unoriented next-nearest-neighbour line family.
LINE_DIRECTIONS = ((2, -1), (-1, 2), (-1, -1))
# Unit edge direction classes d0, d1, d2.
EDGE_CLASSES = ((1, 0), (0, 1), (-1, 1))


class LatticeError(ValueError):
    """Base class for invalid domain input."""


class MalformedLine(LatticeError):
    pass


class NotConnected(LatticeError):
    pass


class NotSimplyConnected(LatticeError):
    pass


class NotHexDecomposable(LatticeError):
    pass


class Triangle(NamedTuple):
    a: int
    b: int
    kind: str  # 'U' or 'D'

    @property
    def vertices(self) -> tuple[Vertex, Vertex, Vertex]:
        a, b = self.a, self.b
        if self.kind == "U":
            return (a, b), (a + 1, b), (a, b + 1)
        return (a + 1, b), (a, b + 1), (a + 1, b + 1)

    def neighbours(self) -> tuple[tuple["Triangle", int], ...]:
        """Edge-adjacent triangles with the direction class of the shared edge."""
        a, b = self.a, self.b
        if self.kind == "U":
            return (
                (Triangle(a, b - 1, "D"), 0),
                (Triangle(a - 1, b, "D"), 1),
                (Triangle(a, b, "D"), 2),
            )
        return (
            (Triangle(a, b + 1, "U"), 0),
            (Triangle(a + 1, b, "U"), 1),
            (Triangle(a, b, "U"), 2),
        )

    def partner(self, direction: int) -> "Triangle":
        return self.neighbours()[direction][0]


class Edge(NamedTuple):
    p: Vertex
    q: Vertex

    @property
    def direction_class(self) -> int:
        d = (self.q[0] - self.p[0], self.q[1] - self.p[1])
        for k, c in enumerate(EDGE_CLASSES):
            if d == c or d == (-c[0], -c[1]):
                return k
        raise ValueError(f"not a unit edge: {self}")


def edge(p: Vertex, q: Vertex) -> Edge:
    return Edge(min(p, q), max(p, q))


def residue(v: Vertex) -> int:
    return (v[0] - v[1]) % 3


def add(v: Vertex, d: tuple[int, int], k: int = 1) -> Vertex:
    return (v[0] + k * d[0], v[1] + k * d[1])


def triangles_around(v: Vertex) -> tuple[Triangle, ...]:
    """The six triangles at ``v`` in counter-clockwise order from angle 0."""
    a, b = v
    return (
        Triangle(a, b, "U"),
        Triangle(a - 1, b, "D"),
        Triangle(a - 1, b, "U"),
        Triangle(a - 1, b - 1, "D"),
        Triangle(a, b - 1, "U"),
        Triangle(a, b - 1, "D"),
    )


def triangles_on_edge(p: Vertex, q: Vertex) -> tuple[Triangle, Triangle]:
    both = [t for t in triangles_around(p) if q in t.vertices]
    assert len(both) == 2
    return both[0], both[1]


def reference_lozenges(center: Vertex) -> tuple[tuple[Triangle, Triangle], ...]:
    """The three lozenges of the reference pattern around a hexagon centre.

    The reference chirality makes every centre a local minimum of the height:
    the spokes towards ``center - u_k`` are lozenge diagonals.
    """
    return tuple(triangles_on_edge(center, add(center, U[k], -1)) for k in range(3))


def hex_norm(a: int, b: int) -> int:
    return max(abs(a), abs(b), abs(a + b))


@dataclass(frozen=True, eq=False)
class Domain:
    """A finite, connected, simply connected set of triangles with a hexagon
    decomposition.

    The domain sits inside the frozen reference tiling of the plane: edges on
    the domain boundary are compared against the exterior reference lozenges
    when counting errors.
    """

    triangles: frozenset[Triangle]
    hex_centers: frozenset[Vertex]
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.triangles:
            raise LatticeError("empty domain")
        if self.validate:
            check_connected(self.triangles)
            check_simply_connected(self.triangles)
            check_hex_decomposition(self.triangles, self.hex_centers)

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return self.triangles == other.triangles and self.hex_centers == other.hex_centers

    def __hash__(self):
        return hash((self.triangles, self.hex_centers))

    @property
    def n_tiles(self) -> int:
        return len(self.triangles) // 2

    @cached_property
    def center_residue(self) -> int:
        return residue(next(iter(self.hex_centers)))

    @cached_property
    def vertices(self) -> tuple[Vertex, ...]:
        return tuple(sorted({v for t in self.triangles for v in t.vertices}))

    @cached_property
    def vertex_set(self) -> frozenset[Vertex]:
        return frozenset(self.vertices)

    @cached_property
    def interior_vertices(self) -> tuple[Vertex, ...]:
        tri = self.triangles
        return tuple(v for v in self.vertices if all(t in tri for t in triangles_around(v)))

    @cached_property
    def boundary_vertices(self) -> tuple[Vertex, ...]:
        inner = set(self.interior_vertices)
        return tuple(v for v in self.vertices if v not in inner)

    @cached_property
    def base_vertex(self) -> Vertex:
        return min(self.boundary_vertices)

    @cached_property
    def reference_offset(self) -> int:
        # reference height is offset + ((a - b - r) mod 3); zero at the base vertex
        a, b = self.base_vertex
        return -((a - b - self.center_residue) % 3)

    def reference_height(self, v: Vertex) -> int:
        return self.reference_offset + (v[0] - v[1] - self.center_residue) % 3

    @cached_property
    def boundary_edges(self) -> tuple[tuple[Triangle, Triangle], ...]:
        """(inside triangle, outside triangle) for every boundary edge."""
        out = []
        for t in sorted(self.triangles):
            for u, _ in t.neighbours():
                if u not in self.triangles:
                    out.append((t, u))
        return tuple(out)

    @cached_property
    def ghost_vertices(self) -> tuple[Vertex, ...]:
        ghosts = set()
        for _, u in self.boundary_edges:
            ghosts.update(v for v in u.vertices if v not in self.vertex_set)
        return tuple(sorted(ghosts))

    @cached_property
    def ext_vertices(self) -> tuple[Vertex, ...]:
        """Domain vertices followed by frozen exterior vertices."""
        return self.vertices + self.ghost_vertices

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.ext_vertices)}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def interior_index(self) -> np.ndarray:
        idx = self.index
        return np.array([idx[v] for v in self.interior_vertices], dtype=np.int64)

    @cached_property
    def h0(self) -> np.ndarray:
        arr = np.array([self.reference_height(v) for v in self.ext_vertices], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def neighbour_table(self) -> np.ndarray:
        """(n_ext, 6) neighbour indices in NEIGHBOUR_STEPS order, -1 if absent."""
        idx = self.index
        tab = np.full((len(self.ext_vertices), 6), -1, dtype=np.int64)
        for i, v in enumerate(self.ext_vertices):
            for k, d in enumerate(NEIGHBOUR_STEPS):
                tab[i, k] = idx.get(add(v, d), -1)
        tab.setflags(write=False)
        return tab

    @cached_property
    def nnn_table(self) -> np.ndarray:
        """(n_ext, 6) indices of the apexes across the hexagon edges of each
        interior vertex; rows of non-interior vertices are -1."""
        idx = self.index
        tab = np.full((len(self.ext_vertices), 6), -1, dtype=np.int64)
        for v in self.interior_vertices:
            i = idx[v]
            for k, d in enumerate(NNN_STEPS):
                tab[i, k] = idx[add(v, d)]
        tab.setflags(write=False)
        return tab

    @cached_property
    def interior_mask(self) -> np.ndarray:
        m = np.zeros(len(self.ext_vertices), dtype=np.int8)
        m[self.interior_index] = 1
        m.setflags(write=False)
        return m

    @cached_property
    def apex_pairs(self) -> np.ndarray:
        """(n_edges, 2) apex indices of every edge of a domain triangle.

        An edge is an error iff its two apexes have different heights; for a
        boundary edge the outer apex belongs to the frozen exterior.
        """
        idx = self.index
        rows = []
        for t in sorted(self.triangles):
            for u, _ in t.neighbours():
                if t.kind == "U" or u not in self.triangles:
                    shared = set(t.vertices) & set(u.vertices)
                    (p,) = set(t.vertices) - shared
                    (q,) = set(u.vertices) - shared
                    rows.append((idx[p], idx[q]))
        arr = np.array(rows, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def domain_edges(self) -> tuple[tuple[int, int], ...]:
        """Directed edges p -> p + u_k with both endpoints in the domain and the
        edge belonging to a domain triangle, as index pairs."""
        idx = self.index
        seen = set()
        for t in self.triangles:
            vs = t.vertices
            for p in vs:
                for d in U:
                    q = add(p, d)
                    if q in vs:
                        seen.add((idx[p], idx[q]))
        return tuple(sorted(seen))

    def vertex_line_families(self) -> list[list[np.ndarray]]:
        return [nnn_lines(self, f) for f in range(3)]

    @cached_property
    def lines(self) -> tuple[np.ndarray, ...]:
        """All next-nearest-neighbour lines of all three families."""
        return tuple(itertools.chain.from_iterable(self.vertex_line_families()))


def check_connected(triangles: frozenset[Triangle]) -> None:
    start = next(iter(triangles))
    seen = {start}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for u, _ in t.neighbours():
            if u in triangles and u not in seen:
                seen.add(u)
                queue.append(u)
    if len(seen) != len(triangles):
        raise NotConnected(f"{len(triangles) - len(seen)} triangles unreachable")


def check_simply_connected(triangles: frozenset[Triangle]) -> None:
    verts = {v for t in triangles for v in t.vertices}
    edges = {edge(p, q) for t in triangles for p, q in itertools.combinations(t.vertices, 2)}
    euler = len(verts) - len(edges) + len(triangles)
    if euler != 1:
        raise NotSimplyConnected(f"Euler characteristic {euler}")
    # no pinch points: the triangles at each vertex form one contiguous fan
    for v in verts:
        ring = [t in triangles for t in triangles_around(v)]
        if all(ring):
            continue
        runs = sum(1 for i in range(6) if ring[i] and not ring[i - 1])
        if runs != 1:
            raise NotSimplyConnected(f"pinch point at {v}")


def check_hex_decomposition(triangles: frozenset[Triangle], centers: frozenset[Vertex]) -> None:
    if not centers:
        raise NotHexDecomposable("no hexagon centres declared")
    classes = {residue(c) for c in centers}
    if len(classes) != 1:
        raise NotHexDecomposable("hexagon centres span several residue classes")
    (r,) = classes
    for t in triangles:
        (c,) = [v for v in t.vertices if residue(v) == r]
        if c not in centers:
            raise NotHexDecomposable(f"triangle {tuple(t)} not covered by a declared hexagon")
    for c in centers:
        touched = False
        for t1, t2 in reference_lozenges(c):
            in1, in2 = t1 in triangles, t2 in triangles
            if in1 != in2:
                raise NotHexDecomposable(f"hexagon at {c} splits a reference lozenge")
            touched |= in1
        if not touched:
            raise NotHexDecomposable(f"hexagon centre {c} lies outside the domain")


def domain_from_centers(centers: Iterable[Vertex], *, partial: Iterable[Triangle] = ()) -> Domain:
    centers = frozenset(centers)
    tris = {t for c in centers for t in triangles_around(c)}
    tris.update(partial)
    return Domain(frozenset(tris), centers)


def make_hexagon_domain(k: int) -> Domain:
    """Hexagon built from unit hexagons, ``k`` of them along each side.

    ``3k^2 - 3k + 1`` hexagons, ``n = 3 (3k^2 - 3k + 1)`` lozenges.
    """
    if k < 1:
        raise ValueError("side must be >= 1")
    A, B = (2, -1), (1, 1)  # 60 degrees apart, length sqrt(3)
    centers = [
        (i * A[0] + j * B[0], i * A[1] + j * B[1])
        for i in range(-k, k + 1)
        for j in range(-k, k + 1)
        if hex_norm(i, j) <= k - 1
    ]
    return domain_from_centers(centers)


def make_triangle_domain(k: int) -> Domain:
    """Triangular cluster of unit hexagons with ``k`` hexagons per side.

    ``k (k + 1) / 2`` hexagons; ``k = 4`` gives 30 lozenges and 3100 tilings, a
    convenient size for exhaustive checks.
    """
    if k < 1:
        raise ValueError("side must be >= 1")
    A, B = (2, -1), (1, 1)
    centers = [
        (i * A[0] + j * B[0], i * A[1] + j * B[1])
        for i in range(k)
        for j in range(k - i)
    ]
    return domain_from_centers(centers)


def box_triangles(a: int, b: int, c: int) -> frozenset[Triangle]:
    """Triangles of the a x b x c lozenge hexagon (plane partitions in a box).

    Corners (0,0), (a,0), (a,b), (a-c,b+c), (-c,b+c), (-c,c).
    """
    out = set()
    for x in range(-c - 1, a + 1):
        for y in range(-1, b + c + 1):
            for kind in "UD":
                t = Triangle(x, y, kind)
                if all(_in_box(v, a, b, c) for v in t.vertices):
                    out.add(t)
    return frozenset(out)


def _in_box(v: Vertex, a: int, b: int, c: int) -> bool:
    x, y = v
    return 0 <= y <= b + c and -c <= x <= a and 0 <= x + y <= a + b


def make_box_domain(a: int, b: int, c: int) -> Domain:
    """The a x b x c lozenge hexagon with its reference decomposition.

    Only a few boxes admit an error-free tiling (all sides <= 2); others raise
    :class:`NotHexDecomposable`.
    """
    tris = box_triangles(a, b, c)
    last = None
    for r in range(3):
        centers = frozenset(
            v for t in tris for v in t.vertices if residue(v) == r
        )
        try:
            return Domain(tris, centers)
        except NotHexDecomposable as exc:
            last = exc
    raise NotHexDecomposable(f"box {a}x{b}x{c} admits no error-free tiling") from last


def nnn_lines(domain: Domain, family: int) -> list[np.ndarray]:
    """Maximal runs of domain vertices along one next-nearest-neighbour direction.

    Lines are ordered by their first vertex; each line lists ext indices in the
    order ``v, v + d, v + 2d, ...``.
    """
    d = LINE_DIRECTIONS[family]
    vs = domain.vertex_set
    idx = domain.index
    lines = []
    for v in domain.vertices:
        if add(v, d, -1) in vs:
            continue
        run = [v]
        while (w := add(run[-1], d)) in vs:
            run.append(w)
        lines.append(np.array([idx[w] for w in run], dtype=np.int64))
    return lines


# -- file format -------------------------------------------------------------

def serialize_domain(domain: Domain) -> str:
    lines = ["domain v1"]
    for t in sorted(domain.triangles):
        lines.append(f"{t.a} {t.b} {t.kind}")
    for c in sorted(domain.hex_centers):
        lines.append(f"hex {c[0]} {c[1]}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def parse_domain(text: str) -> Domain:
    rows = list(_content_lines(text))
    if not rows or rows[0][1] != ["domain", "v1"]:
        raise MalformedLine("line 1: expected header 'domain v1'")
    tris, centers = set(), set()
    for no, tok in rows[1:]:
        try:
            if tok[0] == "hex" and len(tok) == 3:
                centers.add((int(tok[1]), int(tok[2])))
            elif len(tok) == 3 and tok[2] in ("U", "D"):
                tris.add(Triangle(int(tok[0]), int(tok[1]), tok[2]))
            else:
                raise ValueError
        except ValueError:
            raise MalformedLine(f"line {no}: cannot parse {' '.join(tok)!r}") from None
    return Domain(frozenset(tris), frozenset(centers))
