"""Exhaustive ground truth for small domains.

* :func:`enumerate_space` lists every tiling by backtracking over matchings and
  checks that unrestricted flips connect them all.
* :func:`exact_times` solves the absorbing-chain equations
  ``E[T | w] = 1 + (1/F(w)) sum E[T | w']`` with exact rationals, one strongly
  connected component at a time in reverse topological order.
* :func:`count_by_determinant` and :func:`macmahon` are independent tiling
  counts used to cross-check the enumeration.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Callable, Iterable

import numpy as np

from .lattice import Domain, Triangle
from .tiling import (
    Tiling,
    _local_site,
    energy,
    errorfree_reference,
    from_matching,
    volume,
)

DEFAULT_CAP = 2_000_000


class TooLarge(RuntimeError):
    pass


class NonAbsorbing(RuntimeError):
    pass


class Unreachable(RuntimeError):
    pass


class MinimumNotUnique(RuntimeError):
    pass


class NoneAbove(RuntimeError):
    pass


# -- independent counts -------------------------------------------------------

def macmahon(a: int, b: int, c: int) -> int:
    """Number of plane partitions in an a x b x c box (lozenge tilings of the
    hexagon with sides a, b, c)."""
    num = prod(i + j + k - 1 for i in range(1, a + 1) for j in range(1, b + 1) for k in range(1, c + 1))
    den = prod(i + j + k - 2 for i in range(1, a + 1) for j in range(1, b + 1) for k in range(1, c + 1))
    assert num % den == 0
    return num // den


def bareiss_det(mat: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    m = [row[:] for row in mat]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def count_by_determinant(domain: Domain) -> int:
    """Tiling count as |det| of the up/down triangle adjacency matrix.

    Every bounded face of the dual honeycomb graph is a hexagon, so all-positive
    weights are already Kasteleyn-flat for simply connected domains.
    """
    ups = sorted(t for t in domain.triangles if t.kind == "U")
    downs = sorted(t for t in domain.triangles if t.kind == "D")
    if len(ups) != len(downs):
        return 0
    col = {t: j for j, t in enumerate(downs)}
    mat = [[0] * len(downs) for _ in ups]
    for i, t in enumerate(ups):
        for u, _ in t.neighbours():
            if u in col:
                mat[i][col[u]] = 1
    return abs(bareiss_det(mat))


# -- enumeration --------------------------------------------------------------

def enumerate_matchings(domain: Domain, cap: int = DEFAULT_CAP) -> list[dict[Triangle, int]]:
    """Every perfect matching, as triangle -> diagonal class, by backtracking."""
    tris = sorted(domain.triangles)
    inside = domain.triangles
    match: dict[Triangle, int] = {}
    out: list[dict[Triangle, int]] = []

    def first_free(start: int) -> int:
        for k in range(start, len(tris)):
            if tris[k] not in match:
                return k
        return len(tris)

    def rec(start: int) -> None:
        k = first_free(start)
        if k == len(tris):
            out.append(dict(match))
            if len(out) > cap:
                raise TooLarge(f"more than {cap} tilings")
            return
        t = tris[k]
        for u, c in t.neighbours():
            if u in inside and u not in match:
                match[t] = c
                match[u] = c
                rec(k + 1)
                del match[t], match[u]

    rec(0)
    return out


def canonical_key(tiling: Tiling) -> tuple[int, ...]:
    """Relative heights of domain vertices; sorting by it gives stable ids."""
    return tuple(tiling.rel.tolist())


@dataclass
class StateSpace:
    """All tilings of a domain with their flip graphs.

    ``moves[s]`` lists ``(target, delta_e)`` for every flip of state ``s``;
    ``adjacency[s]`` keeps the cooling-allowed ones (``delta_e <= 0``) as
    ``(target, multiplicity)``.
    """

    domain: Domain
    states: list[Tiling]
    index: dict[bytes, int]
    moves: list[list[tuple[int, int]]]
    energies: np.ndarray
    volumes: np.ndarray

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        out = []
        for mv in self.moves:
            counts: dict[int, int] = {}
            for tgt, de in mv:
                if de <= 0:
                    counts[tgt] = counts.get(tgt, 0) + 1
            out.append(sorted(counts.items()))
        return out

    def id_of(self, tiling: Tiling) -> int:
        return self.index[tiling.key()]

    def absorbing(self) -> list[int]:
        return [s for s, mv in enumerate(self.moves) if not any(de <= 0 for _, de in mv)]

    def max_state(self) -> int:
        """Id of the top of the lattice (largest height function)."""
        return max(range(self.size), key=lambda s: (int(self.states[s].h.sum()), -s))


def _moves_of(domain: Domain, h: np.ndarray) -> list[tuple[int, int, int]]:
    nb, nnn = domain.neighbour_table, domain.nnn_table
    hl = h.tolist()
    out = []
    for i in domain.interior_index.tolist():
        s = _local_site(hl, i, nb[i].tolist(), nnn[i].tolist())
        if s is not None:
            out.append((i, s[0], s[1]))
    return out


def enumerate_space(domain: Domain, cap: int = DEFAULT_CAP, *, check_connected: bool = True) -> StateSpace:
    """Exhaustive state space of ``domain``.

    The matchings come from backtracking; the flip graph is then built on the
    height functions and, unless disabled, checked to be connected.
    """
    tilings = [from_matching(domain, m) for m in enumerate_matchings(domain, cap)]
    tilings.sort(key=canonical_key)
    index = {t.key(): s for s, t in enumerate(tilings)}
    if len(index) != len(tilings):
        raise AssertionError("distinct matchings gave equal height functions")
    moves = []
    for t in tilings:
        mv = []
        for i, dh, de in _moves_of(domain, t.h):
            t.h[i] += dh
            mv.append((index[t.key()], de))
            t.h[i] -= dh
        moves.append(mv)
    space = StateSpace(
        domain=domain,
        states=tilings,
        index=index,
        moves=moves,
        energies=np.array([energy(t) for t in tilings], dtype=np.int64),
        volumes=np.array([volume(t) for t in tilings], dtype=np.int64),
    )
    if check_connected:
        seen = _bfs(space, [0], lambda s: [t for t, _ in space.moves[s]])
        if len(seen) != space.size:
            raise AssertionError("flip graph is not connected")
    return space


def _bfs(space: StateSpace, sources: Iterable[int], succ: Callable[[int], Iterable[int]]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        s = queue.popleft()
        for t in succ(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return dist


def bfs_flip_distance(tiling: Tiling, predicate: Callable[[Tiling], bool], cap: int = DEFAULT_CAP) -> int:
    """Fewest unrestricted flips from ``tiling`` to a state satisfying ``predicate``."""
    d = tiling.domain
    start = tiling.h.copy()
    seen = {start.tobytes()}
    queue = deque([(start, 0)])
    while queue:
        h, dist = queue.popleft()
        if predicate(Tiling(d, h, check=False)):
            return dist
        for i, dh, _ in _moves_of(d, h):
            h2 = h.copy()
            h2[i] += dh
            key = h2.tobytes()
            if key not in seen:
                if len(seen) >= cap:
                    raise TooLarge("search space exceeds the cap")
                seen.add(key)
                queue.append((h2, dist + 1))
    raise Unreachable("no state satisfies the predicate")


def distances_to(space: StateSpace, targets: Iterable[int]) -> dict[int, int]:
    """Unrestricted flip distance from every state to the target set."""
    return _bfs(space, targets, lambda s: [t for t, _ in space.moves[s]])


# -- exact expected times -----------------------------------------------------

def strongly_connected_components(n: int, succ: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm (iterative); components come out in reverse
    topological order (sinks first)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for k in range(pos, len(succ[v])):
                w = succ[v][k]
                if index[w] < 0:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def solve_rational(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals."""
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        row = [x / p for x in m[col]]
        m[col] = row
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], row)]
    return [m[r][n] for r in range(n)]


@dataclass
class ExactTimes:
    expected: list[Fraction]
    worst: Fraction
    worst_state: int
    average: Fraction
    n_states: int = field(default=0)


def exact_times(space: StateSpace) -> ExactTimes:
    """Exact expected cooling time from every state."""
    adj = space.adjacency
    n = space.size
    succ = [[t for t, _ in row] for row in adj]
    # every state must reach an absorbing one
    absorbing = {s for s in range(n) if not adj[s]}
    pred: list[list[int]] = [[] for _ in range(n)]
    for s, row in enumerate(succ):
        for t in row:
            pred[t].append(s)
    reach = _bfs(space, absorbing, lambda s: pred[s])
    if len(reach) != n:
        raise NonAbsorbing(f"{n - len(reach)} states never reach an absorbing state")
    x: list[Fraction | None] = [None] * n
    for comp in strongly_connected_components(n, succ):
        members = {s: k for k, s in enumerate(comp)}
        if len(comp) == 1 and not adj[comp[0]]:
            x[comp[0]] = Fraction(0)
            continue
        size = len(comp)
        a = [[Fraction(0)] * size for _ in range(size)]
        b = [Fraction(0)] * size
        for s, k in members.items():
            f = sum(mult for _, mult in adj[s])
            a[k][k] += f
            b[k] = Fraction(f)
            for t, mult in adj[s]:
                if t in members:
                    a[k][members[t]] -= mult
                else:
                    b[k] += mult * x[t]
        for s, val in zip(comp, solve_rational(a, b)):
            x[s] = val
    worst_state = max(range(n), key=lambda s: (x[s], -s))
    return ExactTimes(
        expected=x,  # type: ignore[arg-type]
        worst=x[worst_state],  # type: ignore[arg-type]
        worst_state=worst_state,
        average=sum(x, Fraction(0)) / n,  # type: ignore[arg-type]
        n_states=n,
    )


# -- oracles ------------------------------------------------------------------

def modulus_leq(r1: np.ndarray, r2: np.ndarray) -> bool:
    """``r1 <= r2`` in the modulus order: same sign where ``r1 != 0`` and
    ``|r1| <= |r2|`` everywhere."""
    return bool(np.all((r1 == 0) | ((np.sign(r1) == np.sign(r2)) & (np.abs(r1) <= np.abs(r2)))))


def triconvex_oracle(tiling: Tiling, space: StateSpace, triconvex: list[bool] | None = None) -> Tiling:
    """Brute-force smallest triconvex tiling above ``tiling`` (modulus order)."""
    from .hull import is_triconvex

    if triconvex is None:
        triconvex = [is_triconvex(t).is_triconvex for t in space.states]
    r = tiling.rel
    cands = [s for s in range(space.size) if triconvex[s] and modulus_leq(r, space.states[s].rel)]
    if not cands:
        raise NoneAbove("no triconvex tiling lies above the input")
    rels = {s: space.states[s].rel for s in cands}
    best = [s for s in cands if all(modulus_leq(rels[s], rels[o]) for o in cands)]
    if len(best) != 1:
        raise MinimumNotUnique(f"{len(best)} least elements among {len(cands)} candidates")
    return space.states[best[0]]


# -- report -------------------------------------------------------------------

EXACT_COLUMNS = ("state_id", "energy", "volume", "phi", "expected_T_num", "expected_T_den")


def exact_csv(space: StateSpace, times: ExactTimes) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXACT_COLUMNS)
    for s in range(space.size):
        e, v = int(space.energies[s]), int(space.volumes[s])
        x = times.expected[s]
        w.writerow([s, e, v, 4 * v + e, x.numerator, x.denominator])
    w.writerow(["n", "num_states", "worst_T", "average_T"])
    w.writerow([space.domain.n_tiles, space.size, str(times.worst), str(times.average)])
    return buf.getvalue()


__all__ = [
    "StateSpace", "ExactTimes", "enumerate_space", "enumerate_matchings", "exact_times",
    "bfs_flip_distance", "distances_to", "triconvex_oracle", "modulus_leq",
    "macmahon", "count_by_determinant", "bareiss_det", "exact_csv",
    "TooLarge", "NonAbsorbing", "Unreachable", "MinimumNotUnique", "NoneAbove",
    "strongly_connected_components", "solve_rational", "DEFAULT_CAP",
]
