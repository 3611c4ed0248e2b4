"""Pure-Python hot loops; the reference behaviour for ``_ckernels``.

Both modules expose the same names with identical semantics and identical use
of the random stream, so a seeded run gives the same trajectory whichever
backend is active.

Array conventions (all ``int64``):

``h``         heights of every domain and ghost vertex (modified in place)
``h0``        reference heights
``nb``        ``(n_ext, 6)`` neighbours in the order +u0, +u1, +u2, -u0, -u1, -u2
``nnn``       ``(n_ext, 6)`` next-nearest neighbours of interior vertices
``interior``  indices of the interior vertices (the only ones that may flip)
"""
from __future__ import annotations

import numpy as np

from .rng import Xoshiro256

BACKEND = "python"


def _site(h, i, nb_row, nnn_row):
    """(dh, de) for a flippable vertex, else (0, 0)."""
    hi = h[i]
    if h[nb_row[0]] == hi - 2 and h[nb_row[1]] == hi - 2 and h[nb_row[2]] == hi - 2:
        dh = -3
    elif h[nb_row[3]] == hi + 2 and h[nb_row[4]] == hi + 2 and h[nb_row[5]] == hi + 2:
        dh = 3
    else:
        return 0, 0
    new = hi + dh
    de = 0
    for j in nnn_row:
        hj = h[j]
        de += (new != hj) - (hi != hj)
    return dh, de


class CoolingKernel:
    """Zero-threshold cooling chain with an O(1) allowed-site index.

    The allowed sites (flips with ``de <= 0``) live in an array ``lst`` with a
    position map ``pos`` so that sampling, insertion and swap-removal are all
    constant time.  Energy and volume are tracked incrementally.
    """

    def __init__(self, h, h0, nb, nnn, interior, energy, volume, rng_state):
        self._h_arr = h
        self.h = h.tolist()
        self.h0 = h0.tolist()
        self.nb = nb.tolist()
        self.nnn = nnn.tolist()
        n_ext = len(self.h)
        self.inner = [0] * n_ext
        for i in interior.tolist():
            self.inner[i] = 1
        self.dh = [0] * n_ext
        self.de = [0] * n_ext
        self.pos = [-1] * n_ext
        self.lst: list[int] = []
        self.energy = int(energy)
        self.volume = int(volume)
        self.steps = 0
        self.rng = Xoshiro256(state=tuple(int(x) for x in rng_state))
        for i in interior.tolist():
            self._refresh(i)

    @property
    def n_allowed(self) -> int:
        return len(self.lst)

    def rng_state(self) -> tuple[int, int, int, int]:
        return self.rng.state

    def allowed(self) -> np.ndarray:
        return np.array(self.lst, dtype=np.int64)

    def site(self, i: int) -> tuple[int, int]:
        return self.dh[i], self.de[i]

    def _refresh(self, i):
        dh, de = _site(self.h, i, self.nb[i], self.nnn[i])
        self.dh[i] = dh
        self.de[i] = de
        want = dh != 0 and de <= 0
        p = self.pos[i]
        if want and p < 0:
            self.pos[i] = len(self.lst)
            self.lst.append(i)
        elif not want and p >= 0:
            last = self.lst.pop()
            if last != i:
                self.lst[p] = last
                self.pos[last] = p
            self.pos[i] = -1

    def flip(self, i: int) -> None:
        """Apply the flip at ``i`` (must be a site) and update the index."""
        h, h0 = self.h, self.h0
        dh, de = self.dh[i], self.de[i]
        if dh == 0:
            raise ValueError(f"vertex {i} is not a flip site")
        r = (h[i] - h0[i]) // 3
        h[i] += dh
        r2 = r + dh // 3
        self.volume += abs(r2) - abs(r)
        self.energy += de
        inner = self.inner
        self._refresh(i)
        for j in self.nb[i]:
            if j >= 0 and inner[j]:
                self._refresh(j)
        for j in self.nnn[i]:
            if inner[j]:
                self._refresh(j)

    def run(self, max_steps: int, rec=None) -> int:
        """Perform up to ``max_steps`` cooling steps; stop early when frozen.

        When ``rec`` is given (an ``(max_steps, 3)`` int64 array), row ``k``
        receives (E, V, allowed count) after the ``k``-th step.
        """
        done = 0
        rng = self.rng
        lst = self.lst
        while done < max_steps and lst:
            self.flip(lst[rng.bounded(len(lst))])
            if rec is not None:
                rec[done, 0] = self.energy
                rec[done, 1] = self.volume
                rec[done, 2] = len(lst)
            done += 1
        self.steps += done
        self._h_arr[:] = self.h
        return done


def monotone_updates(h_top, h_bot, nb, interior, rng_state, n_updates):
    """Apply the same ``n_updates`` heat-bath updates to two height arrays.

    Each update draws ``x = bounded(2 * len(interior))``; the vertex is
    ``interior[x >> 1]`` and the coin ``x & 1``.  Coin 1 raises a local
    minimum by 3, coin 0 lowers a local maximum by 3.  The update preserves the
    pointwise order of heights, which is what makes coupling from the past
    work.  Returns the new RNG state.
    """
    rng = Xoshiro256(state=tuple(int(x) for x in rng_state))
    inner = interior.tolist()
    m = 2 * len(inner)
    nbl = nb.tolist()
    arrays = [h_top.tolist(), h_bot.tolist()]
    for _ in range(n_updates):
        x = rng.bounded(m)
        i = inner[x >> 1]
        row = nbl[i]
        for h in arrays:
            hi = h[i]
            if x & 1:
                if h[row[3]] == hi + 2 and h[row[4]] == hi + 2 and h[row[5]] == hi + 2:
                    h[i] = hi + 3
            elif h[row[0]] == hi - 2 and h[row[1]] == hi - 2 and h[row[2]] == hi - 2:
                h[i] = hi - 3
    h_top[:] = arrays[0]
    h_bot[:] = arrays[1]
    return rng.state


def hull_up(g, h0, ep, eq, lo, hi, lidx, loff, fixed):
    """Raise ``g`` in place to the least fixed point of valley filling and
    edge projection.  Returns False if a fixed vertex would move.

    Along each line the relative height ``(g - h0) / 3`` is lifted to the
    smaller of its running maxima from both ends; each edge ``p -> q`` then
    enforces ``lo <= g[q] - g[p] <= hi`` by raising the lower endpoint.
    """
    lines = [lidx[loff[k]:loff[k + 1]] for k in range(len(loff) - 1)]
    while True:
        before = g.copy()
        r = (g - h0) // 3
        for line in lines:
            v = r[line]
            pre = np.maximum.accumulate(v)
            suf = np.maximum.accumulate(v[::-1])[::-1]
            r[line] = np.maximum(v, np.minimum(pre, suf))
        g[:] = h0 + 3 * r
        while True:
            prev = g.copy()
            np.maximum.at(g, ep, g[eq] - hi)
            np.maximum.at(g, eq, g[ep] + lo)
            if np.array_equal(prev, g):
                break
        if np.any(g[fixed] != h0[fixed]):
            return False
        if np.array_equal(before, g):
            return True


def label_regions(nbr, mask, exterior):
    """Connected components of the masked triangles over ``nbr`` (-1 marks the
    exterior).  With ``exterior`` the outside counts as one extra masked node:
    its component gets label 0.  Returns (labels, count); unmasked triangles
    are labelled -1."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    n = len(mask)
    mask = np.asarray(mask, dtype=bool)
    rows = np.repeat(np.arange(n), 3)
    cols = nbr.reshape(-1)
    cols = np.where(cols < 0, n, cols)
    node_in = np.append(mask, bool(exterior))
    keep = node_in[rows] & node_in[cols]
    g = csr_matrix((np.ones(int(keep.sum()), np.int8), (rows[keep], cols[keep])), shape=(n + 1, n + 1))
    _, raw = connected_components(g, directed=False)
    # renumber in order of first appearance, the exterior first
    ids = np.nonzero(mask)[0]
    seq = np.concatenate([[raw[n]], raw[ids]]) if exterior else raw[ids]
    uniq, first = np.unique(seq, return_index=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    new = rank[np.searchsorted(uniq, seq)]
    labels = np.full(n, -1, dtype=np.int64)
    labels[ids] = new[1:] if exterior else new
    return labels, len(uniq)
