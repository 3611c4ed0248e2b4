# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops, bit-compatible with ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

BACKEND = "cython"


cdef inline uint64_t rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef struct Xoshiro:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t next_u64(Xoshiro* r) nogil:
    cdef uint64_t result = rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = rotl(r.s3, 45)
    return result


cdef inline uint64_t bounded(Xoshiro* r, uint64_t k) nogil:
    # limit = 2**64 - (2**64 mod k); (2**64 mod k) == (-k) mod k in uint64
    cdef uint64_t rem = (<uint64_t>0 - k) % k
    cdef uint64_t x
    while True:
        x = next_u64(r)
        if rem == 0 or x < <uint64_t>0 - rem:
            return x % k


cdef inline void load_state(Xoshiro* r, object state):
    r.s0 = <uint64_t>int(state[0])
    r.s1 = <uint64_t>int(state[1])
    r.s2 = <uint64_t>int(state[2])
    r.s3 = <uint64_t>int(state[3])


cdef inline tuple dump_state(Xoshiro* r):
    return (int(r.s0), int(r.s1), int(r.s2), int(r.s3))


cdef class CoolingKernel:
    """Zero-threshold cooling chain with an O(1) allowed-site index."""

    cdef int64_t[::1] h
    cdef const int64_t[::1] h0
    cdef const int64_t[:, ::1] nb
    cdef const int64_t[:, ::1] nnn
    cdef cnp.int8_t[::1] inner
    cdef int64_t[::1] dh
    cdef int64_t[::1] de
    cdef int64_t[::1] pos
    cdef int64_t[::1] lst
    cdef int64_t n_lst
    cdef public int64_t energy
    cdef public int64_t volume
    cdef public int64_t steps
    cdef Xoshiro rng

    def __init__(self, h, h0, nb, nnn, interior, energy, volume, rng_state):
        cdef Py_ssize_t n_ext = h.shape[0]
        cdef const int64_t[::1] idx = np.ascontiguousarray(interior, dtype=np.int64)
        cdef Py_ssize_t k
        self.h = h
        self.h0 = np.ascontiguousarray(h0, dtype=np.int64)
        self.nb = np.ascontiguousarray(nb, dtype=np.int64)
        self.nnn = np.ascontiguousarray(nnn, dtype=np.int64)
        inner = np.zeros(n_ext, dtype=np.int8)
        inner[np.asarray(idx)] = 1
        self.inner = inner
        self.dh = np.zeros(n_ext, dtype=np.int64)
        self.de = np.zeros(n_ext, dtype=np.int64)
        self.pos = np.full(n_ext, -1, dtype=np.int64)
        self.lst = np.zeros(max(1, idx.shape[0]), dtype=np.int64)
        self.n_lst = 0
        self.energy = energy
        self.volume = volume
        self.steps = 0
        load_state(&self.rng, rng_state)
        for k in range(idx.shape[0]):
            self._refresh(idx[k])

    @property
    def n_allowed(self):
        return self.n_lst

    def rng_state(self):
        return dump_state(&self.rng)

    def allowed(self):
        return np.asarray(self.lst[: self.n_lst]).copy()

    def site(self, Py_ssize_t i):
        return int(self.dh[i]), int(self.de[i])

    cdef void _refresh(self, int64_t i) nogil:
        cdef int64_t hi = self.h[i]
        cdef int64_t d = 0, e = 0, new, hj, p, last
        cdef int k
        if (self.h[self.nb[i, 0]] == hi - 2 and self.h[self.nb[i, 1]] == hi - 2
                and self.h[self.nb[i, 2]] == hi - 2):
            d = -3
        elif (self.h[self.nb[i, 3]] == hi + 2 and self.h[self.nb[i, 4]] == hi + 2
                and self.h[self.nb[i, 5]] == hi + 2):
            d = 3
        if d != 0:
            new = hi + d
            for k in range(6):
                hj = self.h[self.nnn[i, k]]
                e += (new != hj) - (hi != hj)
        self.dh[i] = d
        self.de[i] = e
        p = self.pos[i]
        if d != 0 and e <= 0:
            if p < 0:
                self.pos[i] = self.n_lst
                self.lst[self.n_lst] = i
                self.n_lst += 1
        elif p >= 0:
            self.n_lst -= 1
            last = self.lst[self.n_lst]
            if last != i:
                self.lst[p] = last
                self.pos[last] = p
            self.pos[i] = -1

    cdef void _flip(self, int64_t i) nogil:
        cdef int64_t d = self.dh[i]
        cdef int64_t r = (self.h[i] - self.h0[i]) // 3
        cdef int64_t r2 = r + d // 3
        cdef int64_t j
        cdef int k
        self.h[i] += d
        self.volume += (r2 if r2 >= 0 else -r2) - (r if r >= 0 else -r)
        self.energy += self.de[i]
        self._refresh(i)
        for k in range(6):
            j = self.nb[i, k]
            if j >= 0 and self.inner[j]:
                self._refresh(j)
        for k in range(6):
            j = self.nnn[i, k]
            if self.inner[j]:
                self._refresh(j)

    def flip(self, int64_t i):
        """Apply the flip at ``i`` (must be a site) and update the index."""
        if self.dh[i] == 0:
            raise ValueError(f"vertex {i} is not a flip site")
        self._flip(i)

    def run(self, int64_t max_steps, rec=None):
        """Perform up to ``max_steps`` cooling steps; stop early when frozen."""
        cdef int64_t done = 0
        cdef int64_t[:, ::1] r
        cdef bint record = rec is not None
        if record:
            r = rec
        with nogil:
            while done < max_steps and self.n_lst > 0:
                self._flip(self.lst[bounded(&self.rng, <uint64_t>self.n_lst)])
                if record:
                    r[done, 0] = self.energy
                    r[done, 1] = self.volume
                    r[done, 2] = self.n_lst
                done += 1
        self.steps += done
        return done


def monotone_updates(h_top, h_bot, nb, interior, rng_state, int64_t n_updates):
    """Apply the same heat-bath updates to two height arrays; see _pykernels."""
    cdef int64_t[::1] top = h_top
    cdef int64_t[::1] bot = h_bot
    cdef const int64_t[:, ::1] nbv = np.ascontiguousarray(nb, dtype=np.int64)
    cdef const int64_t[::1] inner = np.ascontiguousarray(interior, dtype=np.int64)
    cdef Xoshiro rng
    cdef uint64_t m = 2 * inner.shape[0]
    cdef uint64_t x
    cdef int64_t i, hi, t
    load_state(&rng, rng_state)
    with nogil:
        for t in range(n_updates):
            x = bounded(&rng, m)
            i = inner[x >> 1]
            if x & 1:
                hi = top[i]
                if top[nbv[i, 3]] == hi + 2 and top[nbv[i, 4]] == hi + 2 and top[nbv[i, 5]] == hi + 2:
                    top[i] = hi + 3
                hi = bot[i]
                if bot[nbv[i, 3]] == hi + 2 and bot[nbv[i, 4]] == hi + 2 and bot[nbv[i, 5]] == hi + 2:
                    bot[i] = hi + 3
            else:
                hi = top[i]
                if top[nbv[i, 0]] == hi - 2 and top[nbv[i, 1]] == hi - 2 and top[nbv[i, 2]] == hi - 2:
                    top[i] = hi - 3
                hi = bot[i]
                if bot[nbv[i, 0]] == hi - 2 and bot[nbv[i, 1]] == hi - 2 and bot[nbv[i, 2]] == hi - 2:
                    bot[i] = hi - 3
    return dump_state(&rng)


def xoshiro_outputs(state, int n):
    """First ``n`` raw outputs from ``state``; used to cross-check the RNG."""
    cdef Xoshiro rng
    load_state(&rng, state)
    return [int(next_u64(&rng)) for _ in range(n)]


def bounded_outputs(state, uint64_t k, int n):
    cdef Xoshiro rng
    load_state(&rng, state)
    return [int(bounded(&rng, k)) for _ in range(n)]


cdef inline int64_t floor3(int64_t x) nogil:
    if x >= 0:
        return x // 3
    return -((-x + 2) // 3)


def hull_up(cnp.int64_t[::1] g, const cnp.int64_t[::1] h0,
            const cnp.int64_t[::1] ep, const cnp.int64_t[::1] eq,
            const cnp.int64_t[::1] lo, const cnp.int64_t[::1] hi,
            const cnp.int64_t[::1] lidx, const cnp.int64_t[::1] loff,
            const cnp.int64_t[::1] fixed):
    """Raise ``g`` in place to the least fixed point of valley filling and
    edge projection.  Returns False if a fixed vertex would move."""
    cdef Py_ssize_t n_lines = loff.shape[0] - 1
    cdef Py_ssize_t n_edges = ep.shape[0]
    cdef Py_ssize_t L, j, a, b, e, longest = 1
    cdef int64_t p, q, v, best, r, cap
    cdef bint changed = True, moved, ok = True
    for L in range(n_lines):
        if loff[L + 1] - loff[L] > longest:
            longest = loff[L + 1] - loff[L]
    cdef cnp.int64_t[::1] suf = np.empty(longest, dtype=np.int64)
    with nogil:
        while changed:
            changed = False
            for L in range(n_lines):
                a = loff[L]
                b = loff[L + 1]
                best = floor3(g[lidx[b - 1]] - h0[lidx[b - 1]])
                for j in range(b - 1, a - 1, -1):
                    r = floor3(g[lidx[j]] - h0[lidx[j]])
                    if r > best:
                        best = r
                    suf[j - a] = best
                best = floor3(g[lidx[a]] - h0[lidx[a]])
                for j in range(a, b):
                    v = lidx[j]
                    r = floor3(g[v] - h0[v])
                    if r > best:
                        best = r
                    cap = best if best < suf[j - a] else suf[j - a]
                    if r < cap:
                        g[v] = h0[v] + 3 * cap
                        changed = True
            moved = True
            while moved:
                moved = False
                for e in range(n_edges):
                    p = ep[e]
                    q = eq[e]
                    if g[q] - hi[e] > g[p]:
                        g[p] = g[q] - hi[e]
                        moved = True
                    if g[p] + lo[e] > g[q]:
                        g[q] = g[p] + lo[e]
                        moved = True
                if moved:
                    changed = True
            for j in range(fixed.shape[0]):
                if g[fixed[j]] != h0[fixed[j]]:
                    ok = False
            if not ok:
                break
    return ok


def label_regions(const cnp.int64_t[:, ::1] nbr, const cnp.uint8_t[::1] mask, bint exterior):
    """Connected components of the masked triangles over ``nbr`` (-1 marks the
    exterior).  With ``exterior`` the outside counts as one extra masked node:
    its component gets label 0.  Returns (labels, count); unmasked triangles
    are labelled -1."""
    cdef Py_ssize_t n = mask.shape[0]
    cdef cnp.int64_t[::1] labels = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t s, top = 0, i, c
    cdef int64_t j, count = 0
    with nogil:
        if exterior:
            for s in range(n):
                if mask[s] and (nbr[s, 0] < 0 or nbr[s, 1] < 0 or nbr[s, 2] < 0):
                    labels[s] = 0
                    stack[top] = s
                    top += 1
            count = 1
        for s in range(-1, n):
            if s >= 0:
                if not mask[s] or labels[s] >= 0:
                    continue
                labels[s] = count
                count += 1
                stack[0] = s
                top = 1
            while top:
                top -= 1
                i = stack[top]
                for c in range(3):
                    j = nbr[i, c]
                    if j >= 0 and mask[j] and labels[j] < 0:
                        labels[j] = labels[i]
                        stack[top] = j
                        top += 1
    return np.asarray(labels), count
