"""Property suites: exhaustive checks on enumerated domains and randomized
checks on larger ones.

Each suite returns a :class:`SuiteReport` listing every checked property with
its instance count and failures; failing instances are kept as tiling files so
they can be replayed.  Checks marked non-gating are recorded as data only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import kernels
from .cooling import CoolingState, verify_allowed_set
from .exact import (
    StateSpace,
    count_by_determinant,
    distances_to,
    exact_times,
    modulus_leq,
    triconvex_oracle,
)
from .hull import (
    boundary_angles,
    has_equal_level_islands,
    is_triconvex,
    lemma1_holds,
    lemma2_sums,
    lemma3_holds,
    merge_events,
    sign_of,
    triconvex_hull,
)
from .lattice import Domain, reference_lozenges, residue
from .rng import Xoshiro256, derive_seed, seed_state
from .tiling import (
    Tiling,
    allowed_flips,
    apply_flip,
    descend,
    energy,
    errorfree_reference,
    extremal_tiling,
    flips,
    islands,
    matching,
    serialize_tiling,
    volume,
)

MAX_KEPT = 3
ALLOWED_DELTA_E = frozenset({0, 2, -2, 4, -4, 6, -6})


@dataclass
class Check:
    name: str
    gating: bool = True
    instances: int = 0
    failures: int = 0
    examples: list[str] = field(default_factory=list)
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, passed: bool, witness: Callable[[], str] | None = None, count: int = 1,
               failed: int | None = None) -> None:
        """Add ``count`` instances; ``failed`` of them failed (all when
        ``passed`` is false and ``failed`` is not given)."""
        self.instances += count
        bad = (0 if passed else count) if failed is None else failed
        if bad:
            self.failures += bad
            if witness is not None and len(self.examples) < MAX_KEPT:
                self.examples.append(witness())


@dataclass
class SuiteReport:
    suite: str
    domain: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, *, gating: bool = True, note: str = "") -> Check:
        c = Check(name, gating=gating, note=note)
        self.checks.append(c)
        return c

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.gating)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.ok else ("FAIL" if c.gating else "INFO")
            extra = f"  ({c.note})" if c.note else ""
            out.append(
                f"{status} {self.suite}/{c.name} [{self.domain}] "
                f"instances={c.instances} failures={c.failures}{extra}"
            )
        return out


def _w(t: Tiling) -> Callable[[], str]:
    return lambda: serialize_tiling(t)


# -- naive oracles ------------------------------------------------------------

def naive_energy(tiling: Tiling) -> int:
    """Errors counted edge by edge from the lozenges themselves.

    Two lozenges meeting along an edge form an error when they have the same
    diagonal direction (they are translates).  Across the domain boundary the
    neighbour is the lozenge of the frozen exterior reference pattern.
    """
    d = tiling.domain
    cls_of = matching(tiling)

    def exterior_class(u) -> int:
        centre = next(v for v in u.vertices if residue(v) == d.center_residue)
        for t1, t2 in reference_lozenges(centre):
            if u in (t1, t2):
                other = t2 if u == t1 else t1
                return next(k for w, k in u.neighbours() if w == other)
        raise AssertionError("exterior triangle outside the reference pattern")

    errors = 0
    for t in d.triangles:
        for u, _ in t.neighbours():
            if u in d.triangles:
                if t < u and cls_of[t] == cls_of[u] and t.partner(cls_of[t]) != u:
                    errors += 1
            elif cls_of[t] == exterior_class(u):
                errors += 1
    return errors


def single_update(h: np.ndarray, nb: np.ndarray, i: int, coin: int) -> None:
    """One CFTP update at vertex ``i`` applied in place to every row of ``h``.

    ``coin = 1`` raises local minima, ``coin = 0`` lowers local maxima.  ``h``
    may be a single height vector or a stack of them.
    """
    hi = h[..., i]
    row = nb[i]
    if coin:
        hit = (h[..., row[3]] == hi + 2) & (h[..., row[4]] == hi + 2) & (h[..., row[5]] == hi + 2)
        h[..., i] = np.where(hit, hi + 3, hi)
    else:
        hit = (h[..., row[0]] == hi - 2) & (h[..., row[1]] == hi - 2) & (h[..., row[2]] == hi - 2)
        h[..., i] = np.where(hit, hi - 3, hi)


def _stride(size: int, budget: int) -> range:
    return range(0, size, max(1, -(-size // budget)))


# -- exhaustive suites --------------------------------------------------------

def suite_lattice(space: StateSpace, label: str = "", *, pair_budget: int = 400,
                  triple_budget: int = 60) -> SuiteReport:
    rep = SuiteReport("lattice", label)
    d = space.domain
    S = space.size
    H = np.array([t.h for t in space.states])  # (S, n_ext)
    h0 = d.h0

    c = rep.add("enumeration_matches_determinant")
    c.record(S == count_by_determinant(d))

    c = rep.add("height_congruence")
    for t in space.states:
        c.record(bool(np.all((t.h - h0) % 3 == 0)), _w(t))

    c = rep.add("volume_zero_iff_error_free")
    for s in range(S):
        c.record((space.volumes[s] == 0) == (space.energies[s] == 0), _w(space.states[s]))

    c = rep.add("energy_matches_naive_scan")
    for t in space.states:
        c.record(energy(t) == naive_energy(t), _w(t))

    c = rep.add("volume_equals_flip_distance")
    dist = distances_to(space, [s for s in range(S) if space.energies[s] == 0])
    for s in range(S):
        c.record(dist[s] == space.volumes[s], _w(space.states[s]))

    cv = rep.add("flip_delta_v_unit")
    ce = rep.add("flip_delta_e_values")
    for s, mv in enumerate(space.moves):
        for tgt, de in mv:
            cv.record(abs(int(space.volumes[tgt] - space.volumes[s])) == 1, _w(space.states[s]))
            ce.record(
                de in ALLOWED_DELTA_E and space.energies[tgt] - space.energies[s] == de,
                _w(space.states[s]),
            )

    c = rep.add("extremal_tilings_bound_lattice")
    top, bot = extremal_tiling(d, "max").h, extremal_tiling(d, "min").h
    for t in space.states:
        c.record(bool(np.all(bot <= t.h) and np.all(t.h <= top)), _w(t))

    keys = {t.key(): s for s, t in enumerate(space.states)}
    nv = d.n_vertices

    def ids(mat: np.ndarray) -> np.ndarray:
        return np.array([keys.get(row[:nv].tobytes(), -1) for row in mat])

    pairs = _stride(S, pair_budget)
    triples = _stride(S, triple_budget)
    c = rep.add("join_meet_closed")
    c_comm = rep.add("commutativity")
    c_abs = rep.add("absorption")
    c_idem = rep.add("idempotence")
    for a in pairs:
        J = np.maximum(H[a], H)
        M = np.minimum(H[a], H)
        bad = int(np.count_nonzero(ids(J) < 0) + np.count_nonzero(ids(M) < 0))
        c.record(True, _w(space.states[a]), count=2 * S, failed=bad)
        c_comm.record(bool(np.array_equal(J, np.maximum(H, H[a])) and np.array_equal(M, np.minimum(H, H[a]))),
                      count=S)
        same = np.broadcast_to(H[a], H.shape)
        c_abs.record(bool(np.array_equal(np.maximum(H[a], M), same)
                          and np.array_equal(np.minimum(H[a], J), same)), count=S)
        c_idem.record(bool(np.array_equal(np.maximum(H[a], H[a]), H[a])
                           and np.array_equal(np.minimum(H[a], H[a]), H[a])))

    c_assoc = rep.add("associativity")
    c_dist = rep.add("distributivity")
    for a in triples:
        for b in triples:
            lhs = np.minimum(H[a], np.maximum(H[b], H))
            rhs = np.maximum(np.minimum(H[a], H[b]), np.minimum(H[a], H))
            c_dist.record(bool(np.array_equal(lhs, rhs)), count=S)
            c_assoc.record(bool(
                np.array_equal(np.maximum(H[a], np.maximum(H[b], H)), np.maximum(np.maximum(H[a], H[b]), H))
                and np.array_equal(np.minimum(H[a], np.minimum(H[b], H)), np.minimum(np.minimum(H[a], H[b]), H))
            ), count=S)
    if len(pairs) < S:
        c.note = c_comm.note = c_abs.note = f"first argument strided by {pairs.step}"
    if len(triples) < S:
        c_dist.note = c_assoc.note = f"first two arguments strided by {triples.step}"
    return rep


def suite_prop1(space: StateSpace, label: str = "") -> SuiteReport:
    rep = SuiteReport("prop1", label)
    c = rep.add("volume_decreasing_allowed_flip")
    cf = rep.add("frozen_iff_error_free")
    for s, mv in enumerate(space.moves):
        t = space.states[s]
        allowed = [(tgt, de) for tgt, de in mv if de <= 0]
        if space.energies[s] > 0:
            c.record(any(space.volumes[tgt] < space.volumes[s] for tgt, _ in allowed), _w(t))
        cf.record((not allowed) == (space.energies[s] == 0), _w(t))
    c = rep.add("every_state_absorbed")
    try:
        exact_times(space)
        c.record(True)
    except RuntimeError:
        c.record(False)
    return rep


def _single_sign(space: StateSpace) -> list[int]:
    return [s for s, t in enumerate(space.states) if sign_of(t) != 2]


def suite_hull(space: StateSpace, label: str = "") -> SuiteReport:
    rep = SuiteReport("hull", label)
    single = _single_sign(space)
    rep.add("mixed_sign_states_skipped", gating=False,
            note=f"{space.size - len(single)} of {space.size}").instances = space.size - len(single)
    tc = [is_triconvex(t).is_triconvex for t in space.states]
    hulls = {s: triconvex_hull(space.states[s]) for s in single}
    c_or = rep.add("hull_equals_bruteforce")
    c_id = rep.add("hull_idempotent")
    c_tc = rep.add("hull_triconvex_and_above")
    c_fix = rep.add("triconvex_input_unchanged")
    for s in single:
        t, h = space.states[s], hulls[s]
        c_id.record(triconvex_hull(h) == h, _w(t))
        c_tc.record(bool(is_triconvex(h)) and modulus_leq(t.rel, h.rel), _w(t))
        if tc[s]:
            c_fix.record(h == t, _w(t))
        try:
            c_or.record(triconvex_oracle(t, space, tc) == h, _w(t))
        except RuntimeError:
            c_or.record(False, _w(t))
    c_mono = rep.add("hull_monotone")
    R = np.array([space.states[s].rel for s in single])
    HR = np.array([hulls[s].rel for s in single])
    def below(x: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.all((x == 0) | ((np.sign(x) == np.sign(Y)) & (np.abs(x) <= np.abs(Y))), axis=1)

    for a in range(len(single)):
        comparable = below(R[a], R)
        bad = int(np.count_nonzero(~below(HR[a], HR[comparable])))
        c_mono.record(True, _w(space.states[single[a]]), count=int(comparable.sum()), failed=bad)
    return rep


def _lemma_checks(rep: SuiteReport) -> dict[str, Check]:
    return {
        "angles": rep.add("angle_law"),
        "l1": rep.add("lemma1_single_triconvex_island"),
        "l1a": rep.add("lemma1_allowed_flip_count", gating=False,
                       note="F = number of allowed flips instead of all flips"),
        "l2": rep.add("lemma2_sum_inequality"),
        "l3": rep.add("lemma3_equal_level_islands"),
        "merge": rep.add("merge_three_sticks"),
    }


def check_lemmas_on(t: Tiling, checks: dict[str, Check]) -> None:
    """Run every lemma check whose hypothesis ``t`` satisfies."""
    if energy(t) == 0 or sign_of(t) == 2:
        return
    dec = islands(t)
    for r in dec.regions:
        try:
            boundary_angles(r.boundary)
            checks["angles"].record(True)
        except ValueError:
            checks["angles"].record(False, _w(t))
    n_isl = len(dec.islands)
    if not allowed_flips(t):
        return
    if n_isl == 1 and is_triconvex(t):
        checks["l1"].record(lemma1_holds(t, "all")[0], _w(t))
        checks["l1a"].record(lemma1_holds(t, "allowed")[0], _w(t))
    if n_isl == 1:
        lhs, rhs = lemma2_sums(t)
        checks["l2"].record(lhs <= rhs, _w(t))
    if has_equal_level_islands(t):
        checks["l3"].record(lemma3_holds(t, "all")[0], _w(t))
        for _, k, sticks in merge_events(t):
            checks["merge"].record(k == 3 and sticks, _w(t))


def suite_lemmas(space: StateSpace, label: str = "") -> SuiteReport:
    rep = SuiteReport("lemmas", label)
    checks = _lemma_checks(rep)
    for t in space.states:
        check_lemmas_on(t, checks)
    return rep


def suite_sampler(space: StateSpace, label: str = "", *, samples: int = 100_000,
                  seed: int = 0, alpha: float = 1e-3) -> SuiteReport:
    from scipy.stats import chisquare

    from .sampling import sample_uniform

    rep = SuiteReport("sampler", label)
    d = space.domain
    nb = d.neighbour_table
    inner = d.interior_index.tolist()
    H = np.array([t.h for t in space.states])
    c = rep.add("cftp_update_monotone")
    for a in range(space.size):
        above = H[np.all(H[a] <= H, axis=1)]
        for i in inner:
            for coin in (0, 1):
                x, y = H[a].copy(), above.copy()
                single_update(x, nb, i, coin)
                single_update(y, nb, i, coin)
                bad = int(np.count_nonzero(~np.all(x <= y, axis=1)))
                c.record(True, _w(space.states[a]), count=len(y), failed=bad)
    c = rep.add("uniformity_chi_square")
    counts = np.zeros(space.size, dtype=np.int64)
    for j in range(samples):
        counts[space.id_of(sample_uniform(d, derive_seed(seed, j)))] += 1
    p = float(chisquare(counts).pvalue)
    c.record(p >= alpha)
    c.note = f"{samples} samples, p = {p:.4g}, alpha = {alpha}"
    return rep


EXHAUSTIVE_SUITES = {
    "lattice": suite_lattice,
    "prop1": suite_prop1,
    "hull": suite_hull,
    "lemmas": suite_lemmas,
    "sampler": suite_sampler,
}


# -- randomized suites --------------------------------------------------------

def _cooling_states(domain: Domain, seed: int, *, one_signed: bool = False
                    ) -> Iterator[tuple[Tiling, CoolingState]]:
    """Visited states of cooling runs from successive uniform samples.

    With ``one_signed`` the runs start alternately from the positive part
    (join with the reference) and the negative part (meet) of each sample.
    """
    from .sampling import sample_uniform
    from .tiling import join, meet

    ref = errorfree_reference(domain)
    run_idx = 0
    while True:
        start = sample_uniform(domain, derive_seed(seed, 2 * run_idx))
        if one_signed:
            start = join(start, ref) if run_idx % 2 == 0 else meet(start, ref)
        state = CoolingState(start.copy(), derive_seed(seed, 2 * run_idx + 1))
        while True:
            yield state.tiling, state
            if state.advance(1) == 0:
                break
        run_idx += 1


def randomized_prop1(domain: Domain, instances: int, seed: int, label: str = "") -> SuiteReport:
    """Prop. 1, flip deltas and the allowed-site index along cooling runs."""
    rep = SuiteReport("prop1", label)
    c1 = rep.add("volume_decreasing_allowed_flip")
    cf = rep.add("frozen_iff_error_free")
    cv = rep.add("flip_delta_v_unit")
    ce = rep.add("flip_delta_e_values")
    ci = rep.add("allowed_index_matches_recompute")
    for k, (t, state) in enumerate(_cooling_states(domain, seed)):
        if k >= instances:
            break
        t = state.sync()
        fl = flips(t)
        allowed = [s for s in fl if s.delta_e <= 0]
        if state.energy > 0:
            c1.record(any(not s.upward for s in allowed), _w(t))
        cf.record((not allowed) == (state.energy == 0), _w(t))
        for s in fl:
            ce.record(s.delta_e in ALLOWED_DELTA_E)
            cv.record(s.delta_v in (1, -1))
        if k % 100 == 0:
            ci.record(verify_allowed_set(state), _w(t))
    return rep


def randomized_hull(domain: Domain, instances: int, seed: int, label: str = "",
                    *, stride: int = 5) -> SuiteReport:
    """Hull idempotence and monotonicity on one-signed states of cooling runs.

    Monotonicity compares each state with a smaller one obtained by a few
    random volume-decreasing flips (which keep the sign).
    """
    rep = SuiteReport("hull", label)
    ci = rep.add("hull_idempotent")
    cm = rep.add("hull_monotone")
    rng = Xoshiro256(seed)
    for k, (t, state) in enumerate(_cooling_states(domain, seed, one_signed=True)):
        if ci.instances >= instances:
            break
        if k % stride:
            continue
        t = state.sync().copy()
        if sign_of(t) == 2:
            continue
        h = triconvex_hull(t)
        ci.record(triconvex_hull(h) == h, _w(t))
        smaller = t.copy()
        descend(smaller, 1 + rng.bounded(10), rng)
        cm.record(modulus_leq(triconvex_hull(smaller).rel, h.rel), _w(t))
    return rep


def randomized_lemmas(domain: Domain, instances: int, seed: int, label: str = "",
                      *, stride: int = 1) -> SuiteReport:
    """Lemma checks on cooling-run states that satisfy their hypotheses.

    Every ``stride``-th visited state is examined; ``instances`` bounds the
    number of examined states that satisfy at least one hypothesis.
    """
    rep = SuiteReport("lemmas", label)
    checks = _lemma_checks(rep)
    examined = 0
    for k, (t, state) in enumerate(_cooling_states(domain, seed, one_signed=True)):
        if examined >= instances:
            break
        if k % stride:
            continue
        t = state.sync().copy()
        if energy(t) == 0 or sign_of(t) == 2:
            continue
        before = sum(c.instances for c in checks.values())
        check_lemmas_on(t, checks)
        if sum(c.instances for c in checks.values()) > before:
            examined += 1
    return rep


def randomized_sampler(domain: Domain, instances: int, seed: int, label: str = "") -> SuiteReport:
    """Co-evolve comparable pairs under shared CFTP updates; order must persist."""
    from .sampling import sample_uniform

    rep = SuiteReport("sampler", label)
    c = rep.add("cftp_update_monotone")
    rng = Xoshiro256(seed)
    nb, inner = domain.neighbour_table, domain.interior_index
    j = 0
    while c.instances < instances:
        top = sample_uniform(domain, derive_seed(seed, j))
        low = top.copy()
        for _ in range(1 + rng.bounded(50)):
            down = [s for s in flips(low) if s.dh < 0]
            if not down:
                break
            apply_flip(low, down[rng.bounded(len(down))])
        a, b = low.h.copy(), top.h.copy()
        st = seed_state(derive_seed(seed, 10**9 + j))
        for _ in range(100):
            st = kernels.monotone_updates(a, b, nb, inner, st, 10)
            c.record(bool(np.all(a <= b)), _w(top))
        j += 1
    return rep


RANDOMIZED_SUITES = {
    "prop1": randomized_prop1,
    "hull": randomized_hull,
    "lemmas": randomized_lemmas,
    "sampler": randomized_sampler,
}


__all__ = [
    "Check", "SuiteReport", "naive_energy", "single_update",
    "suite_lattice", "suite_prop1", "suite_hull", "suite_lemmas", "suite_sampler",
    "randomized_prop1", "randomized_hull", "randomized_lemmas", "randomized_sampler",
    "check_lemmas_on", "EXHAUSTIVE_SUITES", "RANDOMIZED_SUITES",
]
