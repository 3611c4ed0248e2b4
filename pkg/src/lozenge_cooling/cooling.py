"""The zero-threshold cooling chain.

At every step a flip is chosen uniformly among those that do not increase the
energy and applied; the chain stops (is *frozen*) when no such flip exists.
The hot loop lives in :mod:`lozenge_cooling.kernels`; this module wraps it with
trajectory recording, snapshot hooks and a verification mode that checks the
incremental allowed-site index and the volume-decreasing-flip property at
every step.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from . import kernels
from .rng import seed_state
from .tiling import FlipSite, Tiling, _make_site, energy, flips, volume

StopReason = Literal["Frozen", "StepLimit"]

TRAJECTORY_COLUMNS = ("t", "energy", "volume", "allowed_flips", "phi")


class PropertyViolation(AssertionError):
    """A checked invariant failed during a verification-mode run."""


def default_step_limit(n_tiles: int) -> int:
    return 100 * n_tiles * n_tiles


@dataclass
class Trajectory:
    """Per-step records ``(t, E, V, F, phi)`` and how the run ended.

    ``F`` is the number of allowed (energy non-increasing) flips.
    """

    records: np.ndarray
    T: int
    stop_reason: StopReason
    final_error_free: bool
    seed: int = 0

    @property
    def energies(self) -> np.ndarray:
        return self.records[:, 1]

    @property
    def volumes(self) -> np.ndarray:
        return self.records[:, 2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        w.writerows(self.records.tolist())
        w.writerow(["T", self.T, self.stop_reason])
        return buf.getvalue()


class CoolingState:
    """A tiling together with the chain's allowed-site index and RNG."""

    def __init__(self, tiling: Tiling, seed: int, *, backend: str | None = None):
        self.tiling = tiling
        self.seed = seed
        d = tiling.domain
        mod = kernels.get_backend(backend)
        if not tiling.h.flags.c_contiguous or tiling.h.dtype != np.int64:
            tiling.h = np.ascontiguousarray(tiling.h, dtype=np.int64)
        self.kernel = mod.CoolingKernel(
            tiling.h, d.h0, d.neighbour_table, d.nnn_table, d.interior_index,
            energy(tiling), volume(tiling), seed_state(seed),
        )

    @property
    def step(self) -> int:
        return int(self.kernel.steps)

    @property
    def energy(self) -> int:
        return int(self.kernel.energy)

    @property
    def volume(self) -> int:
        return int(self.kernel.volume)

    @property
    def n_allowed(self) -> int:
        return int(self.kernel.n_allowed)

    def sync(self) -> Tiling:
        """Bring the tiling's caches in line with the kernel and return it."""
        t = self.tiling
        t._energy = self.energy
        t._volume = self.volume
        t._sites = None
        return t

    def allowed_sites(self) -> list[FlipSite]:
        t = self.sync()
        out = []
        for i in sorted(self.kernel.allowed().tolist()):
            dh, de = self.kernel.site(i)
            out.append(_make_site(t, i, dh, de))
        return out

    def advance(self, max_steps: int, rec: np.ndarray | None = None) -> int:
        done = int(self.kernel.run(max_steps, rec))
        self.sync()
        return done


def step(state: CoolingState) -> Literal["Continued", "Frozen"]:
    """One step of the chain; the state is unchanged when frozen."""
    return "Continued" if state.advance(1) else "Frozen"


def verify_allowed_set(state: CoolingState) -> bool:
    """Compare the incremental allowed-site index with a full recomputation."""
    t = state.sync()
    fresh = Tiling(t.domain, t.h.copy(), check=False)
    expected = {(s.vertex, s.dh, s.delta_e) for s in flips(fresh) if s.delta_e <= 0}
    got = {(s.vertex, s.dh, s.delta_e) for s in state.allowed_sites()}
    return (
        expected == got
        and state.energy == energy(fresh)
        and state.volume == volume(fresh)
    )


def check_volume_decreasing_site(state: CoolingState) -> None:
    """Whenever E > 0, some allowed flip must lower the volume."""
    if state.energy > 0 and not any(not s.upward for s in state.allowed_sites()):
        raise PropertyViolation(
            f"no allowed volume-decreasing flip at E={state.energy}, V={state.volume}"
        )


def run(
    initial: Tiling,
    seed: int,
    step_limit: int | None = None,
    *,
    record: bool = True,
    snapshot_every: int = 0,
    hook: Callable[[int, Tiling], None] | None = None,
    verify: bool = False,
    backend: str | None = None,
) -> Trajectory:
    """Run the cooling chain from a copy of ``initial`` until frozen.

    ``step_limit`` of ``None`` means ``100 n^2``; ``0`` means unlimited.  With
    ``snapshot_every = N > 0`` the hook is called with ``(t, tiling)`` at
    ``t = 0, N, 2N, ...`` and at the final step.  Verification mode checks the
    allowed-site index and the existence of a volume-decreasing allowed flip
    at every visited state, raising :class:`PropertyViolation` otherwise.
    """
    n = initial.domain.n_tiles
    limit = default_step_limit(n) if step_limit is None else step_limit
    unlimited = limit == 0
    state = CoolingState(initial.copy(), seed, backend=backend)
    rows = [(0, state.energy, state.volume, state.n_allowed)]
    chunk = 1 if verify else (snapshot_every if snapshot_every > 0 else 1 << 16)
    if hook is not None:
        hook(0, state.tiling)
    t = 0
    while True:
        if verify:
            if not verify_allowed_set(state):
                raise PropertyViolation(f"allowed-site index out of sync at t={t}")
            check_volume_decreasing_site(state)
        budget = chunk if unlimited else min(chunk, limit - t)
        if budget <= 0 or state.n_allowed == 0:
            break
        rec = np.empty((budget, 3), dtype=np.int64) if record else None
        done = state.advance(budget, rec)
        if record and done:
            steps = np.arange(t + 1, t + done + 1, dtype=np.int64)
            rows.append(np.column_stack([steps, rec[:done]]))
        t += done
        if hook is not None and snapshot_every > 0 and (t % snapshot_every == 0 or state.n_allowed == 0):
            hook(t, state.tiling)
    frozen = state.n_allowed == 0
    if record:
        parts = [np.array([rows[0]], dtype=np.int64)] + rows[1:]
        body = np.concatenate(parts, axis=0)
    else:
        body = np.array([[t, state.energy, state.volume, state.n_allowed]], dtype=np.int64)
    phi = 4 * body[:, 2] + body[:, 1]
    records = np.column_stack([body, phi])
    return Trajectory(
        records=records,
        T=t,
        stop_reason="Frozen" if frozen else "StepLimit",
        final_error_free=state.energy == 0,
        seed=seed,
    )


def cooling_time(initial: Tiling, seed: int, step_limit: int | None = None,
                 backend: str | None = None) -> tuple[int, int, bool]:
    """(T, final energy, frozen) without recording a trajectory."""
    tr = run(initial, seed, step_limit, record=False, backend=backend)
    return tr.T, int(tr.records[-1, 1]), tr.stop_reason == "Frozen"


__all__ = [
    "Trajectory", "CoolingState", "PropertyViolation", "TRAJECTORY_COLUMNS",
    "default_step_limit", "step", "run", "verify_allowed_set",
    "check_volume_decreasing_site", "cooling_time",
]
