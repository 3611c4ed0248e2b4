"""Initial states: maximal tiling, exact uniform samples, reference, files.

Uniform samples come from monotone coupling from the past.  The single-site
update (pick an interior vertex and a coin; raise a local minimum on heads,
lower a local maximum on tails) preserves the pointwise order of height
functions, so once the chains started at the top and at the bottom of the
tiling lattice agree, every chain has coalesced and the common state is an
exact sample of the uniform distribution.

Randomness is replayed rather than stored: block ``j`` of updates (covering
times ``[-T0 2^j, -T0 2^(j-1))``, block 0 covering ``[-T0, 0)``) is always
driven by the stream ``derive_seed(seed, j)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from . import kernels
from .lattice import Domain
from .rng import derive_seed, seed_state
from .tiling import Tiling, errorfree_reference, extremal_tiling, parse_tiling


class NoCoalescence(RuntimeError):
    """CFTP did not coalesce within the configured number of doublings."""


Mode = Literal["max", "uniform", "errorfree", "file"]


@dataclass(frozen=True)
class SamplerConfig:
    mode: Mode = "max"
    seed: int = 0
    cftp_start_epoch: int | None = None  # default: number of interior vertices
    path: str | None = None
    max_doublings: int = 40


def block_length(start_epoch: int, j: int) -> int:
    return start_epoch if j == 0 else start_epoch << (j - 1)


def sample_uniform(
    domain: Domain,
    seed: int,
    *,
    start_epoch: int | None = None,
    max_doublings: int = 40,
    backend: str | None = None,
    stats: dict | None = None,
) -> Tiling:
    """An exactly uniform random tiling of ``domain``."""
    mod = kernels.get_backend(backend)
    interior = domain.interior_index
    if len(interior) == 0:
        return errorfree_reference(domain)
    nb = domain.neighbour_table
    top0 = extremal_tiling(domain, "max").h
    bot0 = extremal_tiling(domain, "min").h
    t0 = start_epoch if start_epoch is not None else len(interior)
    if t0 <= 0:
        raise ValueError("start epoch must be positive")
    for m in range(max_doublings + 1):
        top = top0.copy()
        bot = bot0.copy()
        for j in range(m, -1, -1):
            mod.monotone_updates(top, bot, nb, interior,
                                 seed_state(derive_seed(seed, j)), block_length(t0, j))
        if np.array_equal(top, bot):
            if stats is not None:
                stats["doublings"] = m
                stats["updates"] = t0 << m
            return Tiling(domain, top, check=False)
    raise NoCoalescence(f"no coalescence after {t0 << max_doublings} updates")


def initial_state(domain: Domain | None, config: SamplerConfig) -> Tiling:
    """Dispatch on ``config.mode``."""
    if config.mode == "file":
        if config.path is None:
            raise ValueError("file mode needs a path")
        t = parse_tiling(Path(config.path).read_text())
        if domain is not None and t.domain != domain:
            from .tiling import DomainMismatch

            raise DomainMismatch("tiling file is for a different domain")
        return t
    if domain is None:
        raise ValueError(f"mode {config.mode!r} needs a domain")
    if config.mode == "max":
        return extremal_tiling(domain, "max")
    if config.mode == "errorfree":
        return errorfree_reference(domain)
    if config.mode == "uniform":
        return sample_uniform(domain, config.seed, start_epoch=config.cftp_start_epoch,
                              max_doublings=config.max_doublings)
    raise ValueError(f"unknown mode {config.mode!r}")


__all__ = ["SamplerConfig", "NoCoalescence", "sample_uniform", "initial_state", "block_length"]
