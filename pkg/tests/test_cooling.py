import numpy as np
import pytest

from lozenge_cooling.cooling import (
    CoolingState,
    PropertyViolation,
    TRAJECTORY_COLUMNS,
    cooling_time,
    default_step_limit,
    run,
    step,
    verify_allowed_set,
)
from lozenge_cooling.lattice import make_hexagon_domain
from lozenge_cooling.tiling import allowed_flips, energy, errorfree_reference, extremal_tiling, volume


def test_error_free_start_is_frozen_immediately(hex2):
    tr = run(errorfree_reference(hex2), 0)
    assert tr.T == 0 and tr.stop_reason == "Frozen" and tr.final_error_free


def test_one_hexagon_freezes_in_one_step(hex1):
    tr = run(extremal_tiling(hex1, "max"), 3)
    assert tr.T == 1 and tr.final_error_free
    assert tr.energies.tolist() == [6, 0]
    assert tr.volumes.tolist() == [1, 0]


@pytest.mark.parametrize("seed", range(5))
def test_run_ends_error_free_and_volume_is_lower_bound(hex2, seed):
    t0 = extremal_tiling(hex2, "max")
    tr = run(t0, seed, verify=True)
    assert tr.stop_reason == "Frozen" and tr.final_error_free
    assert tr.T >= volume(t0)
    assert np.all(np.abs(np.diff(tr.volumes)) == 1)
    assert set(np.diff(tr.energies).tolist()) <= {0, -2, -4, -6}


def test_phi_column_is_4v_plus_e(hex2):
    tr = run(extremal_tiling(hex2, "max"), 1)
    assert np.array_equal(tr.records[:, 4], 4 * tr.volumes + tr.energies)


def test_step_limit_stops_early():
    d = make_hexagon_domain(5)
    tr = run(extremal_tiling(d, "max"), 0, step_limit=10)
    assert tr.T == 10 and tr.stop_reason == "StepLimit"


def test_default_limit_is_100_n_squared():
    assert default_step_limit(21) == 100 * 21 * 21


def test_same_seed_same_trajectory():
    d = make_hexagon_domain(4)
    a, b = run(extremal_tiling(d), 9), run(extremal_tiling(d), 9)
    assert np.array_equal(a.records, b.records)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == ",".join(TRAJECTORY_COLUMNS)


def test_run_leaves_initial_tiling_alone(hex2):
    t0 = extremal_tiling(hex2, "max")
    before = t0.h.copy()
    run(t0, 0)
    assert np.array_equal(t0.h, before)


def test_single_steps_track_allowed_set(hex2):
    state = CoolingState(extremal_tiling(hex2, "max").copy(), 4)
    while step(state) == "Continued":
        assert verify_allowed_set(state)
        assert {s.vertex for s in state.allowed_sites()} == {s.vertex for s in allowed_flips(state.tiling)}
        assert state.energy == energy(state.tiling.copy())
    assert state.energy == 0


def test_snapshots_hit_multiples_and_final(hex2):
    seen = []
    tr = run(extremal_tiling(hex2, "max"), 2, snapshot_every=5, hook=lambda t, _: seen.append(t))
    assert seen[0] == 0 and seen[-1] == tr.T
    assert all(t % 5 == 0 for t in seen[:-1])


def test_cooling_time_matches_run(hex2):
    t0 = extremal_tiling(hex2, "max")
    T, e, frozen = cooling_time(t0, 6)
    assert (T, e, frozen) == (run(t0, 6).T, 0, True)


def test_property_violation_is_an_assertion():
    assert issubclass(PropertyViolation, AssertionError)
