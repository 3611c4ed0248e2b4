"""The compiled kernels and the pure-Python fallback must agree bit for bit."""
import numpy as np
import pytest

from lozenge_cooling import kernels
from lozenge_cooling.cooling import run
from lozenge_cooling.hull import _hull_tables
from lozenge_cooling.lattice import make_hexagon_domain
from lozenge_cooling.rng import seed_state
from lozenge_cooling.sampling import sample_uniform
from lozenge_cooling.tiling import _triangle_levels, _triangle_tables, errorfree_reference, extremal_tiling, join

needs_compiled = pytest.mark.skipif(kernels.compiled is None, reason="compiled kernels not built")


def test_backend_lookup():
    assert kernels.get_backend("python") is kernels.py
    assert kernels.get_backend() is kernels.active
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("side", [3, 5])
def test_cooling_trajectories_identical(side):
    t0 = extremal_tiling(make_hexagon_domain(side), "max")
    a = run(t0, 11, backend="cython")
    b = run(t0, 11, backend="python")
    assert a.T == b.T
    assert np.array_equal(a.records, b.records)


@needs_compiled
def test_monotone_updates_identical():
    d = make_hexagon_domain(4)
    out = []
    for mod in (kernels.compiled, kernels.py):
        top, bot = extremal_tiling(d, "max").h.copy(), extremal_tiling(d, "min").h.copy()
        mod.monotone_updates(top, bot, d.neighbour_table, d.interior_index, seed_state(5), 3000)
        out.append((top, bot))
    assert np.array_equal(out[0][0], out[1][0]) and np.array_equal(out[0][1], out[1][1])


@needs_compiled
def test_uniform_samples_identical():
    d = make_hexagon_domain(3)
    assert sample_uniform(d, 8, backend="cython") == sample_uniform(d, 8, backend="python")


@needs_compiled
def test_hull_and_labels_identical():
    d = make_hexagon_domain(4)
    p, q, plain, _, lidx, loff, fixed = _hull_tables(d)
    tt = _triangle_tables(d)
    ref = errorfree_reference(d)
    for s in range(4):
        t = join(sample_uniform(d, s), ref)
        hs = []
        for mod in (kernels.compiled, kernels.py):
            g = t.h.copy()
            assert mod.hull_up(g, d.h0, p, q, *plain, lidx, loff, fixed)
            hs.append(g)
        assert np.array_equal(*hs)
        mask = (_triangle_levels(t, tt)[0] >= 1).view(np.uint8)
        for ext in (True, False):
            la, na = kernels.compiled.label_regions(tt.nbr, mask, ext)
            lb, nb = kernels.py.label_regions(tt.nbr, mask, ext)
            assert na == nb and np.array_equal(la, lb)
