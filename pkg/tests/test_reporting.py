import math
import re
import xml.etree.ElementTree as ET

import pytest

from lozenge_cooling.lattice import make_hexagon_domain
from lozenge_cooling.reporting import (
    OBSERVABLE_COLUMNS,
    SCALING_COLUMNS,
    SUMMARY_COLUMNS,
    DegenerateInput,
    fit_power_law,
    level_colour,
    linear_fit,
    mean_stderr,
    observables_csv,
    observables_experiment,
    observables_fits,
    observations_from_trials,
    render_strip,
    render_svg,
    scaling_csv,
    scaling_experiment,
    summary_csv,
)
from lozenge_cooling.sampling import sample_uniform
from lozenge_cooling.tiling import errorfree_reference, extremal_tiling, flip_at, flipped

SVG = "{http://www.w3.org/2000/svg}"


def test_power_law_recovers_exact_exponent():
    fit = fit_power_law([(n, 0.5 * n**1.5) for n in (10, 20, 40, 80)])
    assert fit.exponent == pytest.approx(1.5)
    assert fit.constant == pytest.approx(0.5)
    assert fit.r2 == pytest.approx(1.0)


def test_degenerate_fits_rejected():
    with pytest.raises(DegenerateInput):
        fit_power_law([(1, 1), (2, 2)])
    with pytest.raises(DegenerateInput):
        fit_power_law([(1, 1), (2, 0), (3, 3)])
    with pytest.raises(DegenerateInput):
        linear_fit([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateInput):
        mean_stderr([])


def test_mean_stderr_uses_unbiased_variance():
    m, se = mean_stderr([1, 2, 3, 4])
    assert m == 2.5 and se == pytest.approx(math.sqrt(5 / 3) / 2)
    assert mean_stderr([7]) == (7.0, 0.0)


def test_scaling_experiment_shapes_and_csv():
    pts, res = scaling_experiment("worst", [2, 3], 3, 1)
    assert [p.side for p in pts] == [2, 3] and all(p.trials == 3 for p in pts)
    assert all(r.T >= r.initial_volume for r in res)
    lines = scaling_csv(res).splitlines()
    assert lines[0] == ",".join(SCALING_COLUMNS) and len(lines) == 7
    assert all(line.endswith(",") for line in lines[1:])  # wall time left blank
    assert summary_csv("worst", pts).splitlines()[0] == ",".join(SUMMARY_COLUMNS)


def test_scaling_rejects_bad_arguments():
    with pytest.raises(ValueError):
        scaling_experiment("worst", [3, 2], 1, 0)
    with pytest.raises(ValueError):
        scaling_experiment("worst", [2], 0, 0)


def test_observables_match_average_trial_initial_states():
    _, res = scaling_experiment("average", [2, 3, 4], 2, 5)
    obs = observables_experiment([2, 3, 4], 2, 5)
    assert observations_from_trials(res) == obs
    assert observables_csv(obs).splitlines()[0] == ",".join(OBSERVABLE_COLUMNS)
    assert set(observables_fits(obs)) == {"V_vs_n", "E_vs_n", "H_vs_log_n"}


def test_svg_has_one_polygon_per_lozenge(hex2):
    t = sample_uniform(hex2, 1)
    for mode in ("plain", "shaded", "height"):
        root = ET.fromstring(render_svg(t, mode))
        assert root.get("version") == "1.1"
        assert len(root.findall(f".//{SVG}polygon")) == hex2.n_tiles


def test_height_mode_colours_raised_tiles(hex2):
    r = errorfree_reference(hex2)
    t = flipped(r, flip_at(r, (0, 0)))
    fills = re.findall(r'fill="(#[0-9a-f]{6})"', render_svg(t, "height"))
    assert fills.count(level_colour(1)) == 3
    assert fills.count(level_colour(0)) == hex2.n_tiles - 3


def test_error_overlay_draws_segments(hex1):
    svg = render_svg(extremal_tiling(hex1, "max"), errors=True)
    assert svg.count('class="error"') > 0
    assert 'class="error"' not in render_svg(errorfree_reference(hex1), errors=True)


def test_level_colours_clamp():
    assert level_colour(9) == level_colour(4) and level_colour(-9) == level_colour(-4)
    assert level_colour(0) == "#ffffff"


def test_strip_places_frames_side_by_side(hex2):
    frames = [extremal_tiling(hex2, "max"), errorfree_reference(hex2)]
    root = ET.fromstring(render_strip(frames))
    assert len(root.findall(f".//{SVG}polygon")) == 2 * hex2.n_tiles
    with pytest.raises(ValueError):
        render_strip([])
