from fractions import Fraction

import pytest

from lozenge_cooling.exact import (
    EXACT_COLUMNS,
    TooLarge,
    count_by_determinant,
    enumerate_space,
    exact_csv,
    exact_times,
    macmahon,
    solve_rational,
    strongly_connected_components,
)
from lozenge_cooling.lattice import make_box_domain, make_hexagon_domain


@pytest.mark.parametrize("abc,count", [((1, 1, 1), 2), ((2, 2, 2), 20), ((3, 3, 3), 980), ((4, 4, 4), 232848)])
def test_macmahon(abc, count):
    assert macmahon(*abc) == count


def test_box_count_by_determinant(box2):
    assert count_by_determinant(box2) == 20


def test_honeycomb_three_count():
    assert count_by_determinant(make_hexagon_domain(3)) == 9637056


def test_cap_enforced():
    with pytest.raises(TooLarge):
        enumerate_space(make_hexagon_domain(3), cap=1000)


def test_one_hexagon_times(hex1):
    space = enumerate_space(hex1)
    times = exact_times(space)
    assert space.size == 2
    assert times.worst == 1 and times.average == Fraction(1, 2)


def test_box_times(box2_space):
    times = exact_times(box2_space)
    assert times.worst == 4
    assert times.average == Fraction(19, 10)


def test_honeycomb_two_times(hex2_space):
    times = exact_times(hex2_space)
    assert float(times.worst) == pytest.approx(12.0194, abs=5e-4)
    assert float(times.average) == pytest.approx(4.82302, abs=5e-5)
    assert times.expected[times.worst_state] == times.worst
    # absorbing states have zero expected time
    assert all(times.expected[s] == 0 for s in hex2_space.absorbing())


def test_absorbing_states_are_error_free(hex2_space):
    assert all(hex2_space.energies[s] == 0 for s in hex2_space.absorbing())


def test_solve_rational_small_system():
    a = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    assert solve_rational(a, [Fraction(3), Fraction(5)]) == [Fraction(4, 5), Fraction(7, 5)]


def test_scc_of_cycle_and_tail():
    comps = strongly_connected_components(4, [[1], [2], [0, 3], []])
    assert sorted(map(sorted, comps)) == [[0, 1, 2], [3]]


def test_exact_csv_layout(box2_space):
    text = exact_csv(box2_space, exact_times(box2_space))
    lines = text.splitlines()
    assert lines[0] == ",".join(EXACT_COLUMNS)
    assert len(lines) == 1 + 20 + 2
    assert lines[-1] == "12,20,4,19/10"
