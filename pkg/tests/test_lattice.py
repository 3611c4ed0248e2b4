from pathlib import Path

import numpy as np
import pytest

from lozenge_cooling.lattice import (
    LINE_DIRECTIONS,
    MalformedLine,
    NotConnected,
    NotHexDecomposable,
    NotSimplyConnected,
    Domain,
    domain_from_centers,
    edge,
    make_box_domain,
    make_hexagon_domain,
    make_triangle_domain,
    nnn_lines,
    parse_domain,
    serialize_domain,
)
import itertools

GOLDEN = Path(__file__).parent / "data" / "nnn_lines.golden"


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_honeycomb_hexagon_counts(k):
    d = make_hexagon_domain(k)
    hexes = 3 * k * k - 3 * k + 1
    assert len(d.hex_centers) == hexes
    assert len(d.triangles) == 6 * hexes
    assert d.n_tiles == 3 * hexes


def test_smallest_hexagon():
    d = make_hexagon_domain(1)
    assert len(d.triangles) == 6 and d.n_tiles == 3 and len(d.hex_centers) == 1


def test_box_222_counts():
    d = make_box_domain(2, 2, 2)
    assert len(d.triangles) == 24 and d.n_tiles == 12


@pytest.mark.parametrize("k", [3, 4])
def test_larger_boxes_have_no_errorfree_decomposition(k):
    with pytest.raises(NotHexDecomposable):
        make_box_domain(k, k, k)


def test_triangle_domain_counts():
    d = make_triangle_domain(4)
    assert len(d.hex_centers) == 10 and d.n_tiles == 30


@pytest.mark.parametrize("make", [lambda: make_hexagon_domain(3), lambda: make_box_domain(2, 2, 2),
                                  lambda: make_triangle_domain(4)])
def test_euler_characteristic_of_disk(make):
    d = make()
    verts = {v for t in d.triangles for v in t.vertices}
    edges = {edge(p, q) for t in d.triangles for p, q in itertools.combinations(t.vertices, 2)}
    assert len(verts) - len(edges) + len(d.triangles) == 1


def test_serialization_round_trip():
    d = make_hexagon_domain(2)
    text = serialize_domain(d)
    assert text.startswith("domain v1\n")
    assert parse_domain(text) == d


def test_parse_accepts_comments_and_blank_lines():
    text = serialize_domain(make_hexagon_domain(1))
    lines = text.splitlines()
    noisy = "\n".join([lines[0], "# a comment", ""] + [ln + "   # trailing" for ln in lines[1:]])
    assert parse_domain(noisy) == make_hexagon_domain(1)


def test_parse_rejects_bad_header_and_bad_lines():
    with pytest.raises(MalformedLine):
        parse_domain("tiling v1\n")
    with pytest.raises(MalformedLine):
        parse_domain("domain v1\n0 0 X\n")


def test_two_disjoint_hexagons_not_connected():
    with pytest.raises(NotConnected):
        domain_from_centers([(0, 0), (6, -3)])


def test_ring_is_not_simply_connected():
    ring = [c for c in make_hexagon_domain(2).hex_centers if c != (0, 0)]
    with pytest.raises(NotSimplyConnected):
        domain_from_centers(ring)


def test_missing_triangle_breaks_decomposition():
    d = make_hexagon_domain(2)
    text = serialize_domain(d).splitlines()
    tri_lines = [i for i, ln in enumerate(text) if ln.endswith((" U", " D"))]
    del text[tri_lines[0]]
    with pytest.raises((NotHexDecomposable, NotSimplyConnected)):
        parse_domain("\n".join(text) + "\n")


def test_nnn_lines_golden():
    out = []
    for k in (1, 2):
        d = make_hexagon_domain(k)
        for f in range(3):
            for line in nnn_lines(d, f):
                coords = " ".join(f"{a},{b}" for a, b in (d.ext_vertices[i] for i in line))
                out.append(f"hexagon{k} family{f} {coords}")
    assert "\n".join(out) + "\n" == GOLDEN.read_text()


def test_nnn_lines_side_one_has_two_lines_of_two():
    d = make_hexagon_domain(1)
    for f in range(3):
        lengths = sorted(len(x) for x in nnn_lines(d, f))
        assert lengths == [1, 1, 1, 2, 2]


@pytest.mark.parametrize("k", [1, 2, 4])
def test_nnn_lines_partition_and_direction(k):
    d = make_hexagon_domain(k)
    for f in range(3):
        lines = nnn_lines(d, f)
        flat = np.concatenate(lines)
        assert sorted(flat.tolist()) == list(range(d.n_vertices))
        for line in lines:
            pts = np.array([d.ext_vertices[i] for i in line])
            assert all(tuple(s) == LINE_DIRECTIONS[f] for s in np.diff(pts, axis=0))


def test_reference_heights_are_three_consecutive_values():
    d = make_hexagon_domain(4)
    vals = set(d.h0[d.interior_index].tolist())
    assert len(vals) == 3 and max(vals) - min(vals) == 2


def test_domain_is_hashable_and_compares_by_content():
    assert make_hexagon_domain(2) == make_hexagon_domain(2)
    assert len({make_hexagon_domain(2), make_hexagon_domain(2)}) == 1
    assert isinstance(make_hexagon_domain(2), Domain)
