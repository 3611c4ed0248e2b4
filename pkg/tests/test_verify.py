import pytest

from lozenge_cooling.lattice import make_hexagon_domain
from lozenge_cooling.verify import (
    Check,
    SuiteReport,
    randomized_hull,
    randomized_lemmas,
    randomized_prop1,
    randomized_sampler,
    suite_hull,
    suite_lattice,
    suite_lemmas,
    suite_prop1,
    suite_sampler,
)


def test_check_counts_failures_and_keeps_witnesses():
    c = Check("x")
    c.record(True)
    c.record(False, lambda: "w1")
    c.record(True, count=10, failed=2, witness=lambda: "w2")
    assert (c.instances, c.failures, c.examples) == (12, 3, ["w1", "w2"])
    assert not c.ok


def test_report_gates_only_on_gating_checks():
    rep = SuiteReport("demo", "d")
    rep.add("info", gating=False).record(False)
    rep.add("real").record(True)
    assert rep.ok
    assert rep.lines()[0].startswith("INFO demo/info [d]")
    assert rep.lines()[1].startswith("PASS demo/real [d]")
    rep["real"].record(False)
    assert not rep.ok and rep.lines()[1].startswith("FAIL")


@pytest.mark.parametrize("suite", [suite_lattice, suite_prop1, suite_hull])
def test_exhaustive_suites_pass_on_small_domains(suite, box2_space, hex2_space):
    for space in (box2_space, hex2_space):
        rep = suite(space, "t")
        assert rep.ok, rep.lines()
        assert all(c.instances > 0 for c in rep.checks if c.gating)


def test_lemma_suite_flags_only_the_sum_inequality(hex2_space):
    rep = suite_lemmas(hex2_space, "hex2")
    failing = [c.name for c in rep.checks if c.gating and not c.ok]
    assert failing == ["lemma2_sum_inequality"]
    assert rep["lemma2_sum_inequality"].examples
    assert rep["angle_law"].ok and rep["merge_three_sticks"].ok


def test_sampler_suite_small(box2_space):
    rep = suite_sampler(box2_space, "box", samples=2000, seed=1)
    assert rep.ok, rep.lines()


def test_randomized_suites_run():
    d = make_hexagon_domain(4)
    for fn in (randomized_prop1, randomized_hull, randomized_sampler):
        rep = fn(d, 300, 3, "hex4")
        assert rep.ok, rep.lines()
    rep = randomized_lemmas(d, 100, 3, "hex4")
    assert all(c.ok for c in rep.checks if c.gating and c.name != "lemma2_sum_inequality")
