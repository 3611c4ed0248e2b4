import json

import pytest

from lozenge_cooling.cli import main
from lozenge_cooling.lattice import make_hexagon_domain, serialize_domain
from lozenge_cooling.tiling import extremal_tiling, parse_tiling, serialize_tiling


def test_run_writes_trajectory_and_config(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["run", "--side", "2", "--seed", "1", "--trajectory", str(out)]) == 0
    assert out.read_text().startswith("t,")
    cfg = json.loads((tmp_path / "traj.csv.config.json").read_text())
    assert cfg["seed"] == 1 and cfg["side"] == 2


def test_existing_output_needs_force(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    out.write_text("keep")
    assert main(["run", "--side", "2", "--seed", "1", "--trajectory", str(out)]) == 1
    assert out.read_text() == "keep"
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileExistsError"
    assert main(["run", "--side", "2", "--seed", "1", "--trajectory", str(out), "--force"]) == 0


def test_usage_errors_exit_1(capsys):
    assert main(["run", "--seed", "1"]) == 1
    assert main(["scale", "--mode", "worst"]) == 1
    assert json.loads(capsys.readouterr().err.splitlines()[-1])["error"] == "usage"


def test_run_with_svg_snapshots(tmp_path):
    d = tmp_path / "svg"
    assert main(["run", "--side", "2", "--seed", "0", "--snapshot-every", "3", "--svg-dir", str(d)]) == 0
    assert (d / "strip.svg").exists() and (d / "step_000000000.svg").exists()


def test_run_from_domain_and_tiling_files(tmp_path):
    dom = tmp_path / "d.domain"
    dom.write_text(serialize_domain(make_hexagon_domain(2)))
    til = tmp_path / "t.tiling"
    til.write_text(serialize_tiling(extremal_tiling(make_hexagon_domain(2), "max")))
    assert main(["run", "--domain", str(dom), "--seed", "3", "--init", "uniform"]) == 0
    assert main(["run", "--seed", "3", "--init", f"file:{til}"]) == 0


def test_scale_csv_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["scale", "--mode", "average", "--sides", "2,3", "--trials", "3",
                     "--seed", "0x10", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "mode,side,n,trial,seed,T,final_energy,wall_ms"


def test_exact_box(tmp_path):
    out = tmp_path / "exact.csv"
    assert main(["exact", "--shape", "box", "--side", "2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[-1] == "12,20,4,19/10"


def test_hull_and_render(tmp_path):
    d = make_hexagon_domain(3)
    src = tmp_path / "t.tiling"
    src.write_text(serialize_tiling(extremal_tiling(d, "max")))
    out = tmp_path / "h.tiling"
    assert main(["hull", "--in", str(src), "--out", str(out)]) == 0
    assert parse_tiling(out.read_text()) == extremal_tiling(d, "max")
    svg = tmp_path / "t.svg"
    assert main(["render", "--in", str(src), "--mode", "height", "--out", str(svg)]) == 0
    assert svg.read_text().count("<polygon") == d.n_tiles


def test_verify_exit_codes(tmp_path, capsys):
    assert main(["verify", "--suite", "prop1", "--shape", "box", "--side", "2"]) == 0
    fails = tmp_path / "fails"
    code = main(["verify", "--suite", "lemmas", "--side", "2", "--failures-dir", str(fails)])
    assert code == 2
    assert "FAIL lemmas/lemma2_sum_inequality" in capsys.readouterr().out
    assert any(fails.iterdir())


def test_verify_randomized_needs_seed(capsys):
    assert main(["verify", "--suite", "prop1", "--side", "6"]) == 1
    assert main(["verify", "--suite", "prop1", "--side", "6", "--seed", "1", "--instances", "50"]) == 0


def test_observables(tmp_path, capsys):
    out = tmp_path / "obs.csv"
    assert main(["observables", "--sides", "2,3,4", "--trials", "2", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("side,n,trial,V,E,H\n")
    assert "H_vs_log_n" in capsys.readouterr().out


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
