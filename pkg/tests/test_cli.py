import math
from pathlib import Path

import numpy as np
import pytest

from aris_beampattern import cli
from aris_beampattern.beampattern import ismr_db
from aris_beampattern.outer import build_problem
from aris_beampattern.projections import BM, PAR

ROOT = Path(__file__).resolve().parents[1]
DESK = ROOT / "scenarios" / "desk.toml"
CSVS = ("beampattern.csv", "trace.csv", "waveform.csv", "ris.csv")


def summary(path):
    return dict(line.split("=", 1) for line in Path(path).read_text().splitlines())


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = cli.main(["synthesize", str(DESK), "--out", str(out), "--quiet"])
    return code, out


def test_dbm_conversion():
    assert cli.dbm_to_watt(-80.0) == pytest.approx(1e-11, rel=1e-12)
    assert cli.dbm_to_watt(30.0) == pytest.approx(1.0)
    sc = cli.parse_scenario("[channel]\nsigma_v2_dBm = -70\n").scenario
    assert sc.channel.sigma_v2 == pytest.approx(1e-10, rel=1e-12)


def test_defaults_follow_the_reference_setup():
    sc = cli.parse_scenario("").scenario
    g = sc.geometry
    assert (g.L1, g.N, g.L2, g.theta_p) == (10, 32, 64, 10.0)
    assert sc.varsigma == 5.0 and sc.PA == 1.0
    assert sc.channel.K_R == 3 and sc.channel.PL0_dB == -30 and sc.channel.alpha == 2.2
    assert sc.mainlobe.intervals == ((-11.0, 11.0),)
    assert cli.parse_scenario("").grid_step == 0.1


def test_unknown_key_names_key_and_line(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[array]\nL1 = 4\nbogus = 3\n")
    assert cli.main(["synthesize", str(bad), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "bogus" in err and "line 3" in err


def test_bad_value_is_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[waveform]\nconstraint = \"PAR\"\neta = 0.5\n")
    assert cli.main(["baseline", str(bad), "--out", str(tmp_path)]) == 1
    assert "eta" in capsys.readouterr().err


def test_constraint_sections_parse():
    sc = cli.parse_scenario('[waveform]\nconstraint = "bm"\ndelta = 0.2\n').scenario
    assert sc.constraint == BM(1.0, 0.2)
    sc = cli.parse_scenario('[waveform]\nconstraint = "PAR"\neta = 2\n').scenario
    assert isinstance(sc.constraint, PAR) and sc.constraint.eta == 2.0


def test_synthesize_writes_artifacts(desk_run):
    code, out = desk_run
    assert code in (0, 2)
    for name in CSVS + ("summary.txt",):
        assert (out / name).exists()
    s = summary(out / "summary.txt")
    assert float(s["ISMR_dB"]) == pytest.approx(
        float(s["sidelobe_dB"]) - float(s["mainlobe_dB"]), abs=1e-9)
    head = (out / "beampattern.csv").read_text().splitlines()
    assert head[0] == "theta_deg,P_dB" and len(head) == 182
    assert (out / "trace.csv").read_text().startswith("t,ISMR_dB,mu,")


def test_rerun_is_byte_identical(desk_run, tmp_path):
    _, out = desk_run
    cli.main(["synthesize", str(DESK), "--out", str(tmp_path), "--quiet"])
    for name in CSVS:
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_evaluate_round_trip(desk_run, capsys):
    _, out = desk_run
    capsys.readouterr()
    code = cli.main(["evaluate", str(DESK), "--waveform", str(out / "waveform.csv"),
                     "--ris", str(out / "ris.csv")])
    assert code == 0
    got = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    ref = summary(out / "summary.txt")
    assert float(got["ISMR_dB"]) == pytest.approx(float(ref["ISMR_dB"]), abs=1e-9)


def test_evaluate_flags_infeasible_waveform(desk_run, tmp_path, capsys):
    _, out = desk_run
    x = cli.read_complex_csv(out / "waveform.csv")
    x[0] *= 1.5
    (tmp_path / "w.csv").write_text(cli.complex_csv(x))
    code = cli.main(["evaluate", str(DESK), "--waveform", str(tmp_path / "w.csv"),
                     "--ris", str(out / "ris.csv")])
    assert code == 2
    got = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    assert float(got["waveform_violation"]) == pytest.approx(0.5, rel=1e-9)


def test_evaluate_zero_ris_matches_ris_free_ismr(desk_run, tmp_path, capsys):
    _, out = desk_run
    x = cli.read_complex_csv(out / "waveform.csv")
    (tmp_path / "v.csv").write_text(cli.complex_csv(np.zeros(8)))
    capsys.readouterr()
    cli.main(["evaluate", str(DESK), "--waveform", str(out / "waveform.csv"),
              "--ris", str(tmp_path / "v.csv")])
    got = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    pb = build_problem(cli.load_scenario(DESK).scenario)
    assert float(got["ISMR_dB"]) == pytest.approx(ismr_db(x, np.zeros(8), pb.G, pb.isets),
                                                  abs=1e-9)


def test_baseline_equals_ris_free_synthesize(tmp_path):
    text = DESK.read_text().replace("[regions]", '[aris]\nmode = "ris_free"\n\n[regions]')
    (tmp_path / "free.toml").write_text(text)
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    cli.main(["baseline", str(DESK), "--out", str(a), "--quiet"])
    cli.main(["synthesize", str(tmp_path / "free.toml"), "--out", str(b), "--quiet"])
    for name in CSVS:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert not np.any(cli.read_complex_csv(a / "ris.csv"))


def test_sweep_single_value_matches_synthesize(desk_run, tmp_path):
    _, out = desk_run
    cli.main(["sweep", str(DESK), "--param", "varsigma", "--values", "5", "--seeds", "1-1",
              "--out", str(tmp_path), "--quiet"])
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0] == "param_value,seed,ISMR_dB"
    val, seed, g = rows[1].split(",")
    assert seed == "1" and rows[2].split(",")[1] == "mean"
    assert float(g) == pytest.approx(float(summary(out / "summary.txt")["ISMR_dB"]), abs=1e-9)


def test_sweep_rejects_mismatched_param(tmp_path, capsys):
    assert cli.main(["sweep", str(DESK), "--param", "eta", "--values", "1.2",
                     "--out", str(tmp_path)]) == 1
    assert "PAR" in capsys.readouterr().err


def test_seed_parsing():
    assert cli._parse_seeds("3") == [0, 1, 2]
    assert cli._parse_seeds("2-4") == [2, 3, 4]
    assert cli._parse_seeds("1,5") == [1, 5]


def test_complex_csv_round_trip(tmp_path, rng):
    z = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    (tmp_path / "z.csv").write_text(cli.complex_csv(z))
    back = cli.read_complex_csv(tmp_path / "z.csv")
    assert np.max(np.abs(back - z)) <= 1e-11 * max(1.0, float(np.max(np.abs(z))))
    assert math.isfinite(float(back[0].real))
