import json
import shutil
import subprocess
import sys
from fractions import Fraction

import pytest

from isoprofile.cli import main, read_config
from isoprofile.isoperimetry import ProfileCurve
from isoprofile.randomwalk import DecaySequence


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_growth_csv(capsys):
    code, out, _ = run(["growth", "--group", "lamplighter:p=2", "--radius", "10"], capsys)
    assert code == 0
    assert "# group=lamplighter:p=2" in out and "# radius=10" in out
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    assert rows[0] == "r,V" and rows[-1] == "10,1457"


def test_folner_report(capsys):
    code, out, _ = run(["folner", "--group", "bs:m=2", "--family", "bs_windows", "--n", "2"], capsys)
    assert code == 0
    report = json.loads(out)["report"]
    assert report["measuredC"] == "27/5" and report["neighborhoodOk"]


def test_walk_rows(capsys):
    code, out, _ = run(["walk", "--group", "zd:d=1", "--theta", "0", "--nmax", "5"], capsys)
    assert code == 0
    assert "2,3,8,0.375,exact" in out.splitlines()
    seq = DecaySequence.from_csv(out)
    assert seq.values()[1] == Fraction(3, 8)


def test_exit_codes(capsys, tmp_path):
    assert run(["growth", "--group", "nonsense"], capsys)[0] == 2
    assert run(["growth"], capsys)[0] == 2
    assert run(["profile", "--group", "zd:d=1", "--p", "0"], capsys)[0] == 2
    code, _, err = run(["ball", "--group", "f2", "--radius", "12", "--budget", "100000"], capsys)
    assert code == 3 and "attained:" in err
    with pytest.raises(SystemExit) as info:
        main(["growth", "--radius", "x"])
    assert info.value.code == 2


def test_numerical_exit_code(monkeypatch, capsys):
    from isoprofile import cli
    from isoprofile.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("no convergence", residual=1e-3)

    monkeypatch.setattr(cli, "profile_in_balls", boom)
    assert run(["profile", "--group", "zd:d=1", "--rmax", "2"], capsys)[0] == 4


def test_outputs_are_reproducible(tmp_path, capsys):
    cmds = [
        ["growth", "--group", "heis", "--radius", "5"],
        ["profile", "--group", "zd:d=2", "--p", "inf", "--method", "inradius", "--rmax", "4"],
        ["profile", "--group", "lamplighter:p=2", "--p", "1", "--method", "folner", "--rmax", "1"],
        ["folner", "--group", "heis", "--n", "2"],
        ["walk", "--group", "bs:m=2", "--nmax", "6"],
        ["transfer", "psi", "--from", "heis", "--to", "zd:d=2", "--p", "2", "--trials", "5", "--radius", "3"],
        ["transfer", "compression", "--sub", "zd:d=1", "--amb", "heis", "--rmax", "10"],
    ]
    for i, cmd in enumerate(cmds):
        a, b = tmp_path / f"a{i}", tmp_path / f"b{i}"
        assert main(cmd + ["-o", str(a)]) == 0
        assert main(cmd + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
    assert not list(tmp_path.glob(".*"))  # no leftover temporary files


def test_profile_roundtrips(tmp_path, capsys):
    csv_path, json_path = tmp_path / "p.csv", tmp_path / "p.json"
    base = ["profile", "--group", "zd:d=1", "--p", "2", "--rmax", "5"]
    assert main(base + ["-o", str(csv_path)]) == 0
    assert main(base + ["--out", "json", "-o", str(json_path)]) == 0
    a = ProfileCurve.from_csv(csv_path.read_text())
    b = ProfileCurve.from_json(json.dumps(json.loads(json_path.read_text())["curve"]))
    assert a == b
    assert len(a.points) == 6


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# experiment\ngroup = zd:d=1\nradius = 2\n")
    assert read_config(conf) == {"group": "zd:d=1", "radius": "2"}
    code, out, _ = run(["growth", "--config", str(conf)], capsys)
    assert code == 0 and out.rstrip().endswith("2,5")
    code, out, _ = run(["growth", "--config", str(conf), "--radius", "3"], capsys)
    assert out.rstrip().endswith("3,7")
    conf.write_text("radius\n")
    assert run(["growth", "--config", str(conf), "--group", "zd:d=1"], capsys)[0] == 2


def test_cache_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ISOPROFILE_CACHE", str(tmp_path))
    assert run(["ball", "--group", "heis", "--radius", "3"], capsys)[0] == 0
    assert list(tmp_path.glob("*.ball"))


def test_walk_fit_and_diagnostic(tmp_path, capsys):
    walk, prof = tmp_path / "walk.csv", tmp_path / "prof.csv"
    assert main(["walk", "--group", "zd:d=1", "--theta", "0", "--nmax", "60", "-o", str(walk)]) == 0
    code, out, _ = run(["walk", "fit", "--input", str(walk), "--model", "poly", "--nmin", "10"], capsys)
    assert code == 0
    fit = json.loads(out)["fit"]
    assert abs(fit["params"]["alpha"] - 0.5) < 0.05
    assert main(["profile", "--group", "zd:d=1", "--p", "2", "--rmax", "12", "-o", str(prof)]) == 0
    code, out, _ = run(["walk", "diagnostic", "--profile", str(prof), "--input", str(walk)], capsys)
    assert code == 0
    assert json.loads(out)["diagnostic"]["verdict"] == "consistent"
    assert run(["walk", "fit"], capsys)[0] == 2


def test_report_bundle_for_z2(tmp_path, capsys):
    d = tmp_path
    cmds = [
        ["growth", "--group", "zd:d=2", "--radius", "12", "-o", str(d / "growth.csv")],
        ["profile", "--group", "zd:d=2", "--p", "inf", "--method", "inradius", "--rmax", "6", "-o", str(d / "prof.csv")],
        ["folner", "--group", "zd:d=2", "--n", "2", "-o", str(d / "folner.json")],
        ["walk", "--group", "zd:d=2", "--theta", "0", "--nmax", "40", "-o", str(d / "walk.csv")],
    ]
    for cmd in cmds:
        assert main(cmd) == 0
    code, out, _ = run(["report", "--group", "zd:d=2", "--dir", str(d), "--out", "json"], capsys)
    assert code == 0
    summary = json.loads(out)["summary"]
    assert summary["missing"] == []
    assert summary["growth"][0]["class"] == "polynomial" and summary["growth"][0]["degree"] == "2"
    assert summary["profile"][0]["values"] == [str(r + 1) for r in range(7)]
    assert 0.9 <= summary["walk"][0]["polynomial"]["alpha"] <= 1.1
    code, out, _ = run(["report", "--group", "f2", "--dir", str(d)], capsys)
    assert code == 0 and "Missing artifacts" in out


@pytest.mark.skipif(shutil.which("isoprofile") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["isoprofile", "walk", "--group", "zd:d=1", "--theta", "0", "--nmax", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "3,5,16" in res.stdout


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "isoprofile.cli", "growth", "--group", "nonsense"],
                         capture_output=True, text=True)
    assert res.returncode == 2
