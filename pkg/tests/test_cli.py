"""End-to-end command line tests, driven in process through main().

Exit-code contract: 0 success, 1 contract violation or data error,
2 usage/config error.
"""

import subprocess
import sys

import pytest

from ldlab import Kernel, dump_raster, load_raster, make_ball, total_energy
from ldlab.cli import main
from ldlab.grid import component_count
from ldlab.manifest import load_manifest, verify_manifest


@pytest.fixture()
def ball_ras(tmp_path):
    s = make_ball(3, 0.5, 1.0 / 8)
    p = tmp_path / "ball.ras"
    dump_raster(s, p)
    return p, s


def test_version_and_usage_errors(capsys):
    assert main(["--version"]) == 0
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_config_error_exits_2(ball_ras, tmp_path, capsys):
    p, _ = ball_ras
    rc = main(["energy", "--input", str(p), "--alpha", "5",
               "--outdir", str(tmp_path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_data_error_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.ras"
    bad.write_bytes(b"not a raster at all\n")
    rc = main(["energy", "--input", str(bad), "--outdir", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_energy_verb(ball_ras, tmp_path, capsys):
    p, s = ball_ras
    out = tmp_path / "run"
    assert main(["energy", "--input", str(p), "--outdir", str(out)]) == 0
    stdout = capsys.readouterr().out
    b = total_energy(s, Kernel(3, 1.0))
    assert f"E = {b.E:.12g}" in stdout
    row = (out / "energy.csv").read_text().splitlines()[1].split(",")
    assert row[3:] == ["%.12g" % v for v in (b.m, b.P, b.V, b.E)]
    man = out / "energy-manifest.json"
    assert verify_manifest(man)["ok"]
    assert load_manifest(man).kernel == {"n": 3, "alpha": 1.0}


def test_competitor_verb_deterministic(tmp_path, capsys):
    args = ["competitor", "--variant", "ball", "--m", "1.0", "--h", "0.125"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--outdir", str(out1)]) == 0
    assert main(args + ["--outdir", str(out2)]) == 0
    capsys.readouterr()
    assert (out1 / "competitor.csv").read_bytes() == \
        (out2 / "competitor.csv").read_bytes()
    assert (out1 / "ball.ras").read_bytes() == (out2 / "ball.ras").read_bytes()
    assert (out1 / "ball.png").is_file()
    s = load_raster(out1 / "ball.ras")
    assert s.count() == round(1.0 / 0.125**3)


def test_competitor_chain_splits(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["competitor", "--variant", "chain", "--m", "2.0",
                 "--h", "0.125", "--outdir", str(out)]) == 0
    capsys.readouterr()
    assert component_count(load_raster(out / "chain.ras")) == 2


def test_minimize_verb_conserves_mass(tmp_path, capsys):
    out = tmp_path / "min"
    rc = main(["minimize", "--m", "0.3", "--h", str(1 / 6), "--budget", "300",
               "--seed", "1", "--outdir", str(out)])
    assert rc == 0
    capsys.readouterr()
    final = load_raster(out / "final.ras")
    assert final.count() == round(0.3 * 6**3)
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "snapshot,P,V,E,m"
    assert len(trace) > 2
    assert verify_manifest(out / "minimize-manifest.json")["ok"]
    for name in ("trace.png", "final.png", "minimize.csv"):
        assert (out / name).is_file()


def test_star_verb(tmp_path, capsys):
    out = tmp_path / "star"
    rc = main(["star", "--eps", "0", "--steps", "12", "--amp", "0.05",
               "--outdir", str(out)])
    assert rc == 0
    assert "regime" in capsys.readouterr().out
    man = load_manifest(out / "star-manifest.json")
    assert set(man.results) == {"regime", "E", "grad_norm"}
    assert (out / "star_coeffs.csv").is_file()
    assert (out / "star_trace.png").is_file()


def test_sweep_verb(tmp_path, capsys):
    out = tmp_path / "sw"
    rc = main(["sweep", "--masses", "0.5,1", "--h", "0.125",
               "--outdir", str(out)])
    assert rc == 0
    assert "crossover" in capsys.readouterr().out
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[1].split(",")[1] == "ball"
    assert "1.756035959" in (out / "crossover.csv").read_text()


def test_verify_perimeter_passes(tmp_path, capsys):
    out = tmp_path / "v"
    rc = main(["verify", "--check", "perimeter", "--outdir", str(out)])
    assert rc == 0
    assert "perimeter: PASS" in capsys.readouterr().out
    assert (out / "verify_perimeter.csv").is_file()


def test_verify_posdef_passes(tmp_path, capsys):
    out = tmp_path / "v"
    rc = main(["verify", "--check", "posdef", "--samples", "6",
               "--outdir", str(out)])
    assert rc == 0
    assert "posdef: PASS" in capsys.readouterr().out


def test_manifest_numbering_on_rerun(ball_ras, tmp_path, capsys):
    p, _ = ball_ras
    out = tmp_path / "run"
    for _ in range(2):
        assert main(["energy", "--input", str(p),
                     "--outdir", str(out)]) == 0
    capsys.readouterr()
    assert (out / "energy-manifest.json").is_file()
    assert (out / "energy-manifest-2.json").is_file()


def test_console_script_installed():
    rc = subprocess.run([sys.executable, "-m", "ldlab.cli", "--version"],
                        capture_output=True, text=True)
    assert rc.returncode == 0
    assert rc.stdout.strip()
