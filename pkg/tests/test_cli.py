import json
from pathlib import Path

import numpy as np
import pytest

from quasiloc import cli


def run(args):
    return cli.main([str(a) for a in args])


def read_rows(path: Path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nkind = uniform\nn = 55\nbc = pbc\n")
    parsed = cli.parse_config_file(cfg)
    assert parsed == {"kind": "uniform", "n": "55", "bc": "pbc"}


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kind = uniform\nn = 55\nwavelength = 7\n")
    assert run(["spectrum", "--config", cfg, "--out", tmp_path]) == 2


def test_spectrum_uniform_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = run(["spectrum", "--set", "kind=uniform", "--set", "n=55",
                    "--set", "bc=pbc", "--out", out])
        assert code == 0
    body1 = (out1 / "spectrum.csv").read_bytes()
    body2 = (out2 / "spectrum.csv").read_bytes()
    assert body1 == body2
    header, rows = read_rows(out1 / "spectrum.csv")
    assert header == ["index", "re_E", "im_E", "fd", "residual"]
    assert len(rows) == 55
    text = (out1 / "spectrum.csv").read_text()
    assert text.startswith("# schema = spectrum.v1\n")
    assert "# kind = uniform" in text


def test_spectrum_h1_obc_real(tmp_path):
    code = run(["spectrum", "--set", "kind=h1", "--set", "g=1.0",
                "--set", "tau=ra", "--set", "j=13", "--set", "bc=obc",
                "--out", tmp_path])
    assert code == 0
    _, rows = read_rows(tmp_path / "spectrum.csv")
    ims = np.array([float(r[2]) for r in rows])
    assert np.abs(ims).max() < 1e-6


def test_lyapunov_rows_and_jobs(tmp_path):
    args = ["lyapunov", "--set", "kind=h1", "--set", "g=1.0",
            "--set", "n=100", "--set", "energies=0.025, 0.1",
            "--set", "steps=2000", "--out"]
    assert run(args + [tmp_path / "j1"]) == 0
    assert run(args + [tmp_path / "j2", "--jobs", "2"]) == 0
    b1 = (tmp_path / "j1" / "lyapunov.csv").read_bytes()
    b2 = (tmp_path / "j2" / "lyapunov.csv").read_bytes()
    assert b1 == b2
    header, rows = read_rows(tmp_path / "j1" / "lyapunov.csv")
    assert header[:2] == ["re_E", "im_E"]
    assert header[2:6] == ["gamma_1", "gamma_2", "gamma_3", "gamma_4"]
    assert rows[0][-1] == "ok"
    assert rows[0][6] == "V"


def test_duality_outputs(tmp_path):
    code = run(["duality", "--set", "g=1.0", "--set", "h=0.1",
                "--set", "tau=ra", "--set", "j=11", "--out", tmp_path])
    assert code == 0
    data = json.loads((tmp_path / "duality.json").read_text())
    assert data["schema"] == "duality.v1"
    assert data["N"] == 55
    header, rows = read_rows(tmp_path / "duality_pairs.csv")
    assert len(rows) == 55
    assert header[-2:] == ["verdict", "ambiguous"]


def test_duality_requires_rational(tmp_path):
    code = run(["duality", "--set", "g=1.0", "--set", "h=0.1",
                "--set", "n=55", "--out", tmp_path])
    assert code == 2


def test_duality_numerical_failure_exit_code(tmp_path):
    code = run(["duality", "--set", "g=1.0", "--set", "h=0.1",
                "--set", "tau=ra", "--set", "j=11",
                "--set", "match_tol=0.0", "--out", tmp_path])
    assert code == 3


def test_fit_outputs(tmp_path):
    code = run(["fit", "--set", "kind=h1", "--set", "tau=ra", "--set", "j=14",
                "--set", "bc=pbc", "--set", "energy=0.025",
                "--set", "g_values=1.0", "--set", "window_sites=40",
                "--set", "steps=2000", "--out", tmp_path])
    assert code == 0
    header, rows = read_rows(tmp_path / "fits.csv")
    assert header == ["E", "g", "center", "left_slope", "right_slope",
                      "gamma3", "gamma4", "rel_err_left", "rel_err_right"]
    assert len(rows) == 1
    prof = tmp_path / "profile_0.csv"
    assert prof.exists()
    text = prof.read_text()
    assert text.startswith("# schema = profile.v1\n")
    assert "# fit_center = " in text
    _, prows = read_rows(prof)
    assert len(prows) == 233


def test_scaling_outputs(tmp_path):
    code = run(["scaling", "--set", "kind=uniform", "--set", "n=34",
                "--set", "bc=pbc", "--set", "observable=fd",
                "--set", "j_range=10,11,12", "--set", "ref_energy=2.02",
                "--set", "track_window=0.1", "--out", tmp_path])
    assert code == 0
    header, rows = read_rows(tmp_path / "scaling.csv")
    assert header == ["N", "inv_log_N", "fd", "status"]
    assert [r[0] for r in rows] == ["34", "55", "89"]
    text = (tmp_path / "scaling.csv").read_text()
    assert "# intercept_fd = " in text


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kind = uniform\nn = 34\nbc = obc\n")
    out = tmp_path / "out"
    code = run(["spectrum", "--config", cfg, "--set", "n=55", "--out", out])
    assert code == 0
    text = (out / "spectrum.csv").read_text()
    assert "# n = 55" in text
    assert "# bc = obc" in text


def test_seedless_flag_accepted_but_value_rejected(tmp_path, capsys):
    assert run(["spectrum", "--set", "kind=uniform", "--set", "n=34",
                "--out", tmp_path, "--seedless"]) == 0
    with pytest.raises(SystemExit) as exc:
        cli.main(["spectrum", "--set", "kind=uniform", "--set", "n=34",
                  "--out", str(tmp_path), "--seedless=true"])
    assert exc.value.code == 2
