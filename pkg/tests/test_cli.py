import json
import re
import subprocess
import sys

import numpy as np
import pytest

from quadbeam.cli import main
from quadbeam.fieldmap import read_csv, read_ppm


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(out):
    rows = {}
    for line in out.splitlines():
        m = re.match(r"^(.*?\S)\s+((?:-|\d|\((?=[-\d])|cs-).*)$", line)
        if m:
            rows[m.group(1)] = m.group(2).strip()
    return rows


def ratio(out):
    return float(table(out)["Omega_0/Gamma_Q (LG)"])


def test_params_reference_values(capsys):
    code, out, _ = run(capsys, "params")
    assert code == 0
    assert 129.2 <= ratio(out) <= 142.8
    assert table(out)["waist w0"] == "337.5 nm"
    for key in ("plane-wave amplitude E_k00", "Rayleigh range Z_R", "k_perp", "k_Z",
                "Omega_0/Gamma_Q (Bessel)", "Omega_0/Gamma_Q (HG)"):
        assert key in table(out)


def test_params_intensity_scaling(capsys):
    _, base, _ = run(capsys, "params")
    _, quad, _ = run(capsys, "params", "--intensity", "4e9W/m2")
    assert ratio(quad) == pytest.approx(2 * ratio(base), rel=1e-5)


def test_unknown_preset_lists_available(capsys):
    code, _, err = run(capsys, "params", "--preset", "rb-5s")
    assert code == 2 and "cs-6s-5d" in err


def test_bad_json_reports_line_and_column(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text('{\n  "beam": {"family": "lg",}\n}\n')
    code, _, err = run(capsys, "map", "--config", str(p))
    assert code == 2 and "line 2, column" in err


def test_bad_field_reports_path(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"beam": {"family": "hg", "n": 1.5}}))
    code, _, err = run(capsys, "map", "--config", str(p))
    assert code == 2 and "beam.n" in err
    p.write_text(json.dumps({"beam": {"family": "lg", "waist": "3 furlongs"}}))
    code, _, err = run(capsys, "params", "--config", str(p))
    assert code == 2 and "beam.waist" in err


def test_map_writes_files(tmp_path, capsys):
    csv = tmp_path / "m.csv"
    ppm = tmp_path / "m.ppm"
    code, out, _ = run(capsys, "map", "--beam", "lg:l=1", "--grid", "default:65", "--out", str(csv))
    assert code == 0 and re.search(r"max=\S+ argmax=\(", out)
    x, y, vals, mask = read_csv(csv)
    assert vals.shape == (65, 65) and not mask.any()
    assert vals[32, 32] == vals.max()
    code, _, _ = run(capsys, "map", "--beam", "lg:l=1", "--grid", "default:65", "--out", str(ppm))
    assert code == 0 and read_ppm(ppm).shape == (65, 65, 3)


def test_map_bessel_m10_suppressed_centre(tmp_path, capsys):
    csv = tmp_path / "b.csv"
    code, _, _ = run(capsys, "map", "--beam", "bessel:m=10", "--grid", "default:81", "--out", str(csv))
    assert code == 0
    x, y, vals, _ = read_csv(csv)
    assert vals[40, 40] < 1e-6 * vals.max()


def test_map_plane_outside_domain_is_numeric_failure(tmp_path, capsys):
    code, _, err = run(capsys, "map", "--beam", "bessel:m=1", "--grid", "default:8", "--z-plane=-1um",
                       "--out", str(tmp_path / "x.csv"))
    assert code == 3


def test_force_at_core_is_numeric_failure(capsys):
    code, _, err = run(capsys, "force", "--point", "0,0,0", "--velocity", "1,0,0")
    assert code == 3 and "offset" in err


def test_blue_detuning_force_points_to_lower_intensity(capsys):
    # LG l=1 map peaks on the axis; just off it the gradient force pushes outwards
    code, out, _ = run(capsys, "force", "--point", "0.05w0,0,0", "--delta0", "1000gamma")
    assert code == 0
    fx = float(table(out)["gradient force"].strip("()").split(",")[0])
    assert fx > 0


def test_potential_point_query(capsys):
    code, out, _ = run(capsys, "potential", "--point", "0.5w0,0,0", "--delta0=-1000gamma")
    assert code == 0
    u = float(table(out)["potential"].split()[0])
    ua = float(table(out)["potential (approx.)"].split()[0])
    assert u < 0 and abs(u - ua) / abs(u) < 0.03


def test_trajectory_csv(tmp_path, capsys):
    p = tmp_path / "t.csv"
    code, _, _ = run(capsys, "trajectory", "--position=0.2w0,0,0", "--dt", "10ns", "--steps", "400",
                     "--conservative", "--delta0=-1000gamma", "--out", str(p))
    assert code == 0
    data = np.genfromtxt(p, delimiter=",", names=True, dtype=None, encoding="utf-8")
    assert len(data) == 401
    assert data.dtype.names[:7] == ("t", "x", "y", "z", "vx", "vy", "vz")
    x = data["x"]
    assert x.min() < 0 < x.max() <= 0.2 * 337.5e-9 * (1 + 1e-9)


def test_trajectory_straight_line(tmp_path, capsys):
    p = tmp_path / "t.csv"
    code, _, _ = run(capsys, "trajectory", "--position", "60w0,0,0", "--velocity", "0,0.5,0",
                     "--dt", "1us", "--steps", "10", "--out", str(p))
    data = np.genfromtxt(p, delimiter=",", names=True, dtype=None, encoding="utf-8")
    np.testing.assert_allclose(data["y"], 0.5 * data["t"], rtol=1e-11, atol=1e-20)


def test_trajectory_truncation_exit_code(tmp_path, capsys):
    p = tmp_path / "t.csv"
    code, _, err = run(capsys, "trajectory", "--beam", "bessel:m=1", "--position", "0.1um,0,2nm",
                       "--velocity=0,0,-1", "--dt", "1ns", "--steps", "50", "--out", str(p))
    assert code == 3 and p.exists()
    assert 1 < len(p.read_text().splitlines()) < 52


def test_dump_config_reruns_identically(tmp_path, capsys):
    args = ["map", "--beam", "hg:n=2,m=0", "--grid=-3w0:3w0:33,-2w0:2w0:21", "--delta0=-1000gamma",
            "--observable", "potential"]
    a = tmp_path / "a.csv"
    code, dumped, _ = run(capsys, *args, "--out", str(a), "--dump-config")
    assert code == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(dumped)
    run(capsys, *args, "--out", str(a))
    cfg_data = json.loads(dumped)
    cfg_data["outputs"][0]["path"] = str(tmp_path / "b.csv")
    cfg.write_text(json.dumps(cfg_data))
    code, _, _ = run(capsys, "map", "--config", str(cfg))
    assert code == 0
    assert a.read_bytes() == (tmp_path / "b.csv").read_bytes()
    # dumping the dumped config is a fixed point
    _, again, _ = run(capsys, "map", "--config", str(cfg), "--dump-config")
    assert json.loads(again) == cfg_data


def test_hg20_node_columns(tmp_path, capsys):
    # Q_xx couples through d/dX: nodes at zeros of d/dxi [H_2(xi) e^{-xi^2/2}], i.e. xi = 0, +-sqrt(2.5)
    p = tmp_path / "h.csv"
    code, _, _ = run(capsys, "map", "--beam", "hg:n=2,m=0", "--grid=-3w0:3w0:241,-1w0:1w0:5", "--out", str(p))
    x, y, vals, _ = read_csv(p)
    w0 = 337.5e-9
    xi = np.sqrt(2) * x / w0
    for node in (0.0, np.sqrt(2.5), -np.sqrt(2.5)):
        i = np.argmin(abs(xi - node))
        assert abs(xi[i] - node) < 1e-9 or vals[:, i].max() < 1e-3 * vals.max()


def test_console_script_subprocess(tmp_path):
    out = subprocess.run([sys.executable, "-m", "quadbeam", "params"], capture_output=True, text=True,
                         check=True).stdout
    assert "Omega_0/Gamma_Q (LG)" in out
