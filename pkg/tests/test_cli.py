import math
from importlib import resources

import numpy as np
import pytest

from otima import cli, scans, specfun
from otima.config import load_config, parse_config
from otima.errors import ConfigError

BASE = """[scenario]
name = small

[particle]
material = gold
mass_amu = 1e6
beta = 1.0

[laser]
wavelength_nm = 157.63
n0 = 8, 8, 8

[sequence]
N = 1
T_over_TT = 1.0

[model]
models = quantum, classical

[scan]
axis = delay
start = 0.5
stop = 1.5
points = 5
unit = T_TT

[output]
seed = 3
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.mark.parametrize("name", ["fig2a", "fig2b", "fig3", "fig4", "fig5", "gravity", "planning"])
def test_bundled_configs_parse(name):
    path = resources.files("otima") / "examples" / f"{name}.ini"
    cfg = load_config(path)
    assert cfg.name == name
    assert parse_config(cfg.to_ini()) == cfg


@pytest.mark.parametrize(
    "old, new, key",
    [
        ("points = 5", "points = 1", "scan.points"),
        ("axis = delay", "axis = energy", "scan.axis"),
        ("n0 = 8, 8, 8", "n0 = 8, 8", "laser.n0"),
        ("mass_amu = 1e6", "mass_amu = heavy", "particle.mass_amu"),
        ("models = quantum, classical", "models = quantum, wkb", "model.models"),
        ("seed = 3", "seed = 3\nsalt = 1", "output.salt"),
    ],
)
def test_config_errors_name_key_and_line(old, new, key):
    text = BASE.replace(old, new)
    bad = new.splitlines()[-1]
    line = text.splitlines().index(bad) + 1
    with pytest.raises(ConfigError) as info:
        parse_config(text, "run.ini")
    assert info.value.key == key
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_unknown_material_is_a_config_error():
    with pytest.raises(ConfigError) as info:
        parse_config(BASE.replace("material = gold", "material = unobtainium"))
    assert info.value.key == "particle.material"


def test_missing_file_and_bad_values_exit_2(tmp_path, capsys):
    code, out = run(["scan-delay", "--config", tmp_path / "nope.ini"], capsys)
    assert code == 2
    code, out = run(["scan-delay", "--config", write(tmp_path, BASE.replace("points = 5", "points = x"))], capsys)
    assert code == 2 and "scan.points" in out.err
    code, out = run(["scan-power", "--config", write(tmp_path, BASE)], capsys)
    assert code == 2 and "scan.axis" in out.err


def test_scan_delay_writes_csv_and_round_trips(tmp_path, capsys):
    cfg_path = write(tmp_path, BASE)
    out = tmp_path / "a.csv"
    code, _ = run(["scan-delay", "--config", cfg_path, "--out", out], capsys)
    assert code == 0
    text = out.read_text()
    cfg, columns, data = scans.read_csv(text)
    assert columns == ["T_over_TT", "V_sin_quantum", "V_full_quantum", "V_sin_classical", "V_full_classical", "S0"]
    assert data.shape == (5, 6)
    assert data[2, 1] == pytest.approx(0.8474385717745567, abs=1e-12)
    # rerunning from the header reproduces the file byte for byte
    again = scans.run_delay_scan(cfg).to_csv()
    assert again == text
    code, _ = run(["scan-delay", "--config", cfg_path, "--out", out, "--workers", "3"], capsys)
    assert out.read_text() == text


def test_output_path_relative_to_config(tmp_path, capsys):
    sub = tmp_path / "cfg"
    sub.mkdir()
    cfg_path = write(sub, BASE.replace("seed = 3", "seed = 3\npath = out.csv"))
    code, _ = run(["scan-delay", "--config", cfg_path], capsys)
    assert code == 0 and (sub / "out.csv").exists()


def test_model_override_and_stdout(tmp_path, capsys):
    code, out = run(["scan-delay", "--config", write(tmp_path, BASE), "--model", "decohered"], capsys)
    assert code == 0
    header = [l for l in out.out.splitlines() if not l.startswith("#")][0]
    assert header == "T_over_TT,V_sin_decohered,V_full_decohered,S0"
    assert "# models = decohered" in out.out


def test_zero_power_gives_zero_visibility(tmp_path, capsys):
    text = BASE.replace("n0 = 8, 8, 8", "n0 = 8, 0, 8")
    code, out = run(["scan-delay", "--config", write(tmp_path, text)], capsys)
    assert code == 0
    _, columns, data = scans.read_csv(out.out)
    assert np.all(data[:, columns.index("V_sin_quantum")] == 0.0)
    assert np.all(data[:, columns.index("V_full_classical")] == 0.0)


def test_inverse_mode_at_zero_power_is_nan(tmp_path, capsys):
    text = BASE.replace("models = quantum, classical", "models = quantum\nthird_mode = neutral, inverse")
    text = text.replace("axis = delay", "axis = power3").replace("unit = T_TT", "unit = n0").replace("start = 0.5", "start = 0.0").replace("stop = 1.5", "stop = 4")
    code, out = run(["scan-power", "--config", write(tmp_path, text)], capsys)
    assert code == 0
    _, columns, data = scans.read_csv(out.out)
    inv = data[:, columns.index("V_sin_quantum_inverse")]
    assert math.isnan(inv[0]) and np.all(np.isfinite(inv[1:]))
    assert data[0, columns.index("S0_inverse")] == 0.0


def test_signal_scan(tmp_path, capsys):
    text = BASE.replace("axis = delay", "axis = x_s").replace("unit = T_TT", "unit = d").replace("start = 0.5", "start = 0").replace("stop = 1.5", "stop = 1")
    code, out = run(["signal", "--config", write(tmp_path, text)], capsys)
    assert code == 0
    _, columns, data = scans.read_csv(out.out)
    assert columns == ["x_s_over_d", "S_quantum", "S_classical"]
    assert data[0, 1] == pytest.approx(data[-1, 1], rel=1e-12)


def test_precision_failure_exits_3(tmp_path, capsys):
    code, out = run(["scan-delay", "--config", write(tmp_path, BASE.replace("n0 = 8, 8, 8", "n0 = 1500, 1500, 1500"))], capsys)
    assert code == 3 and "precision" in out.err


def report_rows(text):
    body = [r for r in text.splitlines() if not r.startswith("#")]
    assert body[0] == "quantity,value,unit"
    return {r.split(",")[0]: float(r.split(",")[1]) for r in body[1:]}


def test_material_report(tmp_path, capsys):
    path = resources.files("otima") / "examples" / "planning.ini"
    code, out = run(["material", "--config", path, "--out", tmp_path / "m.csv"], capsys)
    assert code == 0
    rows = report_rows((tmp_path / "m.csv").read_text())
    assert rows["free_fall_drop"] == pytest.approx(4.6, rel=0.05)
    assert 15.0 < rows["talbot_time"] < 16.0
    assert rows["de_broglie_wavelength"] == pytest.approx(4.98789e-13 * 2e4 / 1e6, rel=1e-4)
    heavy = BASE.replace("mass_amu = 1e6", "mass_amu = 1e7")
    code, out = run(["material", "--config", write(tmp_path, heavy)], capsys)
    rows = report_rows(out.out)
    assert rows["free_fall_drop"] / 1e3 == pytest.approx(0.5, rel=0.1)


def test_verify_exit_codes(capsys, monkeypatch, tmp_path):
    code, out = run(["verify", "--out", tmp_path / "v.txt"], capsys)
    assert code == 0
    assert "FAIL" not in out.out and "checks passed" in out.out
    assert (tmp_path / "v.txt").read_text() == out.out

    real = specfun.bessel_i_table

    def tampered(*args, **kw):
        return real(*args, **kw) * (1 + 1e-7)

    monkeypatch.setattr(specfun, "bessel_i_table", tampered)
    code, out = run(["verify"], capsys)
    assert code == 4
    assert "FAIL" in out.out


def test_verify_nonconvergence_exits_3(capsys, monkeypatch):
    from otima import oracle
    from otima.errors import PrecisionError

    def never(*a, **k):
        raise PrecisionError("forced")

    monkeypatch.setattr(oracle, "R_by_sphere_quadrature", never)
    code, out = run(["verify"], capsys)
    assert code == 3 and "NOCONV" in out.out
