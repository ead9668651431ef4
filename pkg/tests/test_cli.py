import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gamow_lab.cli import run
from gamow_lab.config import ConfigError, parse_config
from gamow_lab.units import HBAR, PRESETS


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    return header, rows


def column(text, name):
    header, rows = table(text)
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


def test_parse_config():
    cfg = parse_config("""
    # scenario
    line.preset = "sodium-3p"
    time.max = 5
    support = half
    psi.pole = 1+2j
    rel.transforms = [{"x": [1, 0, 0, 0]}]
    """)
    assert cfg["line.preset"] == "sodium-3p"
    assert cfg["time.max"] == 5
    assert cfg["support"] == "half"
    assert cfg["psi.pole"] == 1 + 2j
    assert cfg["rel.transforms"][0]["x"][0] == 1
    with pytest.raises(ConfigError):
        parse_config("no equals sign here")


def test_presets_match_documented_values():
    na = PRESETS["sodium-3p"]
    assert na.gamma == 4.0538e-8 and na.tau == 16.254e-9
    fe = PRESETS["fe57"]
    assert fe.gamma == 4.7e-9 and fe.tau == 1.4e-7
    assert PRESETS["pi0"].tau == 8.97e-17


def test_survival_fullline_sodium():
    code, out, _ = call("survival", "--set", "line.preset=sodium-3p", "--set", "time.count=11")
    assert code == 0
    t = column(out, "t")
    p = column(out, "abs_A2")
    np.testing.assert_allclose(t, np.linspace(0, 5, 11))
    np.testing.assert_allclose(p, np.exp(-t), atol=1e-6)
    assert "error" in table(out)[0]


def test_survival_fullline_negative_times():
    code, out, _ = call("survival", "--set", "line.preset=sodium-3p", "--set", "time.min=-5",
                        "--set", "time.max=-0.1", "--set", "time.count=9")
    assert code == 0
    assert np.all(column(out, "abs_A2") < 1e-16)


def test_survival_halfline_tail_slope():
    code, out, _ = call("survival", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                        "--set", "support=half", "--set", "time.min=50", "--set", "time.max=500",
                        "--set", "time.spacing=log", "--set", "time.count=15")
    assert code == 0
    slope = np.polyfit(np.log(column(out, "t")), np.log(column(out, "abs_A2")), 1)[0]
    assert -2.3 < slope < -1.7


def test_survival_density_quantity():
    code, out, _ = call("survival", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                        "--set", "survival.quantity=density", "--set", "time.min=-3",
                        "--set", "time.max=3", "--set", "time.count=7")
    assert code == 0
    t, p = column(out, "t"), column(out, "abs_A2")
    np.testing.assert_allclose(p, np.exp(-np.abs(t)), rtol=1e-12)


def test_norm_report():
    code, out, _ = call("norm", "--set", "line.e_r=1", "--set", "line.gamma=0.2")
    assert code == 0
    header, rows = table(out)
    vals = {r[0]: float(r[2]) for r in rows}
    assert abs(vals["closed_form"] - 0.968274) < 5e-7
    assert vals["full_line"] == 1.0
    errs = [abs(vals[f"series_order_{k}"] - vals["closed_form"]) for k in range(5)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_norm_invalid():
    assert call("norm", "--set", "line.e_r=1", "--set", "line.gamma=2.5")[0] == 2
    assert call("norm", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                "--set", "norm.order=-1")[0] == 2
    assert call("norm", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                "--set", "norm.order=1.5")[0] == 2


def test_fit_sodium_prints_lifetime():
    code, out, _ = call("fit", "--set", "line.preset=sodium-3p")
    assert code == 0
    header, rows = table(out)
    vals = {r[0]: float(r[1]) for r in rows}
    assert abs(vals["tau_from_Gamma_ns"] - 16.237) < 1e-3
    assert abs(vals["tau_fit_ns"] - 16.254) < 1e-3


def test_fit_fe57_pass():
    code, out, _ = call("fit", "--set", "line.preset=fe57")
    assert code == 0
    assert "# width_lifetime_agreement: PASS" in out
    vals = {r[0]: float(r[1]) for r in table(out)[1]}
    assert abs(vals["ratio_Gamma_over_Gamma_R"] - 1) < 0.10


def test_fit_noisy_is_byte_identical():
    args = ("fit", "--set", "line.preset=fe57", "--set", "fit.noise=0.01", "--seed", "5")
    a, b = call(*args), call(*args)
    assert a == b
    c = call("fit", "--set", "line.preset=fe57", "--set", "fit.noise=0.01", "--seed", "6")
    assert c[1] != a[1]


def test_fit_from_files(tmp_path):
    from gamow_lab.fitting import generate_decay_counts, generate_lineshape, save_counts, save_lineshape
    from gamow_lab.spectral import ResonanceLine
    line = ResonanceLine(2.0, 1e-3)
    save_lineshape(generate_lineshape(line, np.linspace(1.99, 2.01, 201)), tmp_path / "ls.csv")
    rate = ResonanceLine(2.0, 1.1e-3)
    save_counts(generate_decay_counts(rate, np.linspace(0, 5 * HBAR / 1.1e-3, 21), 10**10,
                                      poisson=False, hbar=HBAR), tmp_path / "c.csv")
    code, out, _ = call("fit", "--set", "line.e_r=2.0", "--set", "line.gamma=1e-3",
                        "--set", f"fit.lineshape_file='{tmp_path / 'ls.csv'}'",
                        "--set", f"fit.counts_file='{tmp_path / 'c.csv'}'")
    assert code == 0
    vals = {r[0]: float(r[1]) for r in table(out)[1]}
    np.testing.assert_allclose(vals["ratio_Gamma_over_Gamma_R"], 1 / 1.1, rtol=1e-6)


def test_fermi_columns():
    code, out, _ = call("fermi", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                        "--set", "fermi.r=2", "--set", "time.min=-1", "--set", "time.max=4",
                        "--set", "time.count=11")
    assert code == 0
    t, full, half = column(out, "t"), column(out, "P_full"), column(out, "P_half")
    assert np.all(full[t < 2] == 0)
    assert np.any(half[t < 2] > 0)
    np.testing.assert_allclose(full[t >= 2], np.exp(-(t[t >= 2] - 2)), rtol=1e-12)


def test_fermi_r_zero_matches_survival():
    common = ("--set", "line.e_r=1", "--set", "line.gamma=0.1", "--set", "support=half",
              "--set", "time.min=-1", "--set", "time.max=3", "--set", "time.count=5")
    _, fermi, _ = call("fermi", *common[:4], *common[6:])
    _, surv, _ = call("survival", *common)
    np.testing.assert_allclose(column(fermi, "P_half"), column(surv, "abs_A2"), rtol=1e-12)


def test_fermi_negative_r():
    assert call("fermi", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                "--set", "fermi.r=-1")[0] == 2


def test_relativistic_report():
    code, out, _ = call("relativistic", "--set", "rel.mass=1", "--set", "rel.width=0.1",
                        "--set", 'rel.transforms=[{"x": [10, 0, 0, 0]}, {"x": [1, 2, 0, 0]}]')
    assert code == 0
    header, rows = table(out)
    i = header.index("abs_phase2")
    np.testing.assert_allclose(float(rows[0][i]), math.exp(-1), rtol=1e-12)
    assert rows[1][header.index("status")] == "REJECTED: outside forward cone"


def test_relativistic_unitary_limit():
    code, out, _ = call("relativistic", "--set", "rel.width=0", "--set", "rel.velocity=[0.3,0,0]",
                        "--set", 'rel.transforms=[{"x": [2, 1, 0, 0]}, {"boost": [0, 0.5, 0], "x": [3, 0, 1, 1]}]')
    assert code == 0
    np.testing.assert_allclose(column(out, "abs_phase2"), 1.0, atol=1e-13)


def test_relativistic_malformed():
    assert call("relativistic", "--set", 'rel.transforms=[{"boost": [0.3]}]')[0] == 2
    assert call("relativistic", "--set", 'rel.transforms=[{"boost": [1.3, 0, 0]}]')[0] == 2
    assert call("relativistic", "--set", "rel.transforms=5")[0] == 2


def test_json_doc_format():
    code, out, _ = call("norm", "--set", "line.e_r=1", "--set", "line.gamma=0.2",
                        "--format", "json-doc", "--explain")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "norm"
    assert doc["columns"][0] == "row"
    assert isinstance(doc["meta"]["explain"], list)


def test_explain_cites_preset():
    code, out, _ = call("fit", "--set", "line.preset=sodium-3p", "--explain")
    assert "16.237(35) ns" in out


def test_config_file_and_override(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text("line.e_r = 1\nline.gamma = 0.2\nnorm.order = 2\n")
    code, out, _ = call("norm", "--config", str(p), "--set", "norm.order=3")
    assert code == 0
    assert "series_order_3" in out


def test_validation_exit_codes(tmp_path):
    assert call("survival", "--set", "line.preset=nope")[0] == 2
    assert call("survival", "--set", "line.e_r=1")[0] == 2
    assert call("survival", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                "--set", "bogus.key=1")[0] == 2
    assert call("survival", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                "--set", "time.spacing=log")[0] == 2
    assert call("norm", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_tolerance_failure_exit_code():
    code, _, err = call("survival", "--set", "line.e_r=1", "--set", "line.gamma=0.1",
                        "--set", "survival.quantity=density", "--set", "support=half",
                        "--set", "time.min=1", "--set", "time.max=2", "--set", "time.count=2",
                        "--tol", "1e-20")
    assert code == 3
    assert "numerical failure" in err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "gamow_lab.cli", "norm", "--set", "line.e_r=1",
                        "--set", "line.gamma=0.2"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "closed_form" in r.stdout
    r = subprocess.run([sys.executable, "-m", "gamow_lab.cli", "nope"], capture_output=True)
    assert r.returncode == 2
