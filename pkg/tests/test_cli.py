"""End-to-end checks of the command line driver.

Everything runs in process through katoform.cli.main so exit codes and
stderr diagnostics can be asserted directly; one subprocess test covers
the installed console script.
"""

import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from katoform import bundled, cli
from katoform.reports import PROVENANCES


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run_cli(tmp_path, cfg_obj, *extra):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", write_config(tmp_path, cfg_obj),
                     "--out", str(out), *extra])
    return code, out


def load_report(out):
    with open(out / "report.json") as fh:
        return json.load(fh)


def bundled_config(name):
    with open(str(bundled.config_dir() / f"{name}.json")) as fh:
        return json.load(fh)


SPECTRUM_CFG = {
    "command": "spectrum",
    "mesh": {"bundled": "flux_cycle_3"},
    "k": 3,
    "seed": 0,
}


def collect_pnums(node, found):
    if isinstance(node, dict):
        if set(node) >= {"value", "error", "provenance"}:
            found.append(node)
        else:
            for v in node.values():
                collect_pnums(v, found)
    elif isinstance(node, list):
        for v in node:
            collect_pnums(v, found)


# ---------------------------------------------------------------------------
# exit code 2: invalid configuration

def test_no_config_given(capsys, monkeypatch):
    monkeypatch.delenv("KATOFORM_CONFIG", raising=False)
    assert cli.main(["run"]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["run", "--config", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_empty_config(tmp_path, capsys):
    code, _ = run_cli(tmp_path, {})
    assert code == 2
    assert "command" in capsys.readouterr().err


def test_unknown_command(tmp_path, capsys):
    code, _ = run_cli(tmp_path, {"command": "frobnicate"})
    assert code == 2
    assert "frobnicate" in capsys.readouterr().err


def test_unknown_key_diagnosed(tmp_path, capsys):
    cfg = dict(SPECTRUM_CFG, typo_key=1)
    code, _ = run_cli(tmp_path, cfg)
    assert code == 2
    err = capsys.readouterr().err
    assert "schema violations" in err and "typo_key" in err


def test_missing_required_field(tmp_path, capsys):
    cfg = {"command": "kato-test", "space": {"bundled": "euclidean_m3"},
           "potential": {"bundled": "coulomb_r3"}}
    code, _ = run_cli(tmp_path, cfg)
    assert code == 2
    assert "t_grid" in capsys.readouterr().err


def test_unknown_bundled_name(tmp_path, capsys):
    cfg = dict(SPECTRUM_CFG, mesh={"bundled": "no_such_mesh"})
    code, _ = run_cli(tmp_path, cfg)
    assert code == 2
    assert "no_such_mesh" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# exit code 0: a passing run, report and table layout

def test_spectrum_run_report(tmp_path):
    code, out = run_cli(tmp_path, SPECTRUM_CFG)
    assert code == 0
    report = load_report(out)
    assert report["status"] == "pass"
    assert report["command"] == "spectrum"
    assert set(report) == {"schema_version", "command", "parameters",
                           "results", "checks", "status"}

    eigs = [row["value"] for row in report["results"]["eigenvalues"]]
    want = sorted(1.0 - math.cos((2.0 * math.pi * j + math.pi / 3.0) / 3.0)
                  for j in range(3))
    assert np.allclose(eigs, want, atol=1e-12)

    pnums = []
    collect_pnums(report["results"], pnums)
    assert len(pnums) == 4                 # lowest + three eigenvalues
    for p in pnums:
        assert p["provenance"] in PROVENANCES
        assert p["error"] >= 0.0

    text = (out / "report.json").read_text()
    assert str(out) not in text            # no filesystem paths inside
    assert "time" not in report["parameters"]
    # keys are serialized sorted, so a re-dump must be byte identical
    assert text == json.dumps(report, indent=2, sort_keys=True) + "\n"

    spectrum_csv = (out / "spectrum.csv").read_text().splitlines()
    assert spectrum_csv[0] == "index,eigenvalue,residual"
    assert len(spectrum_csv) == 4
    plot = (out / "plot_spectrum.csv").read_text().splitlines()
    assert plot[0] == "x,y"


def test_kato_run_tables(tmp_path):
    cfg = {
        "command": "kato-test",
        "space": {"bundled": "euclidean_m3"},
        "potential": {"bundled": "coulomb_r3"},
        "t_grid": [1e-4, 1e-3, 1e-2, 1e-1],
        "r_grid": [2.0, 8.0],
        "seed": 0,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    kato = load_report(out)["results"]["kato"]
    assert kato["verdict"] == "member"
    for row in kato["eta_grid"]:
        want = 2.0 * math.sqrt(2.0 * row["t"] / math.pi)
        assert abs(row["eta"]["value"] - want) < 1e-6 * want

    eta_csv = (out / "eta.csv").read_text().splitlines()
    assert eta_csv[0] == "t,eta,err"
    assert len(eta_csv) == 5
    res_csv = (out / "resolvent.csv").read_text().splitlines()
    assert res_csv[0] == "r,C_r,err"
    assert (out / "plot_eta.csv").read_text().splitlines()[0] == "x,y"


# ---------------------------------------------------------------------------
# exit code 1: contract violations

def test_form_bounds_rejects_inverse_square(tmp_path, capsys):
    cfg = {
        "command": "form-bounds",
        "space": {"bundled": "euclidean_m3"},
        "potential": {"bundled": "inverse_square_r3"},
        "seed": 0,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 1
    assert "form_boundedness" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# option precedence and reference mode

def test_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("KATOFORM_SEED", "5")
    code, out = run_cli(tmp_path, SPECTRUM_CFG)
    assert code == 0
    assert load_report(out)["parameters"]["seed"] == 5

    shutil.rmtree(out)
    code, out = run_cli(tmp_path, SPECTRUM_CFG, "--seed", "9")
    assert code == 0
    assert load_report(out)["parameters"]["seed"] == 9

    monkeypatch.delenv("KATOFORM_SEED")
    shutil.rmtree(out)
    code, out = run_cli(tmp_path, SPECTRUM_CFG)
    assert code == 0
    assert load_report(out)["parameters"]["seed"] == 0   # from the config


def test_env_config_and_out(tmp_path, monkeypatch):
    monkeypatch.setenv("KATOFORM_CONFIG",
                       write_config(tmp_path, SPECTRUM_CFG))
    monkeypatch.setenv("KATOFORM_OUT", str(tmp_path / "envout"))
    assert cli.main(["run"]) == 0
    assert (tmp_path / "envout" / "report.json").exists()


def test_reference_mode_forces_single_worker(tmp_path):
    code, out = run_cli(tmp_path, SPECTRUM_CFG, "--reference",
                        "--workers", "4")
    assert code == 0
    params = load_report(out)["parameters"]
    assert params["reference"] is True
    assert params["workers"] == 1


@pytest.mark.parametrize("name", ["spectrum_flux_cycle", "fk_coulomb"])
def test_bundled_config_byte_stable(tmp_path, name):
    cfg = bundled_config(name)
    raw = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        code = cli.main(["run", "--config", write_config(tmp_path, cfg),
                         "--out", str(out), "--reference"])
        assert code == 0
        raw.append((out / "report.json").read_bytes())
    assert raw[0] == raw[1]


def test_all_bundled_configs_are_valid(tmp_path):
    for name in bundled.list_configs():
        cfg = bundled_config(name)
        assert cfg["command"] in cli.COMMANDS
        assert not cli._schema_diagnostics(cfg["command"], cfg)


# ---------------------------------------------------------------------------
# catalog listing

def test_list_bundled_in_process(capsys):
    assert cli.main(["list-bundled"]) == 0
    catalog = json.loads(capsys.readouterr().out)
    assert "coulomb_r3" in catalog["potentials"]
    assert "euclidean_m3" in catalog["spaces"]
    assert "hyperbolic_m3" in catalog["spaces"]
    assert "flux_cycle_3" in catalog["meshes"]
    assert "kato_coulomb" in catalog["configs"]


def test_console_script():
    exe = shutil.which("katoform")
    if exe is None:
        proc = subprocess.run([sys.executable, "-m", "katoform.cli",
                               "list-bundled"],
                              capture_output=True, text=True)
    else:
        proc = subprocess.run([exe, "list-bundled"],
                              capture_output=True, text=True)
    assert proc.returncode == 0
    assert "flux_cycle_3" in proc.stdout
