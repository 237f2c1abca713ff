import json
import subprocess
import sys

import pytest

from sedstat import cli

SEEDED = {
    "field-sim": ["field-sim", "--modes", "100", "--realizations", "200", "--t-points", "5"],
    "field-sim-trajectory": ["field-sim", "--modes", "50", "--trajectory"],
    "osc-sim": ["osc-sim", "--tau", "5e-3", "--realizations", "3", "--mode-spacing", "0.5"],
    "counting": ["counting", "--A", "3", "--N", "2", "--occ", "0.5,1,0.5", "--samples", "200000"],
    "limit": ["limit", "--A", "10,100", "--trials", "200"],
}


def invoke(capsys, argv):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.filterwarnings("ignore")
@pytest.mark.parametrize("name", sorted(SEEDED))
def test_seeded_output_identical_across_runs_and_threads(capsys, name):
    argv = SEEDED[name] + ["--seed", "17"]
    outs = []
    for threads in ("1", "1", "3", "auto"):
        code, out, _ = invoke(capsys, argv + ["--threads", threads])
        assert code == 0
        outs.append(out)
    assert len(set(outs)) == 1
    code, other, _ = invoke(capsys, argv[:] + ["--seed", "18"])
    if name != "field-sim-trajectory":
        assert other != outs[0]


def test_manifest_on_stderr(capsys):
    code, out, err = invoke(capsys, ["spectrum", "--points", "5"])
    assert code == 0
    manifest = json.loads(err)
    assert manifest["subcommand"] == "spectrum" and "checksum" in manifest and "version" in manifest
    assert len(out.splitlines()) == 6


def test_out_file_and_manifest(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = invoke(capsys, ["resonance", "--tau", "1e-5", "--format", "json", "--out", str(target)])
    assert code == 0 and out == ""
    rows = json.loads(target.read_text())
    assert rows[0]["relative_gap"] < 1e-4
    assert json.loads((tmp_path / "r.json.manifest.json").read_text())["subcommand"] == "resonance"


def test_config_file_supplies_required_flags(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("A=3\nN=2\nsamples=2000\n")
    code, out, _ = invoke(capsys, ["counting", "--config", str(cfg), "--samples", "3000"])
    assert code == 0
    header, row = out.splitlines()
    assert row.split(",")[:2] == ["3", "2"] and row.split(",")[-1] == "3000"


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("A=3\nbogus=1\n")
    assert invoke(capsys, ["counting", "--config", str(cfg), "--N", "2"])[0] == 2


@pytest.mark.parametrize(
    "argv,code",
    [
        (["nosuch"], 2),
        (["counting", "--A", "2"], 2),
        (["limit", "--A", "x"], 2),
        (["counting", "--A", "2", "--N", "3", "--occ", "1,1"], 1),
        (["resonance", "--tau", "0.5"], 1),
        (["fluctuation", "--t-start", "2", "--t-end", "1"], 1),
        (["osc-sim", "--dt", "0.2"], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert invoke(capsys, argv)[0] == code


def test_every_subcommand_runs(capsys):
    for argv in (
        ["spectrum", "--points", "3"],
        ["resonance", "--tau", "1e-4", "--density", "zeropoint"],
        ["fluctuation", "--points", "4"],
        ["entropy", "--points", "3", "--format", "json"],
    ):
        code, out, _ = invoke(capsys, argv)
        assert code == 0 and out


def test_console_script_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "sedstat.cli", "spectrum", "--points", "2"], capture_output=True, text=True
    )
    assert res.returncode == 0 and len(res.stdout.splitlines()) == 3
