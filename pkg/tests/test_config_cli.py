import json
import math

import pytest

from sccbethe import cli
from sccbethe.config import load_config, parse_config_text, parse_number, resolve_workers
from sccbethe.errors import ConfigError


def test_parse_number_forms():
    assert parse_number("4/3") == pytest.approx(4 / 3)
    assert parse_number("2pi") == pytest.approx(2 * math.pi)
    assert parse_number("0.5*pi") == pytest.approx(math.pi / 2)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("1e-5") == 1e-5
    for bad in ("abc", "1/0", ""):
        with pytest.raises(ConfigError):
            parse_number(bad)


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nN = 20\nq = 6   # trailing\nq_list = 4/3, 60\n")
    cfg = load_config(str(path), ["N=10"])
    assert cfg["N"] == 10 and cfg["q"] == 6.0 and cfg["q_list"] == [4 / 3, 60.0]
    assert cfg["phi_max"] == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("override", ["bogus=1", "N=1.5", "t_steps=1", "u_max=-1", "format=xml",
                                      "q=0", "include_free=maybe", "delta=0", "noequals"])
def test_bad_config_rejected(override):
    with pytest.raises(ConfigError):
        load_config(None, [override])


def test_bad_config_line():
    with pytest.raises(ConfigError):
        parse_config_text("N 10\n")
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_worker_count(monkeypatch):
    monkeypatch.delenv("SCCBETHE_WORKERS", raising=False)
    assert resolve_workers(load_config()) == 1
    monkeypatch.setenv("SCCBETHE_WORKERS", "3")
    assert resolve_workers(load_config()) == 3
    assert resolve_workers(load_config(None, ["workers=2"])) == 2
    monkeypatch.setenv("SCCBETHE_WORKERS", "x")
    with pytest.raises(ConfigError):
        resolve_workers(load_config())


def test_format_cell():
    assert cli.format_cell(None) == ""
    assert cli.format_cell(0.1) == "0.10000000000000001"
    assert cli.format_cell(3) == "3"
    assert cli.format_cell(True) == "true"


def run(tmp_path, *args):
    return cli.main(list(args) + ["--set", f"output={tmp_path}"])


def test_config_error_exit(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--set", "nope=1") == 3
    assert cli.main(["nonsense"]) == 3
    assert run(tmp_path, "spectrum", "--set", "N=-2") == 3


def test_spectrum_csv(tmp_path):
    assert run(tmp_path, "spectrum", "--set", "N=10", "--set", "q=6") == 0
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert "# command=spectrum" in header and "# N=10" in header and "# q=6.0" in header
    body = [l for l in lines if not l.startswith("#")]
    assert body[0].split(",")[:3] == ["index", "label", "energy"]
    assert len(body) == 7
    energy = body[1].split(",")[2]
    assert float(energy) == float(repr(float(energy)))


def test_solver_failure_exit(tmp_path, monkeypatch):
    from sccbethe import experiments
    from sccbethe.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("no convergence", state=3, residual=1.0, coupling=0.5)
    monkeypatch.setattr(experiments, "solve_rapidities", boom)
    assert run(tmp_path, "spectrum", "--set", "N=4") == 2


def test_phase_sweep_flagged_rows_blank(tmp_path):
    assert run(tmp_path, "phase-sweep", "--set", "N=20", "--set", "phi_steps=64", "--set", "t=0.01") == 0
    lines = [l for l in (tmp_path / "phase-sweep.csv").read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    first = dict(zip(cols, lines[1].split(",")))
    assert first["phi"] == "0" and first["delta_phi_sq"] == "" and "guard_band" in first["flags"]
    assert first["mean_eta"] != ""


def test_json_output_and_determinism(tmp_path, monkeypatch):
    args = ["dwell-sweep", "--set", "N=12", "--set", "format=json", "--set", "u_steps=101"]
    monkeypatch.setenv("SCCBETHE_WORKERS", "1")
    assert run(tmp_path / "a", *args) == 0
    monkeypatch.setenv("SCCBETHE_WORKERS", "4")
    assert run(tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "dwell-sweep.json").read_text()
    b = (tmp_path / "b" / "dwell-sweep.json").read_text()
    doc_a, doc_b = json.loads(a), json.loads(b)
    assert set(doc_a) == {"config", "summary", "rows"}
    assert doc_a["rows"] == doc_b["rows"]
    assert doc_a["rows"][0].keys() == {"u", "eta1", "mean_eta", "var_eta"}


def test_seed_sweep_deterministic_across_workers(tmp_path):
    outs = []
    for w in ("1", "3"):
        assert run(tmp_path / w, "seed-sweep", "--set", "N=10", "--set", "t_steps=11", "--set", f"workers={w}") == 0
        text = (tmp_path / w / "seed-sweep.csv").read_text()
        outs.append([l for l in text.splitlines() if not l.startswith("# workers=") and not l.startswith("# output=")])
    assert outs[0] == outs[1]


def test_validate_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "validate", "--set", "N=2", "--set", "q=6") == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert run(tmp_path, "validate", "--set", "N=10", "--set", "q=6", "--set", "rapidity_perturbation=1e-6") == 1
    assert "FAIL  richardson_residual" in capsys.readouterr().out


def test_eta1_sweep_series(tmp_path):
    assert run(tmp_path, "eta1-sweep", "--set", "N=20", "--set", "eta1_t_steps=3",
               "--set", "q_prime_list=1000") == 0
    lines = [l for l in (tmp_path / "eta1-sweep.csv").read_text().splitlines() if not l.startswith("#")]
    series = [l.split(",")[0] for l in lines[1:]]
    assert series == ["free"] * 3 + ["quasifree"] * 3
