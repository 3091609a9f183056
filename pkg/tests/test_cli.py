import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from wvn_spectral import PotentialParams, SequenceFamily
from wvn_spectral.cli import ConfigError, RunConfig, config_from_args, main, parse_number, run


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_parse_number():
    assert parse_number("pi/4") == pytest.approx(math.pi / 4)
    assert parse_number("-2*pi/3") == pytest.approx(-2 * math.pi / 3)
    assert parse_number("0.5") == 0.5
    for bad in ("__import__('os')", "pi/0", "e"):
        with pytest.raises(ConfigError):
            parse_number(bad)


configs = st.builds(
    RunConfig,
    potential=st.builds(PotentialParams, st.floats(-3, 3), st.floats(-7, 7), st.floats(-3, 3),
                        st.sampled_from([SequenceFamily.zero(), SequenceFamily.geometric(0.5), SequenceFamily.power(2.0, 0.1)])),
    command=st.sampled_from(["scan", "pseudogap", "gev", "model", "classify"]),
    lambda_min=st.floats(-1.99, -0.01),
    lambda_max=st.floats(0.01, 1.99),
    points=st.integers(2, 500),
    N=st.one_of(st.none(), st.integers(16, 10**7)),
    tol=st.floats(1e-12, 1.0),
    eps_grid=st.one_of(st.none(), st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=8).map(tuple)),
    out=st.one_of(st.none(), st.just("out.csv")),
    format=st.sampled_from(["csv", "json"]),
)


@given(configs)
def test_config_round_trip(cfg):
    assert RunConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("kw", [
    {"lambda_min": -2.5}, {"lambda_min": 1.0, "lambda_max": 0.5}, {"points": 1},
    {"tol": 0.0}, {"command": "plot"}, {"format": "xml"}, {"eps_grid": (0.1, -0.2)},
])
def test_config_invariants(kw):
    with pytest.raises(ConfigError):
        RunConfig(PotentialParams.free(), **kw)


def test_free_scan_csv(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["--command", "scan", "--c", "0", "--lambda-min", "-1.9", "--lambda-max", "1.9",
                 "--points", "39", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["lambda", "phi", "rho_prime", "error_estimate", "flags"]
    assert len(rows) == 39
    for r in rows:
        lam = float(r["lambda"])
        assert float(r["rho_prime"]) == pytest.approx(math.sqrt(4 - lam * lam) / (2 * math.pi), abs=1e-4)
        assert r["flags"] == ""


def test_output_is_deterministic(tmp_path):
    args = ["--command", "scan", "--c", "1", "--omega", "pi/3", "--points", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b), "--workers", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_csv_uses_twelve_significant_digits(tmp_path):
    out = tmp_path / "s.csv"
    main(["--command", "scan", "--c", "0", "--points", "3", "--lambda-min", "-1", "--lambda-max", "1", "--out", str(out)])
    rho = read_csv(out)[1]["rho_prime"]
    assert rho == f"{1 / math.pi:.12g}"


def test_pseudogap_report(tmp_path, capsys):
    out = tmp_path / "pg.json"
    assert main(["--command", "pseudogap", "--c", "1", "--omega", "pi/4", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    fits = data["fits"]
    assert len(fits) == 4
    assert all(f["predicted_exponent"] == pytest.approx(0.70711, abs=1e-5) for f in fits)
    assert "predicted 0.70711" in capsys.readouterr().err
    # the fit nearest to the prediction is well within 10%
    assert min(abs(f["fitted_exponent"] / f["predicted_exponent"] - 1) for f in fits) < 0.1
    assert {r["flags"] for r in data["rows"]} == {"plus:left", "plus:right", "minus:left", "minus:right"}


def test_rejects_omega_on_lattice(capsys):
    assert main(["--command", "pseudogap", "--c", "1", "--omega", "pi/2"]) == 2
    assert "pi*Z/2" in capsys.readouterr().err
    assert main(["--command", "scan", "--c", "5", "--omega", "0", "--delta", "1"]) == 2
    # the free operator has no standing condition
    assert main(["--command", "scan", "--c", "0", "--omega", "0", "--points", "3"]) == 0


def test_bad_flags_exit_nonzero(capsys):
    assert main(["--command", "scan", "--lambda-min", "3"]) == 2
    assert main(["--command", "scan", "--q", "geometric:2"]) == 2
    assert main(["--config", "/nonexistent/run.json"]) == 2


def test_config_file_with_override(tmp_path):
    cfg = RunConfig(PotentialParams(1.0, math.pi / 4), command="classify", format="json")
    path = tmp_path / "run.json"
    path.write_text(cfg.to_json())
    got = config_from_args(["--config", str(path), "--c", "2"])
    assert got.command == "classify" and got.format == "json"
    assert got.potential.c == 2.0 and got.potential.omega == pytest.approx(math.pi / 4)


def test_config_accepts_pi_expressions(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"potential": {"c": 1, "omega": "pi/4"}, "command": "classify"}))
    assert config_from_args(["--config", str(path)]).potential.omega == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("command", ["gev", "classify", "model"])
def test_other_commands_run(command):
    buf, err = io.StringIO(), io.StringIO()
    cfg = RunConfig(PotentialParams(1.0, math.pi / 4), command=command, N=20000, format="json")
    assert run(cfg, buf, err) == 0
    data = json.loads(buf.getvalue())
    assert data
    assert err.getvalue()


def test_model_command_csv():
    buf = io.StringIO()
    cfg = RunConfig(PotentialParams.free(), command="model", beta=0.5, N=10**5)
    assert run(cfg, buf, io.StringIO()) == 0
    rows = dict(r for r in csv.reader(io.StringIO(buf.getvalue())))
    assert float(rows["phi0_rank_one_defect"]) < 1e-4
    assert float(rows["phi_plus_kernel_residual"]) < 1e-2


def test_flagged_rows_warn(capsys):
    # grid point 2 lands exactly on the critical point sqrt(2)
    assert main(["--command", "scan", "--c", "1", "--omega", "pi/4", "--lambda-min", "0",
                 "--lambda-max", str(math.sqrt(2)), "--points", "2"]) == 0
    captured = capsys.readouterr()
    assert "critical" in captured.out
    assert "1 grid point(s) flagged" in captured.err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "wvn_spectral.cli", "--command", "scan", "--c", "0",
                          "--points", "2", "--lambda-min", "-1", "--lambda-max", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "lambda,phi,rho_prime,error_estimate,flags"
