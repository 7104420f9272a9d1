from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from qreset import experiment
from qreset.cli import main
from qreset.efvector import MinimizationError
from qreset.experiment import SWAP_COLUMNS, TRAJECTORY_COLUMNS, VERIFY_COLUMNS, ConfigError, ExperimentConfig
from qreset.qmath import LN2

# Short, loosely resolved protocol runs for plumbing tests.
QUICK = {"tau": 2.0, "dt": 0.01, "store_every": 10}


def run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return main(argv)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def summary(tmp_path):
    return json.loads((tmp_path / "summary.json").read_text())


# --- verify -------------------------------------------------------------------


@pytest.mark.parametrize("flag", [[], ["--alpha0-from-phi"]])
def test_swap_verify_is_exact(tmp_path, flag):
    code = run(tmp_path, "verify", "--protocol", "swap", "--samples", "1000", "--tolerance", "1e-12", *flag)
    assert code == 0
    header, rows = read_csv(tmp_path / "verify.csv")
    assert tuple(header) == VERIFY_COLUMNS
    assert len(rows) == 1000
    s = summary(tmp_path)
    assert s["passed"] and s["max_abs_residual"] <= 1e-12


def test_verify_csv_round_trips(tmp_path):
    assert run(tmp_path, "verify", "--protocol", "swap", "--Eb", "2.5", "--samples", "200") == 0
    header, rows = read_csv(tmp_path / "verify.csv")
    col = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    ep_alpha = summary(tmp_path)["EP_alpha0"]
    np.testing.assert_allclose(col["residual"], (col["EP"] - ep_alpha) - (col["D0"] - col["Dtau"]), atol=1e-12)
    np.testing.assert_allclose(col["dEP"], col["EP"] - ep_alpha, atol=1e-12)
    np.testing.assert_allclose(col["kl"] + col["coherence"], col["D0"], atol=1e-10)
    np.testing.assert_allclose(col["EP"], col["Q"] + col["Stau"] - col["S0"], atol=1e-12)
    assert col["index"].tolist() == list(range(200))


def test_relaxation_verify(tmp_path):
    assert run(tmp_path, "verify", "--protocol", "fig3-relaxation", "--samples", "50", "--seed", "3") == 0
    s = summary(tmp_path)
    assert s["max_abs_residual"] <= 1e-5
    assert s["mean_kl_over_mean_D0"] >= 0.5
    assert s["max_coherence"] <= LN2
    assert s["alpha0_method"] == "numeric-minimizer"
    np.testing.assert_allclose(s["alpha0_bloch"], [0, 0, np.tanh(5.0)], atol=1e-3)
    for key in ("epsilon", "phi", "config", "timing_seconds"):
        assert key in s


def test_failed_assertion_still_writes_output(tmp_path, capsys):
    code = run(tmp_path, "verify", "--protocol", "fig3-relaxation", "--samples", "5", "--tolerance", "1e-300",
               config=dict(protocol="fig3-relaxation", **QUICK))
    assert code == 1
    assert "FAIL" in capsys.readouterr().out
    assert len(read_csv(tmp_path / "verify.csv")[1]) == 5
    assert summary(tmp_path)["passed"] is False


def test_minimizer_failure_exits_with_numerical_code(tmp_path, capsys, monkeypatch):
    def stuck(objective, tol, **kw):
        raise MinimizationError("simplex did not contract", best=np.zeros(3), value=0.1)

    monkeypatch.setattr(experiment, "minimize_ep", stuck)
    cfg = dict(protocol="fig3-relaxation", samples=2, **QUICK)
    assert run(tmp_path, "verify", config=cfg) == 3
    assert "best so far" in capsys.readouterr().err


# --- infer-phi ----------------------------------------------------------------


def test_infer_phi_swap(tmp_path, capsys):
    assert run(tmp_path, "infer-phi", "--protocol", "swap", "--Eb", "1") == 0
    printed = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(printed["phi"], [0, 0, -2.0], atol=1e-12)
    np.testing.assert_allclose(printed["alpha0_bloch"], [0, 0, 0.761594], atol=1e-6)
    assert json.loads((tmp_path / "phi.json").read_text()) == printed
    assert set(printed) >= {"ef_mixed", "phi", "phi_norm", "alpha0_bloch", "condition_number"}


def test_infer_phi_relaxation(tmp_path, capsys):
    assert run(tmp_path, "infer-phi", "--protocol", "fig3-relaxation") == 0
    a = json.loads(capsys.readouterr().out)["alpha0_bloch"]
    np.testing.assert_allclose(a, [0, 0, np.tanh(5.0)], atol=1e-3)


def test_infer_phi_rotating_is_off_axis(tmp_path, capsys):
    assert run(tmp_path, "infer-phi", "--protocol", "fig1-rotating") == 0
    a = np.array(json.loads(capsys.readouterr().out)["alpha0_bloch"])
    assert np.hypot(a[0], a[1]) > 1e-3


# --- simulate -----------------------------------------------------------------


def test_simulate_relaxation(tmp_path):
    assert run(tmp_path, "simulate", "--protocol", "fig3-relaxation", "--samples", "10", "--seed", "1") == 0
    files = sorted((tmp_path / "trajectories").glob("sample_*.csv"))
    assert len(files) == 10
    for f in files:
        header, rows = read_csv(f)
        assert tuple(header) == TRAJECTORY_COLUMNS
        assert float(rows[-1][3]) >= 0.99
        assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 50.0
    s = summary(tmp_path)
    assert len(s["samples"]) == 10 and s["epsilon"] <= 1e-2


def test_simulate_from_target_state_regression(tmp_path):
    # EP of the rotating protocol started in the target state; frozen from a full-resolution run.
    assert run(tmp_path, "simulate", "--protocol", "fig1-rotating", "--initial", "0,0,1") == 0
    rec = summary(tmp_path)["samples"][0]
    assert rec["initial_bloch"] == [0.0, 0.0, 1.0]
    assert rec["EP"] == pytest.approx(1.0414737164155157, abs=1e-8)
    _, rows = read_csv(tmp_path / "trajectories" / "sample_0000.csv")
    assert float(rows[-1][-1]) == rec["EP"]


def test_simulate_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        out.mkdir()
        assert run(out, "simulate", "--samples", "3", "--seed", "9", config=QUICK) == 0
        outs.append([f.read_bytes() for f in sorted((out / "trajectories").glob("*.csv"))])
    assert outs[0] == outs[1]


def test_simulate_csv_round_trips(tmp_path):
    assert run(tmp_path, "simulate", "--samples", "1", "--seed", "2", config=QUICK) == 0
    _, rows = read_csv(tmp_path / "trajectories" / "sample_0000.csv")
    data = np.array(rows, dtype=float)
    q, s, ep = data[:, 4], data[:, 6], data[:, 7]
    np.testing.assert_allclose(ep, q + s - s[0], atol=1e-12)


def test_custom_schedule(tmp_path):
    cfg = {"protocol": "custom", "tau": 2.0, "dt": 0.01, "store_every": 10,
           "custom_schedule": {"t": [0, 1, 2], "E": [1.0, 3.0, 6.0], "theta": [0.0, 1.0, 3.0]}}
    assert run(tmp_path, "simulate", "--samples", "2", config=cfg) == 0
    assert len(summary(tmp_path)["samples"]) == 2


# --- swap demo ----------------------------------------------------------------


def test_swap_demo(tmp_path):
    assert run(tmp_path, "swap-demo") == 0
    header, rows = read_csv(tmp_path / "swap_demo.csv")
    assert tuple(header) == SWAP_COLUMNS
    idx = {name: i for i, name in enumerate(header)}
    gamma = [r for r in rows if r[idx["state"]] == "gamma"]
    for r in gamma:
        for name in ("Q", "dS", "EP"):
            assert abs(float(r[idx[name]])) < 1e-14
    for r in rows:
        assert float(r[idx["EP"]]) == pytest.approx(float(r[idx["D"]]), abs=1e-12)
    excited = [float(r[idx["EP"]]) for r in rows if r[idx["state"]] == "excited"]
    assert len(excited) == 17 and np.all(np.diff(excited) > 0)


# --- configuration ------------------------------------------------------------


def test_override_beats_config_file(tmp_path):
    cfg = {"protocol": "swap", "samples": 4, "seed": 1}
    assert run(tmp_path, "verify", "--samples", "7", config=cfg) == 0
    s = summary(tmp_path)
    assert s["config"]["samples"] == 7 and s["config"]["seed"] == 1


@pytest.mark.parametrize("config, field", [
    ({"tau": -1.0}, "tau"),
    ({"samples": 0}, "samples"),
    ({"sampling": "cube"}, "sampling"),
    ({"colour": "red"}, "colour"),
    ({"target": [0, 0, 2]}, "target"),
    ({"dt": 0.3}, "dt"),
])
def test_config_errors(tmp_path, capsys, config, field):
    assert run(tmp_path, "simulate", config=config) == 2
    assert field in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["verify", "--config", str(tmp_path / "nope.json")]) == 2


def test_simulate_rejects_swap(tmp_path):
    assert run(tmp_path, "simulate", "--protocol", "swap") == 2


def test_bad_initial_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--initial", "1,2"])
    assert err.value.code == 2


def test_config_object_validation():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"seed": -1})
    assert err.value.field == "seed"
    cfg = ExperimentConfig.from_dict({"protocol": "fig2-fixed-angle"})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
