import json

import numpy as np
import pytest

from cqc.cli import main
from cqc.errors import SchemaError
from cqc.experiments import (
    ExperimentConfig,
    crossing_time,
    domain_wall_circuit,
    domain_wall_state,
    fit_models,
    load_config,
    run_experiment,
)
from cqc.circuit import circuit_to_statevector
from cqc.model import X
from cqc.statevector import expectation


def test_config_rejects_unknown_fields(tmp_path):
    with pytest.raises(SchemaError, match="unknown"):
        ExperimentConfig.from_dict({"experiment": "evolve_real", "colour": "red"})
    with pytest.raises(SchemaError):
        ExperimentConfig.from_dict({"experiment": "nonsense"})
    bad = tmp_path / "c.json"
    bad.write_text('{"experiment": "evolve_real",\n "n_sites": }')
    with pytest.raises(SchemaError, match="line 2"):
        load_config(bad, "evolve_real")
    other = tmp_path / "o.json"
    other.write_text('{"experiment": "evolve_imag"}')
    with pytest.raises(SchemaError, match="not"):
        load_config(other, "evolve_real")


def test_config_layering(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"t_max": 0.5, "seeds": [1, 2]}))
    cfg = load_config(path, "compress_fidelity", seed=9)
    assert cfg.n_sites == 15 and cfg.chi == 256 and cfg.t_max == 0.5 and cfg.seeds == [9]
    full = load_config(None, "compress_fidelity", full_scale=True)
    assert full.n_sites == 31 and full.chi == 1024
    assert load_config(None, "evolve_real").n_sites == 11


def test_crossing_time():
    assert crossing_time([0, 1, 2], [1.0, 0.8, 0.6], 0.7) == pytest.approx(1.5)
    assert crossing_time([0, 1], [1.0, 0.9], 0.5) is None
    assert crossing_time([0, 1], [0.4, 0.3], 0.5) == 0


def test_fits_distinguish_linear_and_exponential():
    t = np.linspace(0.5, 3.0, 6)
    lin = fit_models(t, 861 * t + 91)
    assert lin["prefers"] == "linear"
    assert lin["linear"]["a"] == pytest.approx(861) and lin["linear"]["b"] == pytest.approx(91)
    exp = fit_models(t, 540 * np.exp(1.69 * t) - 910)
    assert exp["prefers"] == "exponential"
    assert exp["exponential"]["b"] == pytest.approx(1.69, rel=1e-4)
    with pytest.raises(ValueError):
        fit_models([1, 2], [3, 4])


def test_domain_wall_initial_state():
    c = domain_wall_circuit(5)
    psi = circuit_to_statevector(c)
    assert np.allclose(psi, domain_wall_state(5))
    assert [round(expectation(psi, X, j, 5), 12) for j in range(1, 6)] == [-1, -1, 1, 1, 1]


def _tiny(experiment, **kw):
    base = dict(n_sites=6, chi=64, t_max=0.3, sample_dt=0.1, orders=[1, 2], fields=[0.0], max_sweeps=500)
    base.update(kw)
    return ExperimentConfig(experiment=experiment, **base)


def test_compress_fidelity_outputs(tmp_path):
    summary = run_experiment(_tiny("compress_fidelity"), tmp_path)
    rows = (tmp_path / "compress_fidelity.csv").read_text().splitlines()
    assert rows[0] == "t,h,kind,M,chi,fidelity,entropy"
    first = [r for r in rows[1:] if r.startswith("0.0,") and ",circuit," in r]
    assert all(abs(float(r.split(",")[5]) - 1) < 1e-12 for r in first)
    assert "0.0" in summary["fields"]
    # the reference checkpoint is reused on a second run
    assert any((tmp_path / "checkpoints").iterdir())


def test_runs_are_byte_identical(tmp_path):
    cfg = _tiny("compress_fidelity", t_max=0.2)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "compress_fidelity.csv").read_bytes() == (tmp_path / "b" / "compress_fidelity.csv").read_bytes()


def test_param_scaling_reports_fit_errors(tmp_path):
    out = run_experiment(_tiny("param_scaling", t_max=0.2), tmp_path)
    assert "error" in out["fits"]["0.0"]["circuit"]


def test_evolve_real_and_imag(tmp_path):
    s = run_experiment(_tiny("evolve_real", orders=[1], dt=0.05, t_max=0.2, longitudinal=0.1), tmp_path / "r")
    assert set(s["runs"]) == {"1"}
    assert (tmp_path / "r" / "evolve_real_M1.csv").exists()
    assert (tmp_path / "r" / "evolve_real_M1_final.json").exists()
    s = run_experiment(_tiny("evolve_imag", orders=[1], transverse=1.2), tmp_path / "i")
    assert abs(s["runs"]["1"]["difference"]) < 1e-6


def test_domain_wall_and_gauge(tmp_path):
    cfg = ExperimentConfig("domain_wall_qpu", n_sites=5, transverse=0.25, longitudinal=0.2, orders=[1], t_max=0.4,
                           seeds=[0, 1])
    s = run_experiment(cfg, tmp_path / "d")
    assert s["max_abs_error_center"] < 0.05
    assert len(list((tmp_path / "d" / "circuits").iterdir())) == 2 * 5
    cfg = ExperimentConfig("gauge_check", n_sites=5, transverse=0.25, longitudinal=0.2, orders=[1], t_max=0.2,
                           seeds=list(range(3)))
    s = run_experiment(cfg, tmp_path / "g")
    assert s["max_deviation"] < 1e-10


def test_cli_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"t_max": 0.2, "seeds": [0, 1]}))
    assert main(["gauge_check", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "4"]) == 0
    doc = json.loads((tmp_path / "o" / "gauge_check.json").read_text())
    assert doc["seeds"] == [4]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["gauge_check", "--config", str(cfg), "--out", str(tmp_path / "p")]) == 2
    assert "unknown config field" in capsys.readouterr().err
