import math

import numpy as np
import pytest

from cqc import mps
from cqc.circuit import circuit_to_statevector, identity_circuit, near_identity_circuit, product_state_circuit
from cqc.evolver import EvolutionConfig, EvolutionReport, estimate_error, evolve_imaginary, evolve_real
from cqc.model import IsingParams
from cqc.statevector import evolve_exact, ground_state, zero_state
from cqc.sweep import SweepConfig

FAST = SweepConfig(2000, 1e-13, 1e-8)


def test_config_validation():
    p = IsingParams(4)
    with pytest.raises(ValueError):
        EvolutionConfig(p, 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(p, 1, 0.1, 1.0, kind="complex")
    with pytest.raises(ValueError):
        EvolutionConfig(p, 1, 0.1, 1.0, dt_schedule=(0.1, 0.05))
    with pytest.raises(ValueError):
        EvolutionConfig(p, 1, 0.1, 1.0, kind="imaginary", dt_schedule=(0.05, 0.1))
    with pytest.raises(ValueError):
        EvolutionConfig(p, 1, 0.1, 1.0, accelerate=4)
    cfg = EvolutionConfig(p, 2, 0.1, 1.0, kind="imaginary", dt_schedule=[0.1, 0.01])
    assert cfg.schedule == (0.1, 0.01) and cfg.target_chi == 16


def test_init_must_match():
    cfg = EvolutionConfig(IsingParams(4, 1, 1, 0), 2, 0.1, 0.1)
    with pytest.raises(ValueError):
        evolve_real(cfg, identity_circuit(5, 2))
    with pytest.raises(ValueError):
        evolve_real(cfg, identity_circuit(4, 1))
    with pytest.raises(ValueError):
        evolve_imaginary(cfg, identity_circuit(4, 2))


def test_tiny_step_leaves_circuit_unchanged():
    p = IsingParams(6, 1, 1.4, 0.1)
    c0 = near_identity_circuit(6, 2, rng=0)
    rep, c = evolve_real(EvolutionConfig(p, 2, 1e-6, 1e-6, sweep=FAST), c0)
    assert len(rep.times) == 2
    assert rep.fidelities[1] == pytest.approx(1.0, abs=1e-10)
    assert abs(abs(np.vdot(circuit_to_statevector(c0), circuit_to_statevector(c))) - 1) < 1e-10


def test_real_time_tracks_exact_evolution_small_chain():
    # N = 4 and M = 2 can represent every state, so only compression noise remains
    p = IsingParams(4, 1, 1.4, 0.1)
    rep, c = evolve_real(EvolutionConfig(p, 2, 0.02, 0.4, trotter_order=4, sweep=FAST), identity_circuit(4, 2))
    exact = evolve_exact(zero_state(4), p, 0.4)
    assert abs(np.vdot(exact, circuit_to_statevector(c))) ** 2 > 1 - 1e-8
    acc = np.array(rep.accumulated)
    assert np.all(np.diff(acc) <= 0) and acc[-1] > 0
    assert rep.times[-1] == pytest.approx(0.4)
    assert rep.sz[0].tolist() == pytest.approx([1.0] * 4)


def test_error_estimate_tracks_true_infidelity():
    n, m = 8, 1
    p = IsingParams(n, 1, 1.4, 0.1)
    dt, t_end = 0.05, 1.5
    rep, _ = evolve_real(
        EvolutionConfig(p, m, dt, t_end, trotter_order=4, sweep=SweepConfig(5000, 1e-14, 1e-10), keep_circuits=True),
        identity_circuit(n, m),
    )
    checked = 0
    for k in range(1, len(rep.times)):
        exact = evolve_exact(zero_state(n), p, rep.times[k])
        true_inf = 1 - abs(np.vdot(exact, circuit_to_statevector(rep.circuits[k]))) ** 2
        if 1e-6 <= true_inf <= 0.05:
            checked += 1
            assert abs((1 - rep.accumulated[k]) - true_inf) <= 3 * true_inf
    assert checked >= 5


def test_estimate_error_closed_forms():
    rep = EvolutionReport(times=[0.0, 0.1, 0.2], accumulated=[1.0, 1.0, 1.0])
    assert estimate_error(rep) is None
    f = 1 - 1e-3
    steps = math.ceil(math.log(0.99) / math.log(f))
    rep = EvolutionReport(times=[k * 0.1 for k in range(40)], accumulated=[f**k for k in range(40)])
    assert estimate_error(rep, 0.99) == pytest.approx(steps * 0.1)


def test_imaginary_time_small_chain_reaches_ground_state():
    p = IsingParams(4, 1, 1.2, 0.1)
    cfg = EvolutionConfig(
        p, 2, 0.1, math.inf, kind="imaginary", sweep=SweepConfig(200, 1e-14, 1e-10), dt_schedule=(0.1, 0.05, 0.01, 0.002)
    )
    rep, _ = evolve_imaginary(cfg, near_identity_circuit(4, 2, rng=0))
    assert rep.energies[-1] == pytest.approx(ground_state(p)[0], abs=1e-6)
    assert rep.dts[1] == 0.1 and rep.dts[-1] == 0.002


def test_imaginary_time_eigenstate_is_fixed_point():
    # g = h = 0: |+...+> (x basis) is a ground state of -sum X X
    p = IsingParams(5, 1, 0.0, 0.0)
    had = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    init = product_state_circuit([had] * 5)
    cfg = EvolutionConfig(p, 1, 0.1, 0.5, kind="imaginary", sweep=FAST)
    rep, _ = evolve_imaginary(cfg, init)
    assert np.allclose(rep.energies, -4.0, atol=1e-10)
    assert np.allclose(rep.fidelities, 1.0, atol=1e-10)


def test_accelerated_imaginary_time_matches_plain():
    p = IsingParams(8, 1, 1.2, 0.1)
    base = dict(kind="imaginary", sweep=SweepConfig(max_iters=1), dt_schedule=(0.1, 0.05, 0.01))
    plain, _ = evolve_imaginary(EvolutionConfig(p, 1, 0.1, math.inf, **base), near_identity_circuit(8, 1, rng=0))
    fast, _ = evolve_imaginary(
        EvolutionConfig(p, 1, 0.1, math.inf, accelerate=8, **base), near_identity_circuit(8, 1, rng=0)
    )
    _, e2 = mps.dmrg_ground_state(p, 2)
    assert plain.energies[-1] == pytest.approx(e2, abs=1e-6)
    assert fast.energies[-1] == pytest.approx(e2, abs=1e-6)
    assert len(fast.times) < len(plain.times)


def test_per_gate_mode_runs():
    p = IsingParams(5, 1, 1.2, 0.1)
    cfg = EvolutionConfig(p, 1, 0.05, 0.1, kind="imaginary", per_gate=True, sweep=FAST)
    rep, _ = evolve_imaginary(cfg, near_identity_circuit(5, 1, rng=0))
    assert len(rep.times) == 3 and rep.energies[-1] < rep.energies[0]


def test_report_serialization(tmp_path):
    p = IsingParams(4, 1, 1.4, 0.1)
    cfg = EvolutionConfig(p, 1, 0.05, 0.1, sweep=FAST)
    rep, _ = evolve_real(cfg, identity_circuit(4, 1))
    rep.to_csv(tmp_path / "r.csv")
    rep.to_json(tmp_path / "r.json", cfg)
    header = (tmp_path / "r.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["t", "dt", "fidelity", "accumulated"] and "sz_4" in header
    import json

    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["config"]["order"] == 1 and len(doc["times"]) == 3
    assert rep.central("sz").shape == (3,)
