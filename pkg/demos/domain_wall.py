"""Domain-wall melting on five qubits, ready for hardware.

Evolves |--+++> with an order-1 circuit, compares the central <sigma_x> with
exact evolution, and writes gauge-randomized circuit files for the final
time into ./domain_wall_circuits/.

    python demos/domain_wall.py
"""

from pathlib import Path

from cqc.evolver import EvolutionConfig, evolve_real
from cqc.experiments import domain_wall_circuit, domain_wall_state
from cqc.export_gauge import export_circuit, gauge_metadata, randomize_gauge
from cqc.model import X, IsingParams
from cqc.statevector import evolve_exact, expectation
from cqc.sweep import SweepConfig


def main():
    p = IsingParams(n_sites=5, coupling=1.0, transverse=0.25, longitudinal=0.2)
    cfg = EvolutionConfig(p, 1, 0.01, 5.0, sweep=SweepConfig(2000, 1e-12, 1e-6))
    rep, final = evolve_real(cfg, domain_wall_circuit(5))
    psi0 = domain_wall_state(5)
    for k in range(0, len(rep.times), 50):
        t = rep.times[k]
        ed = expectation(evolve_exact(psi0, p, t), X, 3, 5)
        print(f"t={t:4.1f}  circuit {rep.sx[k][2]:+.4f}  exact {ed:+.4f}")
    out = Path("domain_wall_circuits")
    out.mkdir(exist_ok=True)
    variants = [randomize_gauge(final, seed) for seed in range(10)]
    for v in variants:
        export_circuit(v.circuit, out / f"seed{v.seed}.json", gauge=gauge_metadata([v]))
    print(f"wrote {len(variants)} gauge variants to {out}/")


if __name__ == "__main__":
    main()
