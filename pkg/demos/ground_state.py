"""Ground state of the mixed-field Ising chain three ways.

Direct energy minimization over an order-M circuit, imaginary-time evolution
restricted to the same circuit, and DMRG at bond dimension 2^M.  For M = 1
all three agree, because an order-1 circuit is exactly a chi = 2 MPS.

    python demos/ground_state.py
"""

import math

from cqc import mps
from cqc.circuit import near_identity_circuit
from cqc.evolver import EvolutionConfig, evolve_imaginary
from cqc.model import IsingParams
from cqc.statevector import ground_state
from cqc.sweep import SweepConfig, minimize_energy


def main():
    p = IsingParams(n_sites=10, coupling=1.0, transverse=1.2, longitudinal=0.1)
    exact, _ = ground_state(p)
    print(f"exact ground energy          {exact:.10f}")
    for order in (1, 2):
        init = near_identity_circuit(p.n_sites, order, rng=0)
        _, trace = minimize_energy(p, init, SweepConfig(3000, 1e-12, 1e-15, anderson=8))
        cfg = EvolutionConfig(
            p, order, 0.1, math.inf, kind="imaginary", sweep=SweepConfig(max_iters=1),
            dt_schedule=(0.1, 0.05, 0.01), accelerate=8, patience=30,
        )
        rep, _ = evolve_imaginary(cfg, init)
        _, e_dmrg = mps.dmrg_ground_state(p, 2**order)
        print(f"M={order}: minimization {trace[-1]:.10f}  imaginary time {rep.energies[-1]:.10f}  "
              f"DMRG chi={2**order} {e_dmrg:.10f}")


if __name__ == "__main__":
    main()
