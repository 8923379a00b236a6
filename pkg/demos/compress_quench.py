"""Compress a quench trajectory into order-M circuits and watch the fidelity fall.

A small chain is evolved with TEBD from |0...0>; at every sampled time the
state is fitted by circuits of order 1..3 (warm-started in time).  Higher
orders hold the fidelity above 1 - 1e-4 for longer.

    python demos/compress_quench.py
"""

from cqc import mps
from cqc.circuit import near_identity_circuit
from cqc.experiments import FIDELITY_THRESHOLD, crossing_time
from cqc.model import REAL_TIME, IsingParams, trotter_step
from cqc.sweep import SweepConfig, maximize_overlap


def main():
    p = IsingParams(n_sites=10, coupling=1.0, transverse=1.4, longitudinal=0.0)
    states, _ = mps.tebd_trajectory(mps.zero_mps(p.n_sites), trotter_step(p, 0.01, 4, REAL_TIME), 150, 256, sample_every=10)
    times = [0.1 * k for k in range(len(states))]
    for order in (1, 2, 3):
        c = near_identity_circuit(p.n_sites, order, rng=0)
        fids = []
        for s in states:
            c, rep = maximize_overlap(s, c, SweepConfig(2000, 1e-12, 1e-4, anderson=8))
            fids.append(rep.final_fidelity)
        t_star = crossing_time(times, fids, FIDELITY_THRESHOLD)
        print(f"M={order}: 1-F at t=1.5 is {1 - fids[-1]:.2e}, t* = {t_star}")


if __name__ == "__main__":
    main()
