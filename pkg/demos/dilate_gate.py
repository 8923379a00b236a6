"""Embed an imaginary-time Trotter gate in a unitary with one ancilla.

    python demos/dilate_gate.py
"""

import numpy as np

from cqc.dilation import apply_postselected, dilate
from cqc.model import IMAGINARY_TIME, IsingParams, bond_propagator


def main():
    p = IsingParams(n_sites=2, coupling=1.0, transverse=1.2, longitudinal=0.1)
    a = bond_propagator(p, 1, 0.1, IMAGINARY_TIME)
    g = dilate(a, seed=0)
    print("scale s =", g.scale)
    print("unitarity error", np.max(np.abs(g.unitary.conj().T @ g.unitary - np.eye(8))))
    psi = np.array([1, 0, 0, 0], dtype=complex)
    out, prob = apply_postselected(g, psi)
    ref = a @ psi
    print("success probability", prob)
    print("post-selected state matches A|psi>/|A psi|:", np.allclose(out, ref / np.linalg.norm(ref)))


if __name__ == "__main__":
    main()
