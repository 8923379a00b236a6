"""Quantum many-body states as order-M sequential circuits.

Modules:
    tensor_core: contractions, truncated SVD, polar factors.
    model: mixed-field Ising chain, Trotter steps, MPO.
    statevector: dense oracle for small chains.
    mps: MPS container, TEBD, DMRG.
    circuit: the staircase circuit ansatz and its MPS mapping.
    sweep: environment-based overlap and energy optimization.
    evolver: real- and imaginary-time evolution restricted to circuits.
    dilation: unitary dilation of non-unitary gates.
    export_gauge: gauge-randomized variants and the circuit file format.
    experiments, cli: reproducible experiment drivers.
"""

from cqc.circuit import SequentialCircuit, circuit_to_mps, circuit_to_statevector
from cqc.model import IsingParams

__version__ = "0.1.0"
__all__ = ["IsingParams", "SequentialCircuit", "circuit_to_mps", "circuit_to_statevector", "__version__"]
