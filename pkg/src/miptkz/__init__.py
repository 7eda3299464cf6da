"""miptkz: driven measurement-induced criticality in stabilizer circuits.

Simulation of (1+1)-D brick-wall Clifford circuits with tunable
measurement rate, linear ramps of the rate through the entanglement
transition, trajectory-ensemble averaging, and finite-time-scaling
analysis (rescaling, data collapse, exponent fits).
"""

from .kernels import BACKEND, HAVE_NUMBA
from .tableau import (
    MeasurementOutcome,
    PauliOperator,
    Tableau,
    apply_fixture_gate,
    apply_two_qubit_clifford,
    measure_z,
    new_zero_state,
    symplectic_inner,
)
from .clifford import (
    GROUP_ORDER,
    CliffordGate2Q,
    canonical_index,
    enumerate_2q_group,
    gate_from_index,
    sample_uniform_2q,
)
from .observables import (
    Region,
    ancilla_entropy,
    entanglement_entropy,
    gf2_rank,
    half_chain_entropy,
    tripartite_mutual_information,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "MeasurementOutcome",
    "PauliOperator",
    "Tableau",
    "apply_fixture_gate",
    "apply_two_qubit_clifford",
    "measure_z",
    "new_zero_state",
    "symplectic_inner",
    "GROUP_ORDER",
    "CliffordGate2Q",
    "canonical_index",
    "enumerate_2q_group",
    "gate_from_index",
    "sample_uniform_2q",
    "Region",
    "ancilla_entropy",
    "entanglement_entropy",
    "gf2_rank",
    "half_chain_entropy",
    "tripartite_mutual_information",
    "__version__",
]
