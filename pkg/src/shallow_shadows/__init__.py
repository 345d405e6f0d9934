"""Depth-modulated classical shadows with circular brickwork Clifford circuits."""

from .channel import (
    DenseMarkovOracle,
    apply_channel,
    build_t_mps,
    build_tau_mps,
    lift_to_pauli_mps,
    pair_signature,
    t_value,
    t_values,
    tau_value,
    tau_values,
)
from .circuits import INF, BrickworkCircuit, BrickworkSpec, monte_carlo_t, sample_brickwork, sample_circuit, stream_rng
from .clifford import CliffordTableau, clifford_group
from .estimators import ShadowEstimator, VariationalInverse
from .inverse import InversionConfig, InversionResult, exact_inverse, invert
from .mps import PeriodicMPS, dot, hadamard
from .norms import (
    NormReport,
    frobenius_bound_sq,
    ls_norm_sq,
    mc_state_dep_norm_sq,
    pauli_norm_sq,
    sparse_upper_sq,
    stabilizer_projector_norm_sq,
    statmech_t_lower_bound,
)
from .pauli import PauliString, basis_expectation, in_pm_Z
from .shadows import (
    EstimationReport,
    ShallowObservable,
    Snapshot,
    SnapshotSet,
    SparseObservable,
    acquire,
    cluster_hamiltonian,
    estimate_shallow,
    estimate_sparse,
    ghz_projector,
    median_of_means,
    snapshot_to_pauli_mps,
)
from .stabilizer import StabilizerState, measure_all

__version__ = "0.1.0"
