"""Quantum state tomography with non-orthogonal equidistant bases and weak values."""

from .bases import (
    Basis,
    BasisFamily,
    OperatorSet,
    SeparationParams,
    ValidationReport,
    build_family,
    derive_basis,
    derive_basis_zero,
    dual_basis,
    load_family,
    make_equidistant_basis,
    make_params,
    save_family,
    validate_family,
)
from .errors import DataMismatch, InvalidInput, NumericalFailure, WeakTomoError
from .noise import (
    NoiseModel,
    SweepConfig,
    SweepResult,
    baseline_projective_inversion,
    metrics,
    perturb_weak_values,
    run_sweep,
    sample_probabilities,
)
from .qubit import con2_residual, minimal_protocol, protocol_weak_value, qubit_family
from .tomography import (
    DensityMatrix,
    WeakValueTable,
    constraint_residuals,
    parameter_audit,
    random_density_matrix,
    reconstruct,
    reconstruct_adjoint,
    weak_values,
)

__version__ = "0.1.0"
