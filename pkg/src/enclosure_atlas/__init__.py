"""Decomposition of finite-dimensional quantum Markov semigroups into
transient subspace, minimal enclosures, and degenerate enclosure families,
with identifiability checks for the uniqueness of the decomposition."""

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    hermitian_basis,
    kernel_basis,
    matrix_exponential,
    psd_project,
    support_projector,
)
from .semigroup import (
    KrausChannel,
    LindbladModel,
    Superoperator,
    adjoint_generator,
    apply,
    build_generator,
    channel_superoperator,
    fixed_point_basis,
    propagate,
    validate,
)
from .decomposition import (
    DecompositionError,
    DecompositionReport,
    DegenerateFamily,
    EnclosureRecord,
    algebra_structure,
    cutoff_generator,
    decompose,
    extremal_state,
    family_projector,
    is_enclosure,
    recurrent_projector,
    verify_decomposition,
)
from .oqrw import (
    OqrwSpec,
    RateMatrix,
    closed_classes,
    general_oqrw,
    invariant_measures,
    minimal_oqrw,
    verify_oqrw_theorem,
)
from .identifiability import (
    IdentifiabilityReport,
    QndModel,
    continuous_identifiability,
    discrete_identifiability,
    nondegeneracy_check,
    omega,
    qnd_diagonalize,
    qnd_uniqueness,
    uniqueness_cross_check,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "DecompositionError",
    "DecompositionReport",
    "DegenerateFamily",
    "EnclosureRecord",
    "IdentifiabilityReport",
    "KrausChannel",
    "LindbladModel",
    "OqrwSpec",
    "QndModel",
    "RateMatrix",
    "Superoperator",
    "Tolerances",
    "adjoint_generator",
    "algebra_structure",
    "apply",
    "build_generator",
    "channel_superoperator",
    "closed_classes",
    "continuous_identifiability",
    "cutoff_generator",
    "decompose",
    "discrete_identifiability",
    "extremal_state",
    "family_projector",
    "fixed_point_basis",
    "general_oqrw",
    "hermitian_basis",
    "invariant_measures",
    "is_enclosure",
    "kernel_basis",
    "matrix_exponential",
    "minimal_oqrw",
    "nondegeneracy_check",
    "omega",
    "propagate",
    "psd_project",
    "qnd_diagonalize",
    "qnd_uniqueness",
    "recurrent_projector",
    "support_projector",
    "uniqueness_cross_check",
    "validate",
    "verify_decomposition",
    "verify_oqrw_theorem",
]
