"""Stabilizer-circuit engine for conditional-mutual-information spreading
in noisy one-dimensional random circuits."""

__version__ = "0.1.0"

from .pauli import Gf2Matrix, PauliString, gf2_rank, multiply, symplectic_product
from .tableau import (
    InvariantError,
    MeasureResult,
    StabilizerTableau,
    SymplecticMatrix,
    sample_random_clifford,
)
from .clipped import (
    ClippedTableau,
    LengthStats,
    clip,
    cmi_endpoints,
    length_deviation_stats,
    mi_endpoints,
    sample_random_stabilizer_state,
    validate_clipped,
)
from .circuits import (
    CircuitConfig,
    ErrorConfiguration,
    SpreadingField,
    average_realizations,
    four_block_experiment,
    heralded_layer,
    run_coarse_grained,
)
from .analytics import (
    CollapseCurve,
    DecayProfile,
    XdecResult,
    analytic_cmi_norm,
    analytic_rescaled,
    analytic_xdec,
    analytic_xdec_rescaled,
    extract_xdec,
    k1k2_model,
    rescale,
    unrescale,
)
from .distill import (
    BellPairPlan,
    DistillCertificate,
    bell_witness_count,
    distill,
    find_bell_candidates,
    verify_distillation,
)

__all__ = [
    "__version__",
    "Gf2Matrix",
    "PauliString",
    "gf2_rank",
    "multiply",
    "symplectic_product",
    "InvariantError",
    "MeasureResult",
    "StabilizerTableau",
    "SymplecticMatrix",
    "sample_random_clifford",
    "ClippedTableau",
    "LengthStats",
    "clip",
    "cmi_endpoints",
    "length_deviation_stats",
    "mi_endpoints",
    "sample_random_stabilizer_state",
    "validate_clipped",
    "CircuitConfig",
    "ErrorConfiguration",
    "SpreadingField",
    "average_realizations",
    "four_block_experiment",
    "heralded_layer",
    "run_coarse_grained",
    "CollapseCurve",
    "DecayProfile",
    "XdecResult",
    "analytic_cmi_norm",
    "analytic_rescaled",
    "analytic_xdec",
    "analytic_xdec_rescaled",
    "extract_xdec",
    "k1k2_model",
    "rescale",
    "unrescale",
    "BellPairPlan",
    "DistillCertificate",
    "bell_witness_count",
    "distill",
    "find_bell_candidates",
    "verify_distillation",
]
