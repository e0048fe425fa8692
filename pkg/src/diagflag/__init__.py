"""Exact combinatorics of flag-variety embeddings induced by block-diagonal
group inclusions: supernatural-number exhaustions, coloured two-column
graphs, embedding evaluation and Picard pullbacks, standard-extension
classification, and ind-level realizations, all over exact rationals,
cross-checked by an independent linear-algebra oracle."""

from .diagembed import (
    DiagonalEmbedding,
    constant_spaces,
    embedding_from_alpha,
    equivariance_check,
    is_linear_graph,
    is_standard_extension_graph,
    oracle_sweep,
    picard_pullback,
    unipotent_inclusion,
)
from .egraph import (
    EGraph,
    NotParabolic,
    ParabolicRestriction,
    SurjectionAlpha,
    build_from_alpha,
    from_dot,
    partition_edges,
    to_dot,
    validate_egraph,
)
from .errors import DomainError, InternalCheckError, ScaleError, ValidationReport
from .flagcore import (
    Classification,
    FlagType,
    PicardPullback,
    StandardExtensionData,
    classify_bruteforce,
    coordinate_flag,
    duality,
    is_linear,
    se_compose,
    se_eval,
    support_and_constants,
)
from .indlimit import (
    Admissible,
    AdmissibilityCertificate,
    ConstantTail,
    GeneralizedFlagType,
    GeometricTail,
    NotAdmissible,
    Realization,
    RefutationProof,
    SnGraph,
    Unknown,
    admissible,
    build_realization_sn_graph,
    canonical_exhaustion,
    decompose_sn_graph,
    factor_linear_egraph,
    validate_sn_graph,
    verify_certificate,
    verify_refutation,
)
from .ratlin import (
    Flag,
    RatSubspace,
    block_embed,
    nilradical_inclusion_oracle,
    stabilizer_oracle,
)
from .supernat import (
    INF,
    ExhaustionSpec,
    SupernaturalNumber,
    divides_sn,
    step_ratio,
    validate_exhaustion,
)

__all__ = [
    "Admissible",
    "AdmissibilityCertificate",
    "Classification",
    "ConstantTail",
    "DiagonalEmbedding",
    "DomainError",
    "EGraph",
    "ExhaustionSpec",
    "Flag",
    "FlagType",
    "GeneralizedFlagType",
    "GeometricTail",
    "INF",
    "InternalCheckError",
    "NotAdmissible",
    "NotParabolic",
    "ParabolicRestriction",
    "PicardPullback",
    "RatSubspace",
    "Realization",
    "RefutationProof",
    "ScaleError",
    "SnGraph",
    "StandardExtensionData",
    "SupernaturalNumber",
    "SurjectionAlpha",
    "Unknown",
    "ValidationReport",
    "admissible",
    "block_embed",
    "build_from_alpha",
    "build_realization_sn_graph",
    "canonical_exhaustion",
    "classify_bruteforce",
    "constant_spaces",
    "coordinate_flag",
    "decompose_sn_graph",
    "divides_sn",
    "duality",
    "embedding_from_alpha",
    "equivariance_check",
    "factor_linear_egraph",
    "from_dot",
    "is_linear",
    "is_linear_graph",
    "is_standard_extension_graph",
    "nilradical_inclusion_oracle",
    "oracle_sweep",
    "partition_edges",
    "picard_pullback",
    "se_compose",
    "se_eval",
    "stabilizer_oracle",
    "step_ratio",
    "support_and_constants",
    "to_dot",
    "unipotent_inclusion",
    "validate_egraph",
    "validate_exhaustion",
    "validate_sn_graph",
    "verify_certificate",
    "verify_refutation",
]

__version__ = "0.1.0"
