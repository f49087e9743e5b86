"""Adjoint calculus and closability certificates for structured operator
matrices on the real sequence space l2."""

from .calculus import (
    BlockDomains,
    CertifiedAdjoint,
    ClosureRep,
    ClosureSide,
    ColOp,
    CoupledSumDomain,
    OpMatrix,
    RowOp,
    adjoint_when_mostly_bounded,
    assemble,
    col_adjoint_via_bounded_factor,
    col_formal_adjoint,
    closure_via_bounded_factor,
    composite_from_json,
    composite_to_json,
    matrix_formal_adjoint,
    pullback_through_diagonal,
    row_adjoint,
)
from .domains import (
    All,
    CoordinateZero,
    DomainDescriptor,
    RationalWeight,
    ResidualL2,
    SeriesConverges,
    Verdict,
    WeightedL2,
    admits_all_finitely_supported,
    forced_coordinates,
    intersect,
    member,
)
from .errors import OpmxError
from .gallery import GalleryCase, GridDerivativePair, build_case, family_corpus, list_cases
from .operators import (
    AppliedVector,
    StructuredOperator,
    apply,
    apply_coordinate,
    domain_of,
    formal_adjoint_op,
    is_bounded,
    operator_from_json,
    operator_to_json,
    truncation_matrix,
)
from .seqspace import (
    CoefficientFamily,
    FiniteSupport,
    PowerLaw,
    Scaled,
    SparseVector,
    Sum,
    Truncation,
    eval_family,
    family_from_json,
    family_to_json,
    inner,
    norm,
    norm_squared,
    truncate_family,
    unit_family,
)
from .verify import (
    SubspaceSpec,
    VerificationReport,
    WitnessFamily,
    check_compression_transpose,
    check_inclusion,
    check_pairing,
    check_strict_gap,
    core_criterion,
    core_vector_hypothesis,
    denseness_obstruction,
    run_witness,
)

__version__ = "0.1.0"
