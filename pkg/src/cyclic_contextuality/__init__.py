"""Exact contextuality analysis of cyclic systems of +/-1 measurements."""
from .criteria import (
    canonicalize_signs,
    cntx,
    cntx_value,
    criterion_conjectured,
    criterion_main,
    delta_min_formula,
    delta_zero,
    optimal_connection_vector,
)
from .feasibility import (
    chain_joint,
    closing_range,
    cycle_feasible,
    maximal_pair_coupling,
    pair_bounds,
    pair_pmf,
)
from .ingest import (
    CountsRecord,
    SpecFormatError,
    counts_to_spec,
    emit_report,
    emit_witness,
    parse_counts,
    parse_spec,
    serialize_spec,
)
from .lp_oracle import enumerate_vertex_sample, feasible_with_connections, min_delta
from .model import (
    AnalysisReport,
    BunchStats,
    ConnectionVector,
    CouplingPMF,
    InvalidSystemError,
    SystemSpec,
    ValidationError,
    delta_of_coupling,
    validate_system,
)
from .smax import classify_indices, expand_s0_pivot, expand_s1_pivot, s_one, s_zero

__version__ = "0.1.0"
