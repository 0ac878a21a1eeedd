"""Desk-scale workbench: a tiny recursive-function calculus with a
self-delimiting binary code, time-bounded program-length complexity,
the induced a priori distribution over integers, gravitational orbit
sensitivity demos, and multiple-comparison statistics for spurious
correlations."""

__version__ = "0.1.0"

from .recfun import (
    ArityError,
    Compose,
    Const,
    EvalOutcome,
    Mu,
    ParseError,
    PrimRec,
    Proj,
    Succ,
    Term,
    eval_reference,
    eval_term,
    parse_term,
    to_source,
)
from .codec import (
    Program,
    decode_program,
    decode_term,
    encode_term,
    bits_to_index,
    index_to_bits,
    layout_hash,
    run_index,
)
from .complexity import (
    CensusReport,
    ComplexityRecord,
    OrderSegment,
    census,
    k_exp,
    kolmogorov_order,
    lz_compress,
    lz_decompress,
    lz_upper_bound,
    tower_eval,
    tower_program,
)
from .apriori import (
    SemimeasureTable,
    apriori_prob,
    background_fit,
    enumerate_semimeasure,
    peak_report,
)
from .nbody import (
    PhaseState,
    Trajectory,
    circular_pair,
    divergence_probe,
    integrate,
    pythagorean_state,
)
from .empiric import (
    FrequencyTable,
    ScanResult,
    compare_apriori,
    extract_numbers,
    spurious_scan,
)
