"""Finite-state pattern-matching machines: construction, transformation,
speed analysis, and optimization."""

from .machine import (
    Alphabet,
    BruteforceVerdict,
    CapExceeded,
    ExecutionTrace,
    Machine,
    MachineError,
    Pattern,
    PreconditionError,
    SchemaError,
    TraceStep,
    canonical_relabel,
    deserialize,
    dot_export,
    from_json,
    occurrences_oracle,
    order,
    prune_unreachable,
    run_generic,
    serialize,
    to_json,
    validate_bruteforce,
)
from .classics import (
    ALGORITHMS,
    build_classic,
    build_horspool,
    build_knuth_morris_pratt,
    build_morris_pratt,
    build_naive,
    build_quicksearch,
    failure_function,
    horspool_shift_table,
    quicksearch_shift_table,
    strong_failure_function,
)
from .expansion import (
    ExpandedMachine,
    MemoryState,
    ValidityVerdict,
    check_validity_standard,
    compact,
    expand,
    has_zero_shift_cycle,
    is_redundant,
    is_standard,
    max_valid_shift,
    memory_of_standard,
    redirect,
    serialize_expanded,
    standardize,
)
from .models import (
    Hmm,
    IidModel,
    MarkovTextModel,
    TextModel,
    as_hmm,
    determinize_emission,
    fit_iid,
    hmm_from_iid,
    hmm_from_markov,
    ingest_text,
    model_from_json,
    model_to_json,
    sample_text,
    text_probability,
)
from .reduction import (
    ShiftProfile,
    are_interchangeable,
    canonicalize,
    compute_mnshft,
    equalize_irrelevant,
    is_consistent,
    positify,
    relevant_states,
)
from .optimize import (
    AssemblyRejected,
    CandidateState,
    SearchConfig,
    SearchResult,
    assemble_machine,
    candidate_states,
    optimize_exhaustive,
    optimize_hill_climb,
)
from .speed import (
    EmpiricalSpeed,
    StateChain,
    asymptotic_speed,
    asymptotic_speed_hmm,
    asymptotic_speed_iid,
    decompose,
    empirical_speed,
    state_chain_hmm,
    state_chain_iid,
    trace_bounds,
)

__version__ = "0.1.0"
