"""Scott processes of relational structures."""
from __future__ import annotations

from .builder import (
    build_model_pair,
    build_thread,
    build_weaving,
    certify_realization,
    realize_model,
    verify_weaving,
)
from .encoding import decode_process, encode_formula, encode_level, encode_process
from .engine import analyze, analyze_to_stabilization, iso_check, rank_of_structure
from .formulas import FormulaStore, Injection, default_store
from .levels import OMEGA, OmegaPlus
from .oracle import EFOracle, brute_force_isomorphic, ef_equivalent
from .process import ScottProcess
from .processkit import (
    amalgamate,
    extend_at_limit,
    extend_by_completion,
    f_set,
    injective_beyond,
    is_amalgamative,
    limit_process,
    minimal_set,
    process_rank,
    validate_process,
)
from .structures import (
    MultiplicityStructure,
    Vocabulary,
    count_atomic_types,
    dump_structure,
    finite_structure,
    load_structure,
    make_structure,
)

__version__ = "0.1.0"
