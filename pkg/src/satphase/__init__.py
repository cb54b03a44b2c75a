"""Random satisfiability models: sharp/coarse threshold classification,
instance generation, instrumented solving, order parameters, and Monte
Carlo sweeps."""

from .templates import (
    MAX_ARITY,
    Clause,
    ConstraintDistribution,
    ConstraintTemplate,
    ThresholdClass,
    classify_threshold,
    clause_templates,
    eval_template,
    implicates_up_to,
    is_trivially_satisfiable,
    strongly_depends_on_2xor,
    strongly_depends_on_literal,
    template_from_name,
    xor_template,
)
from .instances import (
    AppliedConstraint,
    Cnf,
    Instance,
    cnf_to_dimacs,
    gen_2p_sat,
    gen_ksat,
    gen_kxorsat,
    gen_molloy,
    parse_instance,
    serialize_instance,
    to_cnf,
)
from .solver import (
    SolveResult,
    brute_force_solve,
    dpll_solve,
    gauss_solve_xor,
    solve_instance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
