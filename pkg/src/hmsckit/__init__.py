"""Compositional message sequence charts, high-level MSCs, EMSO logic,
communicating finite-state machines, and undecidability reductions."""

from .cmsc import (
    Action,
    CMsc,
    CapExceeded,
    Event,
    InvalidCMsc,
    canonicalize,
    communication_graph,
    connected,
    from_canonical,
    is_msc,
    linearizations,
    make_cmsc,
    recv,
    send,
    validate,
    weakly_connected,
)
from .compose import CMscSet, concat_pair, concat_pair_naive, concat_sets
from .logic import (
    CostCapExceeded,
    EmsoFormula,
    EvalBudget,
    bounded_models,
    evaluate,
    evaluate_with,
)
from .closures import (
    ClosureContext,
    concat_formula,
    finite_sentence,
    formula_for_cmsc,
    iterate_formula,
    pad_prefixes,
    relativize_sim,
    relativize_w,
    sim_formulas,
    union_formula,
)
from .hmsc import (
    GeneralizedHmsc,
    Hmsc,
    bounded_language,
    cmscs_of_path,
    eliminate_state,
    hmsc_to_emso,
    loop_connected_bounded,
    safe_bounded,
    sat_search,
    simplify_term,
    term_language_bounded,
    term_to_formula,
    to_generalized,
    weakly_loop_connected_exact,
)
from .cfm import Cfm, ProcessMachine, accepts_msc, bounded_language_cfm
from .generate import CMscBounds, enumerate_cmscs
from .reductions import (
    CounterMachine,
    PcpInstance,
    TmSpec,
    cm2_to_hmsc,
    pcp_to_hmsc,
    tm_to_hmsc,
)

__version__ = "0.1.0"
