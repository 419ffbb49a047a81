"""Toolkit for set functions with exchange structure: exchange-axiom
checkers and witness finders, conjugate/duality verification, instance
families, and a reproducible suite harness."""

from .core import (
    HARD_CAP,
    NEG_INF,
    Falsification,
    FormatError,
    PriceVector,
    SetFn,
    effective_domain,
    elements_of,
    ext_add,
    ext_leq,
    load,
    mask_of,
    max_over,
    restrict_by_size,
    store,
    tilt,
)
from .duality import (
    ConjugateEval,
    FenchelResult,
    RestrictionTriple,
    build_restrictions,
    check_conjugate_submodular,
    check_cross_submodular,
    check_lemma6_bound,
    check_strong_quotient,
    conjugate,
    conjugate_sized,
    fenchel_gap,
    integer_grid,
)
from .exchange import (
    ExchangeContext,
    ExchangeWitness,
    augment_lt,
    check_exc_multi,
    check_exc_single,
    check_m_concave,
    exchange_leq,
    find_multi_exchange,
    find_single_exchange,
    lift,
    matroid_base_multi_exchange,
)
from .families import (
    CorpusInstance,
    LaminarSpec,
    Matroid,
    assignment_valuation,
    default_corpus,
    graphic_matroid,
    laminar_concave_fn,
    matroid_rank_fn,
    mutate,
    partition_matroid,
    random_mnat_concave,
    random_table,
    uniform_matroid,
    weighted_basis_valuation,
)
from .reporting import REPORT_SCHEMA, VerificationReport

__all__ = [
    "HARD_CAP",
    "NEG_INF",
    "Falsification",
    "FormatError",
    "PriceVector",
    "SetFn",
    "effective_domain",
    "elements_of",
    "ext_add",
    "ext_leq",
    "load",
    "mask_of",
    "max_over",
    "restrict_by_size",
    "store",
    "tilt",
    "ConjugateEval",
    "FenchelResult",
    "RestrictionTriple",
    "build_restrictions",
    "check_conjugate_submodular",
    "check_cross_submodular",
    "check_lemma6_bound",
    "check_strong_quotient",
    "conjugate",
    "conjugate_sized",
    "fenchel_gap",
    "integer_grid",
    "ExchangeContext",
    "ExchangeWitness",
    "augment_lt",
    "check_exc_multi",
    "check_exc_single",
    "check_m_concave",
    "exchange_leq",
    "find_multi_exchange",
    "find_single_exchange",
    "lift",
    "matroid_base_multi_exchange",
    "CorpusInstance",
    "LaminarSpec",
    "Matroid",
    "assignment_valuation",
    "default_corpus",
    "graphic_matroid",
    "laminar_concave_fn",
    "matroid_rank_fn",
    "mutate",
    "partition_matroid",
    "random_mnat_concave",
    "random_table",
    "uniform_matroid",
    "weighted_basis_valuation",
    "REPORT_SCHEMA",
    "VerificationReport",
]
