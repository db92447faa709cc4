"""Numerical toolkit for Schwarzian derivatives and normal-family probes.

The package is layered: ``jets`` propagates order-3 derivative jets
through complex arithmetic, ``dsl`` parses and evaluates one-parameter
family expressions in z and n, ``schwarzian`` provides the Schwarzian and
spherical derivatives with their Mobius algebra and identity checks, and
``probe`` runs grid scans and bound checks on top.  ``cli`` exposes it all
as the ``schwarzian-lab`` command.
"""

from .dsl import (
    EvalError,
    FamilyExpr,
    ParseError,
    eval_jet,
    eval_jet_seeded,
    parse,
    pretty_print,
)
from .jets import (
    ComplexJet3,
    DivisionByZeroAtPoint,
    JetError,
    OverflowAtPoint,
    jet_add,
    jet_const,
    jet_div,
    jet_exp,
    jet_log,
    jet_mul,
    jet_neg,
    jet_pow_int,
    jet_sub,
    jet_var,
)
from .probe import (
    FloorCheckReport,
    GridSpec,
    HypothesesReport,
    LocalBoundReport,
    MartyGridReport,
    NormalityVerdict,
    PointStats,
    SegmentEvaluationError,
    Verdict,
    cauchy_derivative_bound,
    check_theorem_hypotheses,
    classify,
    derivative_floor_check,
    local_bound_estimate,
    marty_scan,
    sd_family_scan,
    sd_bound_from_hypotheses,
    value_bound_check,
)
from .schwarzian import (
    ConjugacyViolated,
    CriticalPointError,
    DegenerateMobiusError,
    GuardViolation,
    IdentityReport,
    Mobius,
    POINT_AT_INFINITY,
    PoleOfMobius,
    check_composition_law,
    check_conjugation,
    check_mobius_invariance,
    check_reciprocal,
    mobius_apply,
    mobius_compose,
    mobius_inverse,
    mobius_jet,
    mobius_on_jet,
    schwarzian,
    spherical_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # jets
    "ComplexJet3",
    "JetError",
    "DivisionByZeroAtPoint",
    "OverflowAtPoint",
    "jet_var",
    "jet_const",
    "jet_add",
    "jet_sub",
    "jet_neg",
    "jet_mul",
    "jet_div",
    "jet_exp",
    "jet_log",
    "jet_pow_int",
    # dsl
    "FamilyExpr",
    "ParseError",
    "EvalError",
    "parse",
    "pretty_print",
    "eval_jet",
    "eval_jet_seeded",
    # schwarzian
    "schwarzian",
    "spherical_derivative",
    "Mobius",
    "POINT_AT_INFINITY",
    "mobius_apply",
    "mobius_compose",
    "mobius_inverse",
    "mobius_on_jet",
    "mobius_jet",
    "IdentityReport",
    "check_mobius_invariance",
    "check_composition_law",
    "check_reciprocal",
    "check_conjugation",
    "CriticalPointError",
    "PoleOfMobius",
    "GuardViolation",
    "ConjugacyViolated",
    "DegenerateMobiusError",
    # probe
    "GridSpec",
    "PointStats",
    "MartyGridReport",
    "Verdict",
    "NormalityVerdict",
    "LocalBoundReport",
    "FloorCheckReport",
    "HypothesesReport",
    "SegmentEvaluationError",
    "marty_scan",
    "sd_family_scan",
    "classify",
    "local_bound_estimate",
    "derivative_floor_check",
    "value_bound_check",
    "cauchy_derivative_bound",
    "sd_bound_from_hypotheses",
    "check_theorem_hypotheses",
]
