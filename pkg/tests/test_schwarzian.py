"""Schwarzian operator, Moebius algebra, and the four identity checkers."""

import cmath
import random

import pytest
from hypothesis import assume, given, strategies as st

from schwarzian_lab import (
    POINT_AT_INFINITY,
    ComplexJet3,
    ConjugacyViolated,
    CriticalPointError,
    DegenerateMobiusError,
    EvalError,
    FamilyExpr,
    GuardViolation,
    Mobius,
    PoleOfMobius,
    check_composition_law,
    check_conjugation,
    check_mobius_invariance,
    check_reciprocal,
    eval_jet,
    jet_const,
    jet_div,
    jet_var,
    mobius_apply,
    mobius_compose,
    mobius_inverse,
    mobius_jet,
    mobius_on_jet,
    parse,
    schwarzian,
    spherical_derivative,
)
from schwarzian_lab.dsl import Var

import support


def mobius_close(m1: Mobius, m2: Mobius, tol: float = 1e-12) -> bool:
    return all(
        abs(x - y) <= tol
        for x, y in ((m1.a, m2.a), (m1.b, m2.b), (m1.c, m2.c), (m1.d, m2.d))
    )


# ---------------------------------------------------------------------------
# spherical derivative


def test_spherical_unit_jet():
    assert spherical_derivative(ComplexJet3(1, 1, 1, 1)) == 0.5


def test_spherical_exp_family_at_origin():
    # e^{nz} at 0 has value 1 and derivative n, so the statistic is n/2.
    f = parse("exp(n*z)")
    for n in (1, 2, 5, 32):
        stat = spherical_derivative(eval_jet(f, n, 0.0))
        assert stat == pytest.approx(n / 2, rel=1e-12)


def test_spherical_of_constant_is_zero():
    assert spherical_derivative(ComplexJet3(5 + 2j, 0, 0, 0)) == 0.0


def test_spherical_invariant_under_reciprocal():
    # |(1/f)'| / (1 + |1/f|^2) simplifies to the same quotient.
    rng = random.Random(7)
    f = parse("exp(z) + z^2")
    for _ in range(50):
        z = support.random_point(rng, 1.5)
        jf = eval_jet(f, 1, z)
        if abs(jf.v) < 1e-6:
            continue
        jr = jet_div(jet_const(1.0), jf)
        assert spherical_derivative(jr) == pytest.approx(
            spherical_derivative(jf), rel=1e-9
        )


# ---------------------------------------------------------------------------
# schwarzian from a jet


def test_schwarzian_exp_3z():
    f = parse("exp(3*z)")
    s = schwarzian(eval_jet(f, 1, 0.7 - 0.2j))
    assert s == pytest.approx(-4.5, rel=1e-12)


def test_schwarzian_of_mobius_jet_vanishes():
    m = Mobius(2, 1, 1, 1)
    s = schwarzian(mobius_jet(m, 0.0))
    assert abs(s) <= 1e-12


def test_schwarzian_example2_closed_form():
    # exp(z/(nz+1)) has S = -1 / (2 (nz+1)^4); at n=1, z=1 that is -1/32.
    f = parse("exp(z/(n*z+1))")
    s = schwarzian(eval_jet(f, 1, 1.0))
    assert s == pytest.approx(-1 / 32, rel=1e-12)


def test_schwarzian_critical_point():
    f = parse("z^2")
    with pytest.raises(CriticalPointError):
        schwarzian(eval_jet(f, 1, 0.0))


def test_schwarzian_floor_is_configurable():
    j = ComplexJet3(0.0, 1e-8, 1.0, 1.0)
    schwarzian(j)
    with pytest.raises(CriticalPointError):
        schwarzian(j, floor=1e-6)


# ---------------------------------------------------------------------------
# Moebius construction


def test_mobius_normalizes_determinant():
    m = Mobius(2, 0, 0, 2)
    assert (m.a, m.b, m.c, m.d) == (1, 0, 0, 1)


def test_mobius_canonical_sign_diagonal():
    assert Mobius(-1, 0, 0, -1) == Mobius(1, 0, 0, 1)


def test_mobius_canonical_sign_offdiagonal():
    m = Mobius(0, -1, 1, 0)
    assert (m.a, m.b, m.c, m.d) == (0, 1, -1, 0)


def test_mobius_phase_in_upper_half_kept():
    m = Mobius(1j, 0, 0, -1j)
    assert (m.a, m.b, m.c, m.d) == (1j, 0, 0, -1j)


def test_mobius_degenerate_rejected():
    with pytest.raises(DegenerateMobiusError):
        Mobius(1, 2, 2, 4)


def test_mobius_degenerate_relative_to_scale():
    # ad - bc = 1e3 survives an absolute test but is cancellation noise
    # next to |ad| ~ 1e16.
    with pytest.raises(DegenerateMobiusError):
        Mobius(1e8, 1e8, 1e8, 1e8 + 1e-5)


def test_mobius_extreme_diagonal_is_fine():
    m = Mobius(1e8, 0, 0, 1e-8)
    assert mobius_apply(m, 2.0) == pytest.approx(2e16, rel=1e-12)


def test_mobius_compose_acts_like_composition():
    shift = Mobius(1, 1, 0, 1)
    double = Mobius(2, 0, 0, 1)
    both = mobius_compose(shift, double)
    for z in (0.0, 1.5, -2 + 1j):
        assert mobius_apply(both, z) == pytest.approx(2 * z + 1, rel=1e-12, abs=1e-12)
    assert mobius_close(both, Mobius(2, 1, 0, 1))


def test_mobius_compose_associative():
    rng = random.Random(3)
    for _ in range(20):
        m1 = support.random_mobius(rng)
        m2 = support.random_mobius(rng)
        m3 = support.random_mobius(rng)
        left = mobius_compose(mobius_compose(m1, m2), m3)
        right = mobius_compose(m1, mobius_compose(m2, m3))
        assert mobius_close(left, right, tol=1e-10)


def test_mobius_inverse_roundtrip():
    m = Mobius(3, 1, 1, -2)
    ident = mobius_compose(m, mobius_inverse(m))
    assert mobius_close(ident, Mobius(1, 0, 0, 1))
    z = 0.4 + 0.9j
    assert mobius_apply(mobius_inverse(m), mobius_apply(m, z)) == pytest.approx(z)


def test_mobius_apply_pole_gives_point_at_infinity():
    m = Mobius(0, 1, 1, 0)
    assert mobius_apply(m, 0.0) == POINT_AT_INFINITY
    assert not cmath.isfinite(POINT_AT_INFINITY)


def test_mobius_jet_of_reciprocal():
    m = Mobius(0, 1, 1, 0)
    j = mobius_jet(m, 2.0)
    assert (j.v, j.d1, j.d2, j.d3) == (0.5, -0.25, 0.25, -0.375)


def test_mobius_jet_at_pole_raises():
    m = Mobius(0, 1, 1, 0)
    with pytest.raises(PoleOfMobius) as info:
        mobius_jet(m, 0.0)
    assert info.value.point == 0.0


def test_mobius_on_identity_jet_is_exact():
    j = ComplexJet3(0.3 + 0.1j, 1.5, -2.0, 0.25j)
    assert mobius_on_jet(Mobius(1, 0, 0, 1), j) == j


# ---------------------------------------------------------------------------
# invariance checker


def test_invariance_worked_example():
    f = parse("exp(n*z)")
    m = Mobius(3, 1, 1, -2)
    rep = check_mobius_invariance(f, 2, m, 0.3)
    assert rep.passed
    assert rep.lhs == pytest.approx(-2.0, rel=1e-12)
    assert rep.rhs == pytest.approx(-2.0, rel=1e-12)


def test_invariance_identity_map_gap_zero():
    f = parse("exp(n*z)")
    rep = check_mobius_invariance(f, 3, Mobius(1, 0, 0, 1), 0.2 + 0.1j)
    assert rep.abs_gap == 0.0
    assert rep.passed


def test_invariance_critical_point_propagates():
    f = parse("z^2")
    with pytest.raises(CriticalPointError):
        check_mobius_invariance(f, 1, Mobius(2, 1, 1, 1), 0.0)


def test_report_clause_order_and_tolerance_used():
    f = parse("exp(n*z)")
    m = Mobius(3, 1, 1, -2)
    rep = check_mobius_invariance(f, 2, m, 0.3, tol_abs=1.0, tol_rel=1e-8)
    assert rep.passed and rep.tolerance_used == 1.0
    rep = check_mobius_invariance(f, 2, m, 0.3, tol_abs=0.0, tol_rel=1e-8)
    assert rep.passed and rep.tolerance_used == 1e-8
    rep = check_mobius_invariance(f, 2, m, 0.3, tol_abs=0.0, tol_rel=0.0)
    assert not rep.passed
    assert rep.rel_gap == rep.abs_gap / max(abs(rep.lhs), abs(rep.rhs))


# ---------------------------------------------------------------------------
# composition checker


def test_composition_worked_example():
    # g o f = exp(z^2): at z=1 the jet of h=exp(z^2) is
    # h' = 2e, h'' = 6e, h''' = 20e, so S = 20e/2e - 1.5 (6e/2e)^2
    # = 10 - 13.5 = -3.5.
    f = parse("z^2")
    g = parse("exp(z)")
    rep = check_composition_law(f, g, 1, 1.0)
    assert rep.passed
    assert rep.lhs == pytest.approx(-3.5, rel=1e-12)
    assert rep.rhs == pytest.approx(-3.5, rel=1e-12)


def test_composition_with_mobius_outer_reduces_to_sf():
    # S of 1/z is zero, so both sides must equal S_f.
    f = parse("exp(z)")
    g = parse("1/z")
    rep = check_composition_law(f, g, 1, 0.7)
    assert rep.passed
    assert rep.lhs == pytest.approx(-0.5, rel=1e-10)


def test_composition_labels_inner_critical_point():
    f = parse("z^2")
    g = parse("exp(z)")
    with pytest.raises(CriticalPointError) as info:
        check_composition_law(f, g, 1, 0.0)
    assert info.value.label == "f"
    assert info.value.point == 0.0


def test_composition_labels_outer_critical_point():
    f = parse("z + 2")
    g = parse("z^2")
    with pytest.raises(CriticalPointError) as info:
        check_composition_law(f, g, 1, -2.0)
    assert info.value.label == "g"
    assert info.value.point == 0.0


# ---------------------------------------------------------------------------
# reciprocal checker


def test_reciprocal_exp():
    rep = check_reciprocal(parse("exp(z)"), 1, 0.0, 1 + 1j)
    assert rep.passed
    assert rep.lhs == pytest.approx(-0.5, rel=1e-12)
    assert rep.rhs == pytest.approx(-0.5, rel=1e-12)


def test_reciprocal_shifted_exp():
    rep = check_reciprocal(parse("exp(z) + 5"), 1, 5.0, 1 + 1j)
    assert rep.passed
    assert rep.rhs == pytest.approx(-0.5, rel=1e-12)


def test_reciprocal_guard_violation():
    with pytest.raises(GuardViolation):
        check_reciprocal(parse("exp(z)"), 1, 1.0, 0.0)
    # just outside the guard is fine
    check_reciprocal(parse("exp(z)"), 1, 1.0 + 1e-6, 0.0)


def test_reciprocal_guard_is_a_value_error():
    with pytest.raises(ValueError):
        check_reciprocal(parse("exp(z)"), 1, 1.0, 0.0)


def test_reciprocal_of_constant_hits_critical_point():
    with pytest.raises(CriticalPointError):
        check_reciprocal(parse("5"), 1, 0.0, 0.3)


# ---------------------------------------------------------------------------
# conjugation checker


def test_conjugation_scaling_pair():
    # phi(z) = nz carries exp(nz) to n exp(z); S on both sides is -n^2/2.
    f = parse("exp(n*z)")
    g = parse("n*exp(z)")
    n = 4
    rep = check_conjugation(f, g, Mobius(n, 0, 0, 1), n, 0.2)
    assert rep.passed
    assert rep.lhs == pytest.approx(-8.0, rel=1e-12)
    assert rep.rhs == pytest.approx(-8.0, rel=1e-12)


def test_conjugation_translation_pair():
    # phi(z) = z + n carries exp(z+n) to exp(z) + n... only as a
    # semiconjugacy through phi(f(z)) = f(z) + n = g(z + n).
    f = parse("exp(z + n)")
    g = parse("exp(z) + n")
    n = 3
    rep = check_conjugation(f, g, Mobius(1, n, 0, 1), n, 0.5)
    assert rep.passed
    assert rep.lhs == pytest.approx(-0.5, rel=1e-12)
    assert rep.rhs == pytest.approx(-0.5, rel=1e-12)


def test_conjugation_identity_phi_exact():
    f = parse("exp(z) + z")
    rep = check_conjugation(f, f, Mobius(1, 0, 0, 1), 1, 0.3 + 0.4j)
    assert rep.abs_gap == 0.0
    assert rep.passed


def test_conjugation_unrelated_pair_rejected():
    f = parse("exp(z)")
    g = parse("exp(n*z)")
    with pytest.raises(ConjugacyViolated) as info:
        check_conjugation(f, g, Mobius(1, 0, 0, 1), 2, 0.3)
    assert info.value.gap > info.value.tol == 1e-10


def test_conjugation_pole_of_phi():
    f = parse("z")
    with pytest.raises(PoleOfMobius):
        check_conjugation(f, f, Mobius(0, 1, 1, 0), 1, 0.0)


# ---------------------------------------------------------------------------
# property checks

_coeff = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=3.0, allow_nan=False, allow_infinity=False
)
_pt = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=2.0, allow_nan=False, allow_infinity=False
)


def _mobius_or_reject(a, b, c, d) -> Mobius:
    try:
        return Mobius(a, b, c, d)
    except DegenerateMobiusError:
        assume(False)


@given(a=_coeff, b=_coeff, c=_coeff, d=_coeff, z=_pt)
def test_property_mobius_schwarzian_vanishes(a, b, c, d, z):
    m = _mobius_or_reject(a, b, c, d)
    # |f'| = 1/|cz+d|^2 after normalization; keep it clear of the
    # critical-point floor as well as of the pole.
    assume(0.1 <= abs(m.c * z + m.d) <= 1e3)
    s = schwarzian(mobius_jet(m, z))
    assert abs(s) <= 1e-9


@given(
    seed=st.integers(0, 10**6),
    a=_coeff,
    b=_coeff,
    c=_coeff,
    d=_coeff,
    z=_pt,
)
def test_property_invariance_for_random_families(seed, a, b, c, d, z):
    rng = random.Random(seed)
    f = support.random_family(rng)
    m = _mobius_or_reject(a, b, c, d)
    try:
        jf = eval_jet(f, rng.randint(1, 8), z)
    except EvalError:
        assume(False)
    assume(abs(jf.d1) >= 1e-6)
    assume(abs(m.c * jf.v + m.d) >= 0.1)
    n = rng.randint(1, 8)
    try:
        rep = check_mobius_invariance(f, n, m, z)
    except (EvalError, CriticalPointError):
        assume(False)
    assert rep.passed


@given(seed=st.integers(0, 10**6), z=_pt)
def test_property_composition_both_orders(seed, z):
    rng = random.Random(seed)
    f = support.random_family(rng)
    g = support.random_family(rng)
    n = rng.randint(1, 6)
    for first, second in ((f, g), (g, f)):
        try:
            rep = check_composition_law(first, second, n, z)
        except (EvalError, CriticalPointError):
            continue
        assume(abs(rep.lhs) <= 1e8)
        assert rep.passed


@given(seed=st.integers(0, 10**6), z=_pt)
def test_property_conjugation_of_transported_family(seed, z):
    # Build g = phi o f o phi^{-1} symbolically, which satisfies the
    # semiconjugacy by construction.
    rng = random.Random(seed)
    f = support.random_family(rng)
    phi = support.random_mobius(rng)
    inner = support.mobius_tree(mobius_inverse(phi), Var())
    g = FamilyExpr(support.mobius_tree(phi, support.subst_var(f.root, inner)))
    n = rng.randint(1, 6)
    try:
        rep = check_conjugation(f, g, phi, n, z)
    except (EvalError, CriticalPointError, PoleOfMobius, ConjugacyViolated):
        assume(False)
    assert rep.passed
