"""Schwarzian and spherical derivative operators, with Moebius algebra.

The Schwarzian derivative of f is  S_f = f'''/f' - (3/2)(f''/f')^2,
computed here directly from an order-3 jet.  Moebius transformations
(az+b)/(cz+d) are the kernel of S: applying one after f leaves S_f
unchanged, and S of a Moebius map itself vanishes identically.  The
checkers at the bottom verify these identities numerically at a point and
return an :class:`IdentityReport` rather than a bare boolean, so callers
see the actual gap and the tolerance that judged it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .dsl import FamilyExpr, eval_jet, eval_jet_seeded
from .jets import (
    ComplexJet3,
    DivisionByZeroAtPoint,
    jet_add,
    jet_const,
    jet_div,
    jet_mul,
    jet_sub,
    jet_var,
)

__all__ = [
    "CRITICAL_POINT_FLOOR",
    "DEFAULT_TOL_ABS",
    "DEFAULT_TOL_REL",
    "RECIPROCAL_GUARD",
    "CONJUGACY_TOL",
    "POINT_AT_INFINITY",
    "CriticalPointError",
    "PoleOfMobius",
    "GuardViolation",
    "ConjugacyViolated",
    "DegenerateMobiusError",
    "Mobius",
    "IdentityReport",
    "spherical_derivative",
    "schwarzian",
    "mobius_apply",
    "mobius_compose",
    "mobius_inverse",
    "mobius_jet",
    "mobius_on_jet",
    "check_mobius_invariance",
    "check_composition_law",
    "check_reciprocal",
    "check_conjugation",
]

# |f'| at or below this floor makes the Schwarzian undefined at the point
CRITICAL_POINT_FLOOR = 1e-12
DEFAULT_TOL_ABS = 1e-10
DEFAULT_TOL_REL = 1e-8
# reciprocal check refuses points where f(z) sits this close to the
# omitted value
RECIPROCAL_GUARD = 1e-9
# pointwise tolerance for phi(f(z)) = g(phi(z)) in the conjugation check
CONJUGACY_TOL = 1e-10

# marker returned by mobius_apply at the pole
POINT_AT_INFINITY = complex(math.inf, math.inf)


class CriticalPointError(ArithmeticError):
    """Schwarzian requested where |f'| is at or below the floor."""

    def __init__(self, message: str, point: complex | None = None, label: str = ""):
        super().__init__(message)
        self.point = point
        self.label = label


class PoleOfMobius(ArithmeticError):
    """Jet of a Moebius map requested at its pole z = -d/c."""

    def __init__(self, point: complex):
        super().__init__(f"Moebius map has a pole at z = {point}")
        self.point = point


class GuardViolation(ValueError):
    """A checker's distance guard failed at the chosen point."""


class ConjugacyViolated(ValueError):
    """phi(f(z)) and g(phi(z)) disagree beyond the pointwise tolerance."""

    def __init__(self, gap: float, tol: float):
        super().__init__(
            f"conjugacy gap {gap:.3e} exceeds the pointwise tolerance {tol:.3e}"
        )
        self.gap = gap
        self.tol = tol


class DegenerateMobiusError(ValueError):
    """Coefficients with ad - bc (numerically) zero."""


def spherical_derivative(j: ComplexJet3) -> float:
    """Marty's statistic |f'| / (1 + |f|^2) from a jet."""
    m = abs(j.v)
    return abs(j.d1) / (1.0 + m * m)


def schwarzian(j: ComplexJet3, floor: float = CRITICAL_POINT_FLOOR) -> complex:
    """Schwarzian derivative from an order-3 jet."""
    if abs(j.d1) <= floor:
        raise CriticalPointError(
            f"Schwarzian undefined: |f'| = {abs(j.d1):.3e} at or below floor {floor:.3e}"
        )
    r = j.d2 / j.d1
    return j.d3 / j.d1 - 1.5 * (r * r)


@dataclass(frozen=True)
class Mobius:
    """Moebius transformation (az+b)/(cz+d), stored with ad - bc = 1.

    Construction normalizes the determinant to one and fixes the overall
    sign so the first nonzero coefficient has argument in [0, pi); the two
    matrix representatives +/-(a,b,c,d) therefore collapse to a single
    canonical one, which keeps composition results comparable.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (
            complex(self.a),
            complex(self.b),
            complex(self.c),
            complex(self.d),
        )
        det = a * d - b * c
        # ad - bc cancels catastrophically when |ad| + |bc| dwarfs it.
        scale = abs(a * d) + abs(b * c)
        if abs(det) <= 1e-12 * max(1.0, scale):
            raise DegenerateMobiusError(
                f"degenerate coefficients: ad - bc = {det!r}"
            )
        s = cmath.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        for entry in (a, b, c, d):
            if entry != 0:
                phase = cmath.phase(entry)
                if phase < 0.0 or phase == math.pi:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)


def mobius_apply(m: Mobius, z: complex) -> complex:
    """Apply the map to a point of the extended plane.

    Returns :data:`POINT_AT_INFINITY` when cz + d = 0.
    """
    w = m.c * z + m.d
    if w == 0:
        return POINT_AT_INFINITY
    return (m.a * z + m.b) / w


def mobius_compose(m1: Mobius, m2: Mobius) -> Mobius:
    """Composition m1 after m2 (matrix product of the representatives)."""
    return Mobius(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def mobius_inverse(m: Mobius) -> Mobius:
    return Mobius(m.d, -m.b, -m.c, m.a)


def mobius_on_jet(m: Mobius, j: ComplexJet3) -> ComplexJet3:
    """Jet of the Moebius map applied after the function the jet describes."""
    num = jet_add(jet_mul(jet_const(m.a), j), jet_const(m.b))
    den = jet_add(jet_mul(jet_const(m.c), j), jet_const(m.d))
    return jet_div(num, den)


def mobius_jet(m: Mobius, z: complex) -> ComplexJet3:
    """Order-3 jet of the map itself at z; raises PoleOfMobius at -d/c."""
    try:
        return mobius_on_jet(m, jet_var(z))
    except DivisionByZeroAtPoint as exc:
        raise PoleOfMobius(complex(z)) from exc


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of a pointwise identity check.

    ``passed`` is true when abs_gap <= tol_abs or rel_gap <= tol_rel;
    ``tolerance_used`` records the tolerance of the clause that decided.
    """

    lhs: complex
    rhs: complex
    abs_gap: float
    rel_gap: float
    passed: bool
    tolerance_used: float


def _report(
    lhs: complex, rhs: complex, tol_abs: float, tol_rel: float
) -> IdentityReport:
    abs_gap = abs(lhs - rhs)
    denom = max(abs(lhs), abs(rhs))
    rel_gap = abs_gap / denom if denom > 0.0 else 0.0
    if abs_gap <= tol_abs:
        return IdentityReport(lhs, rhs, abs_gap, rel_gap, True, tol_abs)
    return IdentityReport(lhs, rhs, abs_gap, rel_gap, rel_gap <= tol_rel, tol_rel)


def check_mobius_invariance(
    f: FamilyExpr,
    n: float,
    m: Mobius,
    z: complex,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rel: float = DEFAULT_TOL_REL,
) -> IdentityReport:
    """Compare S of (m after f) against S of f at z."""
    jf = eval_jet(f, n, z)
    rhs = schwarzian(jf)
    lhs = schwarzian(mobius_on_jet(m, jf))
    return _report(lhs, rhs, tol_abs, tol_rel)


def check_composition_law(
    f: FamilyExpr,
    g: FamilyExpr,
    n: float,
    z: complex,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rel: float = DEFAULT_TOL_REL,
) -> IdentityReport:
    """Check S_{g o f}(z) = S_g(f(z)) f'(z)^2 + S_f(z).

    The left side evaluates g's tree with its variable seeded by the jet of
    f, so the composed jet comes from the chain rule and not from any reuse
    of the right side.
    """
    jf = eval_jet(f, n, z)
    try:
        s_f = schwarzian(jf)
    except CriticalPointError as exc:
        raise CriticalPointError(str(exc), complex(z), label="f") from exc
    jg_at_fz = eval_jet(g, n, jf.v)
    try:
        s_g = schwarzian(jg_at_fz)
    except CriticalPointError as exc:
        raise CriticalPointError(str(exc), jf.v, label="g") from exc
    composed = eval_jet_seeded(g, n, jf, point=complex(z))
    lhs = schwarzian(composed)
    rhs = s_g * (jf.d1 * jf.d1) + s_f
    return _report(lhs, rhs, tol_abs, tol_rel)


def check_reciprocal(
    f: FamilyExpr,
    n: float,
    omitted: complex,
    z: complex,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rel: float = DEFAULT_TOL_REL,
    guard: float = RECIPROCAL_GUARD,
) -> IdentityReport:
    """Compare S of 1/(f - w) against S of f at z, w the omitted value.

    For w = 0 this is the reciprocal identity S_{1/f} = S_f; a general
    omitted value is first shifted away, which changes no Schwarzian.
    """
    jf = eval_jet(f, n, z)
    if abs(jf.v - omitted) <= guard:
        raise GuardViolation(
            f"f(z) = {jf.v} is within {guard:.1e} of the omitted value {omitted}"
        )
    shifted = jet_sub(jf, jet_const(omitted))
    lhs = schwarzian(jet_div(jet_const(1.0), shifted))
    rhs = schwarzian(jf)
    return _report(lhs, rhs, tol_abs, tol_rel)


def check_conjugation(
    f: FamilyExpr,
    g: FamilyExpr,
    phi: Mobius,
    n: float,
    z: complex,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rel: float = DEFAULT_TOL_REL,
    conj_tol: float = CONJUGACY_TOL,
) -> IdentityReport:
    """Check S_g(phi(z)) phi'(z)^2 = S_f(z) for phi-conjugate families.

    First verifies the semiconjugacy phi(f(z)) = g(phi(z)) pointwise to
    ``conj_tol`` and raises :class:`ConjugacyViolated` when it fails, since
    the identity is meaningless for unrelated families.
    """
    jf = eval_jet(f, n, z)
    phi_of_fz = mobius_apply(phi, jf.v)
    phi_of_z = mobius_apply(phi, complex(z))
    if not (cmath.isfinite(phi_of_fz) and cmath.isfinite(phi_of_z)):
        raise PoleOfMobius(complex(z))
    jg = eval_jet(g, n, phi_of_z)
    gap = abs(phi_of_fz - jg.v)
    if gap > conj_tol:
        raise ConjugacyViolated(gap, conj_tol)
    jphi = mobius_jet(phi, z)
    lhs = schwarzian(jg) * (jphi.d1 * jphi.d1)
    rhs = schwarzian(jf)
    return _report(lhs, rhs, tol_abs, tol_rel)
