"""Order-3 complex jet arithmetic.

A :class:`ComplexJet3` carries the value and first three derivatives of an
analytic function at one point of the complex plane.  The operations below
propagate all four components through field arithmetic and the exp/log
primitives, which is exactly enough to evaluate Schwarzian derivatives
without symbolic differentiation.

Jets never hold non-finite components: an operation that would produce
``inf`` or ``nan`` raises :class:`OverflowAtPoint` instead, and a division
whose denominator magnitude sits at or below the floor raises
:class:`DivisionByZeroAtPoint`.
"""

from __future__ import annotations

import cmath
from typing import NamedTuple

__all__ = [
    "ComplexJet3",
    "JetError",
    "DivisionByZeroAtPoint",
    "OverflowAtPoint",
    "DIVISION_FLOOR",
    "EXP_REAL_GUARD",
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
]

# |denominator| at or below this counts as a division by zero
DIVISION_FLOOR = 1e-300
# |Re u| beyond this would push exp out of the finite double range
EXP_REAL_GUARD = 700.0

_isfinite = cmath.isfinite


class JetError(ArithmeticError):
    """Base class for jet evaluation failures."""

    def __init__(self, message: str, point: complex | None = None):
        super().__init__(message)
        self.point = point


class DivisionByZeroAtPoint(JetError):
    """Denominator (or log argument) magnitude at or below the floor."""


class OverflowAtPoint(JetError):
    """A jet component left the finite double range."""


class ComplexJet3(NamedTuple):
    """Value and first three derivatives of an analytic function at a point."""

    v: complex
    d1: complex
    d2: complex
    d3: complex


def _checked(v: complex, d1: complex, d2: complex, d3: complex) -> ComplexJet3:
    if _isfinite(v) and _isfinite(d1) and _isfinite(d2) and _isfinite(d3):
        return ComplexJet3(v, d1, d2, d3)
    raise OverflowAtPoint("jet component overflowed the finite range")


def jet_var(z0: complex) -> ComplexJet3:
    """Jet of the identity map at ``z0``."""
    z0 = complex(z0)
    if not _isfinite(z0):
        raise ValueError("jet_var requires a finite point")
    return ComplexJet3(z0, 1.0 + 0.0j, 0.0j, 0.0j)


def jet_const(c: complex) -> ComplexJet3:
    """Jet of a constant function."""
    c = complex(c)
    if not _isfinite(c):
        raise ValueError("jet_const requires a finite value")
    return ComplexJet3(c, 0.0j, 0.0j, 0.0j)


def jet_add(a: ComplexJet3, b: ComplexJet3) -> ComplexJet3:
    return _checked(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3)


def jet_sub(a: ComplexJet3, b: ComplexJet3) -> ComplexJet3:
    return _checked(a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3)


def jet_neg(a: ComplexJet3) -> ComplexJet3:
    return ComplexJet3(-a.v, -a.d1, -a.d2, -a.d3)


def jet_mul(a: ComplexJet3, b: ComplexJet3) -> ComplexJet3:
    """Leibniz product rule through order three.

    Sums are associated symmetrically so that swapping the operands yields
    the identical floating-point result.
    """
    v = a.v * b.v
    d1 = a.d1 * b.v + a.v * b.d1
    d2 = (a.d2 * b.v + a.v * b.d2) + 2.0 * (a.d1 * b.d1)
    d3 = (a.d3 * b.v + a.v * b.d3) + 3.0 * (a.d2 * b.d1 + a.d1 * b.d2)
    return _checked(v, d1, d2, d3)


def _chain(u: ComplexJet3, w0: complex, w1: complex, w2: complex, w3: complex) -> ComplexJet3:
    # order-3 chain rule: w0..w3 are the outer function's value and
    # derivatives taken at u.v
    u1, u2, u3 = u.d1, u.d2, u.d3
    d1 = w1 * u1
    d2 = w2 * (u1 * u1) + w1 * u2
    d3 = w3 * (u1 * u1 * u1) + 3.0 * (w2 * (u1 * u2)) + w1 * u3
    return _checked(w0, d1, d2, d3)


def jet_div(a: ComplexJet3, b: ComplexJet3, floor: float = DIVISION_FLOOR) -> ComplexJet3:
    """Quotient a/b, computed as a times the reciprocal jet of b."""
    bv = b.v
    if abs(bv) <= floor:
        raise DivisionByZeroAtPoint("division by (near-)zero denominator", bv)
    w = 1.0 / bv
    w2 = w * w
    recip = _chain(b, w, -w2, 2.0 * (w2 * w), -6.0 * (w2 * w2))
    return jet_mul(a, recip)


def jet_exp(u: ComplexJet3, guard: float = EXP_REAL_GUARD) -> ComplexJet3:
    """Exponential of a jet; guards |Re u| to stay inside finite doubles."""
    if abs(u.v.real) > guard:
        raise OverflowAtPoint("exp argument outside the overflow guard", u.v)
    e = cmath.exp(u.v)
    return _chain(u, e, e, e, e)


def jet_log(u: ComplexJet3, floor: float = DIVISION_FLOOR) -> ComplexJet3:
    """Principal-branch logarithm of a jet."""
    uv = u.v
    if abs(uv) <= floor:
        raise DivisionByZeroAtPoint("log of (near-)zero value", uv)
    w = 1.0 / uv
    w2 = w * w
    return _chain(u, cmath.log(uv), w, -w2, 2.0 * (w2 * w))


def jet_pow_int(u: ComplexJet3, k: int) -> ComplexJet3:
    """Integer power by repeated multiplication; negative k via reciprocal."""
    if k < 0:
        return jet_div(jet_const(1.0), jet_pow_int(u, -k))
    if k == 0:
        return jet_const(1.0)
    acc = u
    for _ in range(k - 1):
        acc = jet_mul(acc, u)
    return acc
