"""Cusps of the Hilbert modular group as canonical projective pairs, the
distance function mu, balls around cusps, and the involution iota.

A cusp [alpha : beta] over P^1(K) is stored as a coprime integral pair in a
canonical form (gcd divided out, unit-reduced, sign-normalized), so the ideal
generated by the pair is all of O_K and mu needs no ideal-norm correction.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import ValidationError
from .hyperbolic import GroupElement, UpperHalfPoint, act
from .number_field import FieldElement, TotallyRealField

__all__ = [
    "Cusp",
    "mu",
    "mu_of_pair",
    "cusp_distance",
    "in_ball",
    "iota",
    "cusp_action",
    "mu_invariance_check",
]


def _coerce(field: TotallyRealField, v) -> FieldElement:
    if isinstance(v, FieldElement):
        if v.field is not field:
            raise ValidationError("element belongs to a different field")
        return v
    return field.element_from_rational(v)


def _clear_denominators(alpha: FieldElement, beta: FieldElement):
    """Scale a rational pair to an integral one (projectively harmless)."""
    lcm = 1
    for e in (alpha, beta):
        for c in e.coords:
            lcm = gmpy2.lcm(lcm, c.denominator)
    if lcm != 1:
        alpha = alpha * int(lcm)
        beta = beta * int(lcm)
    return alpha, beta


class Cusp:
    """Canonical representative of [alpha : beta] in P^1(K).

    beta = 0 is stored exactly as [1 : 0] (the cusp at infinity) and
    alpha = 0 as [0 : 1]; otherwise the pair is divided by its gcd and the
    remaining unit ambiguity is fixed by unit-reducing the beta entry,
    sign-normalizing, and taking the lexicographically smallest coordinate
    tuple over the unit cosets.
    """

    __slots__ = ("field", "alpha", "beta")

    def __init__(self, field: TotallyRealField, alpha, beta):
        self.field = field
        alpha = _coerce(field, alpha)
        beta = _coerce(field, beta)
        if alpha.is_zero() and beta.is_zero():
            raise ValidationError("[0 : 0] is not a projective point")
        alpha, beta = _clear_denominators(alpha, beta)
        if beta.is_zero():
            self.alpha, self.beta = field.one(), field.zero()
            return
        if alpha.is_zero():
            self.alpha, self.beta = field.zero(), field.one()
            return
        g = field.gcd(alpha, beta)
        a1 = alpha / g.d
        b1 = beta / g.d
        best = None
        for rep in field.unit_coset_reps:
            _, eta = field.unit_reduce(b1 * rep)
            mul = rep * eta
            _, flip = field._sign_normalize(b1 * mul)
            mul = mul * flip
            cand = (a1 * mul, b1 * mul)
            key = (tuple(cand[1].coords), tuple(cand[0].coords))
            if best is None or key < best[0]:
                best = (key, cand)
        self.alpha, self.beta = best[1]

    @classmethod
    def infinity(cls, field: TotallyRealField) -> "Cusp":
        return cls(field, field.one(), field.zero())

    @property
    def is_infinity(self) -> bool:
        return self.beta.is_zero()

    def __eq__(self, other):
        if not isinstance(other, Cusp) or other.field is not self.field:
            return NotImplemented
        # Canonical forms are unique, so coordinate equality decides.
        return (
            tuple(self.alpha.coords) == tuple(other.alpha.coords)
            and tuple(self.beta.coords) == tuple(other.beta.coords)
        )

    def __hash__(self):
        return hash((tuple(self.alpha.coords), tuple(self.beta.coords)))

    def same_point(self, other: "Cusp") -> bool:
        """Projective equality via the exact cross product
        alpha*beta' - beta*alpha' = 0 (independent of canonicalization)."""
        return (self.alpha * other.beta - self.beta * other.alpha).is_zero()

    def __repr__(self):
        f = self.field.format_element
        return f"Cusp[{f(self.alpha)} : {f(self.beta)}]"


def mu_of_pair(tau: UpperHalfPoint, alpha: FieldElement, beta: FieldElement):
    """N(Im tau) / |N(-beta tau + alpha)|^2 for an arbitrary pair, without
    canonicalization.  For a non-coprime pair with gcd d this equals
    mu(tau, [alpha:beta]) / N(d)^2, a lower bound on the true value."""
    field = alpha.field
    if tau.n != field.degree:
        raise ValidationError("point degree does not match the field")
    prec = max(tau.precision, field.precision)
    ae = alpha.embeddings_mpfr()
    be = beta.embeddings_mpfr()
    with gmpy2.context(precision=prec):
        num = mpfr(1)
        den = mpfr(1)
        for (xj, yj), aj, bj in zip(tau.coords, ae, be):
            num *= yj
            re = aj - bj * xj
            im = bj * yj
            den *= re * re + im * im
        return num / den


def mu(tau: UpperHalfPoint, c: Cusp):
    """The inverse-square distance to the cusp: mu(tau, [1:0]) = N(Im tau),
    and in general N(Im tau)/|N(-beta tau + alpha)|^2 over the canonical
    coprime pair."""
    return mu_of_pair(tau, c.alpha, c.beta)


def cusp_distance(tau: UpperHalfPoint, c: Cusp) -> float:
    """mu(tau, c)^{-1/2}."""
    return float(mu(tau, c)) ** -0.5


def in_ball(tau: UpperHalfPoint, c: Cusp, r) -> bool:
    """True iff the distance mu(tau,c)^{-1/2} is strictly below r."""
    if not r > 0:
        raise ValidationError("ball radius must be positive")
    with gmpy2.context(precision=max(tau.precision, c.field.precision)):
        return bool(mu(tau, c) ** mpfr(-0.5) < mpfr(r))


def iota(c: Cusp) -> Cusp:
    """The involution [x : y] -> [y : -x], canonicalized."""
    return Cusp(c.field, c.beta, -c.alpha)


def cusp_action(gamma: GroupElement, c: Cusp) -> Cusp:
    """Projective action [alpha : beta] -> [a alpha + b beta : c alpha + d beta]."""
    if gamma.field is not c.field:
        raise ValidationError("group element and cusp fields differ")
    return Cusp(
        c.field,
        gamma.a * c.alpha + gamma.b * c.beta,
        gamma.c * c.alpha + gamma.d * c.beta,
    )


def mu_invariance_check(
    gamma: GroupElement,
    tau: UpperHalfPoint,
    c: Cusp,
    rtol: float = 1e-9,
) -> bool:
    """Verify mu(gamma tau, gamma c) = mu(tau, c) to relative tolerance."""
    m1 = mu(tau, c)
    m2 = mu(act(gamma, tau), cusp_action(gamma, c))
    return bool(abs(m1 - m2) <= mpfr(rtol) * abs(m1))
