"""Constructors for the rational field and real quadratic fields of class
number one.

The quadratic constructor computes the fundamental unit exactly by the
continued-fraction expansion of -conj(omega) and derives the regulator, the
totally positive unit generator, and the square-class index from the unit's
norm and signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import NotClassNumberOne, NotSquarefree, PrecisionExhausted, ValidationError
from .number_field import TotallyRealField, _default_precision

# Squarefree m <= 100 whose real quadratic field has class number one
# (classical data).
CLASS_NUMBER_ONE_M = frozenset(
    {
        2, 3, 5, 6, 7, 11, 13, 14, 17, 19, 21, 22, 23, 29, 31, 33, 37, 38,
        41, 43, 46, 47, 53, 57, 59, 61, 62, 67, 69, 71, 73, 77, 83, 86, 89,
        93, 94, 97,
    }
)

_CF_ITERATION_CAP = 200

# index_plus_sq = [O^{x,+} : O^{x,2}] as a function of (norm of the
# fundamental unit, is it totally positive after sigma_1-normalization).
# With sigma_1(eps) > 1, norm +1 forces sigma_2(eps) > 0, so the mixed-sign
# norm +1 row cannot occur; kept for completeness of the case analysis.
INDEX_TABLE = {
    (-1, False): 1,  # O^{x,+} = O^{x,2} = <eps^2>
    (1, True): 2,  # O^{x,+} = <eps> strictly contains <eps^2>
    (1, False): 1,  # unreachable after normalization
}


@dataclass(frozen=True)
class QuadraticFieldRequest:
    """Request for K = Q(sqrt(m)): m squarefree, in the class-number-one
    whitelist; precision in mantissa bits."""

    m: int
    precision: Optional[int] = None


def make_rationals(precision: Optional[int] = None) -> TotallyRealField:
    """The degree-1 field Q with the degenerate conventions R = 1,
    index_plus_sq = 1, empty unit list."""
    return TotallyRealField(
        degree=1,
        mult_table=[[[1]]],
        embeddings=[[1]],
        discriminant=1,
        fundamental_units=[],
        regulator=1,
        index_plus_sq=1,
        labels=("1",),
        precision=precision,
        name="Q",
    )


def _is_squarefree(m: int) -> bool:
    if m % 4 == 0:
        return False
    d = 3
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        d += 2
    return True


def _fundamental_unit_cf(m: int):
    """Fundamental unit a + b*omega via the continued fraction of
    theta = -conj(omega), using exact quadratic-surd arithmetic.

    Returns (a, b, norm).  Every unit u > 1 satisfies |conj(u)| = 1/u < 1, so
    its coefficient pair is a convergent of theta; the first convergent of
    unit norm +-1 is therefore the fundamental unit.
    """
    if m % 4 == 1:
        # omega = (1+sqrt(m))/2, theta = (-1+sqrt(m))/2
        p0, q0 = -1, 2
    else:
        # omega = sqrt(m), theta = sqrt(m)
        p0, q0 = 0, 1
    d = m
    sqrt_floor = math.isqrt(d)
    # Norm form: omega^2 = qq + pp*omega.
    if m % 4 == 1:
        qq, pp = (m - 1) // 4, 1
    else:
        qq, pp = m, 0

    pk, qk = p0, q0
    h_prev, h_curr = 0, 1  # convergent numerators p_{-2}, p_{-1}
    k_prev, k_curr = 1, 0  # convergent denominators q_{-2}, q_{-1}
    for _ in range(_CF_ITERATION_CAP):
        if qk == 0:
            raise PrecisionExhausted("degenerate continued fraction state")
        a = (pk + sqrt_floor) // qk
        h_prev, h_curr = h_curr, a * h_curr + h_prev
        k_prev, k_curr = k_curr, a * k_curr + k_prev
        # Candidate unit p + q*omega.
        p, q = h_curr, k_curr
        norm = p * p + pp * p * q - qq * q * q
        if norm in (1, -1) and q != 0:
            return p, q, norm
        pk = a * qk - pk
        qk = (d - pk * pk) // qk
        if qk <= 0:
            raise PrecisionExhausted("continued fraction lost positivity")
    raise PrecisionExhausted(
        f"no unit found within {_CF_ITERATION_CAP} continued-fraction steps"
    )


def make_real_quadratic(req, precision: Optional[int] = None) -> TotallyRealField:
    """Construct K = Q(sqrt(m)) for whitelisted squarefree m.

    Integral basis {1, omega} with omega = sqrt(m) (discriminant 4m) or
    (1+sqrt(m))/2 when m = 1 mod 4 (discriminant m).
    """
    if isinstance(req, QuadraticFieldRequest):
        m = req.m
        precision = req.precision if req.precision else precision
    else:
        m = int(req)
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    if not _is_squarefree(m):
        raise NotSquarefree(f"m = {m} is not squarefree")
    if m not in CLASS_NUMBER_ONE_M:
        raise NotClassNumberOne(
            f"m = {m} is not in the class-number-one whitelist (m <= 100)"
        )
    prec = precision if precision else _default_precision()

    if m % 4 == 1:
        disc = m
        mt_omega_sq = [mpq(m - 1, 4), mpq(1)]
        poly = (-(m - 1) // 4, -1, 1)  # x^2 - x - (m-1)/4
    else:
        disc = 4 * m
        mt_omega_sq = [mpq(m), mpq(0)]
        poly = (-m, 0, 1)  # x^2 - m
    mult_table = [
        [[1, 0], [0, 1]],
        [[0, 1], mt_omega_sq],
    ]

    with gmpy2.context(precision=prec + 16):
        root = gmpy2.sqrt(mpfr(m))
        if m % 4 == 1:
            w1 = (1 + root) / 2
            w2 = (1 - root) / 2
        else:
            w1 = root
            w2 = -root
        embeddings = [[mpfr(1), w1], [mpfr(1), w2]]

        a, b, unit_norm = _fundamental_unit_cf(m)
        sigma1 = a + b * w1
        if sigma1 < 0:
            a, b, sigma1 = -a, -b, -sigma1
        if sigma1 < 1:
            # Replace eps by 1/eps = +-conj(eps) to normalize sigma_1 > 1.
            raise ValidationError(
                f"continued fraction produced unit with sigma_1 = {sigma1} < 1"
            )
        regulator = gmpy2.log(sigma1)

    totally_positive = unit_norm == 1  # sigma_1 > 1 and product > 0
    index_plus_sq = INDEX_TABLE[(unit_norm, totally_positive)]

    if unit_norm == -1:
        # Generator of O^{x,+} is eps^2 = (a+b*omega)^2.
        aa = mpq(a) * a + mpq(b) * b * mt_omega_sq[0]
        bb = 2 * mpq(a) * b + mpq(b) * b * mt_omega_sq[1]
        units = [[aa, bb]]
    else:
        units = [[a, b]]

    field = TotallyRealField(
        degree=2,
        mult_table=mult_table,
        embeddings=embeddings,
        discriminant=disc,
        fundamental_units=units,
        regulator=regulator,
        index_plus_sq=index_plus_sq,
        labels=("1", "w"),
        primitive_poly=poly,
        precision=prec,
        name=f"Q(sqrt{m})",
    )
    if unit_norm == -1:
        # eps itself is a mixed-sign unit: it represents the nontrivial coset
        # of the unit group modulo +-(totally positive units).
        field.unit_coset_reps = (field.one(), field.element(a, b))
    return field
