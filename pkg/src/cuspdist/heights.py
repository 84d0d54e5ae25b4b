"""The rigid adelic space attached to a point of H^n, heights of points and
of the space, Roy-Thunder minima, and the bridge identities to the cusp
distance function mu.

The space E_tau carries one archimedean matrix T(tau_j) per real embedding;
finite-place matrices are the identity and never materialized: the whole
finite part of a point's height enters through the ideal norm of the
coordinate gcd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Optional, Tuple

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .cusps import Cusp, iota, mu
from .errors import ValidationError
from .hyperbolic import UpperHalfPoint, t_of_tau
from .number_field import FieldElement, TotallyRealField
from .search import closest_cusps

__all__ = [
    "RigidAdelicSpace",
    "ProjectivePointHeight",
    "height_of_space",
    "height_of_point",
    "height_mu_bridge_check",
    "roy_thunder_minima",
    "roy_thunder_minima_raw",
]


class RigidAdelicSpace:
    """Rank-2 adelic space twisted at the archimedean places by the matrices
    T(tau_j); its height is 1 because each T(tau_j) is unimodular."""

    __slots__ = ("field", "tau", "matrices", "precision")

    def __init__(self, field: TotallyRealField, tau: UpperHalfPoint):
        if tau.n != field.degree:
            raise ValidationError("point degree does not match the field")
        self.field = field
        self.tau = tau
        self.precision = max(tau.precision, field.precision)
        with gmpy2.context(precision=self.precision):
            self.matrices = tuple(t_of_tau(pair) for pair in tau.coords)
        for m in self.matrices:
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
            if abs(float(det) - 1.0) > 1e-12:
                raise ValidationError(
                    f"archimedean matrix determinant {float(det)} is not 1"
                )

    def __repr__(self):
        return f"RigidAdelicSpace(tau={self.tau!r})"


@dataclass
class ProjectivePointHeight:
    alpha: FieldElement
    beta: FieldElement
    height: float


def height_of_space(space: RigidAdelicSpace) -> float:
    """prod_j |det T(tau_j)|^{1/n}; the finite part is 1.  Always 1 up to
    rounding."""
    n = space.field.degree
    with gmpy2.context(precision=space.precision):
        acc = mpfr(1)
        for m in space.matrices:
            acc *= abs(m[0][0] * m[1][1] - m[0][1] * m[1][0])
        return float(acc ** (mpfr(1) / n))


def height_of_point(
    space: RigidAdelicSpace, alpha: FieldElement, beta: FieldElement
) -> float:
    """H(alpha, beta) = |N(d)|^{-1/n} prod_j ||T(tau_j) (sigma_j alpha,
    sigma_j beta)||^{1/n}, with d the gcd of the pair (the aggregated
    finite-place contribution) and ||.|| the Euclidean norm."""
    field = space.field
    if alpha.is_zero() and beta.is_zero():
        raise ValidationError("the zero point has no height")
    if not (alpha.is_integral() and beta.is_integral()):
        raise ValidationError("height_of_point expects integral coordinates")
    content = field.ideal_norm(alpha, beta)
    n = field.degree
    ae = alpha.embeddings_mpfr()
    be = beta.embeddings_mpfr()
    with gmpy2.context(precision=space.precision):
        acc = mpfr(1)
        for m, aj, bj in zip(space.matrices, ae, be):
            v0 = m[0][0] * aj + m[0][1] * bj
            v1 = m[1][0] * aj + m[1][1] * bj
            acc *= gmpy2.sqrt(v0 * v0 + v1 * v1)
        h = acc ** (mpfr(1) / n) / mpfr(content) ** (mpfr(1) / n)
        return float(h)


def height_mu_bridge_check(
    space: RigidAdelicSpace, c: Cusp, rtol: float = 1e-9
) -> bool:
    """Verify H(iota(c)) = mu(tau, c)^{-1/2n} to relative tolerance."""
    ic = iota(c)
    h = height_of_point(space, ic.alpha, ic.beta)
    n = space.field.degree
    with gmpy2.context(precision=space.precision):
        target = float(mu(space.tau, c) ** (mpfr(-1) / (2 * n)))
    return abs(h - target) <= rtol * target


def roy_thunder_minima(space: RigidAdelicSpace, **search_kwargs) -> Tuple[float, float]:
    """(Lambda_1, Lambda_2) = (mu_1^{-1/2n}, mu_2^{-1/2n}) through the cusp
    search."""
    ranking = closest_cusps(space.field, space.tau, **search_kwargs)
    e = -1.0 / (2 * space.field.degree)
    return (ranking.mu1**e, ranking.mu2**e)


def _vector_norms(space: RigidAdelicSpace, acoords, bcoords):
    """Archimedean height factors prod_j ||T_j (alpha_j, beta_j)||^{1/n} for
    integer coordinate arrays, vectorized in float64."""
    field = space.field
    n = field.degree
    w_emb = field._emb_f64
    x, y = space.tau.float_arrays()
    ae = acoords @ w_emb.T
    be = bcoords @ w_emb.T
    sq = y * ae**2 + (x * ae + be) ** 2 / y
    return np.prod(sq, axis=1) ** (0.5 / n)


def roy_thunder_minima_raw(
    space: RigidAdelicSpace, bound: int = 15
) -> Tuple[ProjectivePointHeight, ProjectivePointHeight]:
    """The minima straight from the definition: over all nonzero integral
    pairs with coordinates in [-bound, bound], the smallest height, and the
    smallest height of a point independent of the first minimizer.

    Exact-content evaluation is pruned: |N(d)| divides both coordinate
    norms, so arch / min(|N(alpha)|, |N(beta)|)^{1/n} lower-bounds the
    height.  Every pair whose lower bound is at most the height ceiling
    max(H(1,0), H(0,1)) >= Lambda_2 is evaluated exactly, which certifies
    both minima within the box.
    """
    field = space.field
    n = field.degree
    rng = range(-bound, bound + 1)
    coords = np.array(
        [c for c in iproduct(*[rng] * n) if any(c)], dtype=np.int64
    )
    m = len(coords)
    norm_of = field._int_norm_fn()
    norms = np.array(
        [abs(norm_of([int(v) for v in row])) for row in coords],
        dtype=np.float64,
    )
    one = field.one()
    zero = field.zero()
    ceiling = max(
        height_of_point(space, one, zero), height_of_point(space, zero, one)
    ) * (1.0 + 1e-12)

    zeros = np.zeros((1, n), dtype=np.int64)
    a_idx, b_idx = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    a_idx, b_idx = a_idx.ravel(), b_idx.ravel()
    lb_pairs = _vector_norms(space, coords[a_idx], coords[b_idx]) / np.minimum(
        norms[a_idx], norms[b_idx]
    ) ** (1.0 / n)
    keep = lb_pairs <= ceiling
    cand_pairs = [
        (coords[a_idx[i]], coords[b_idx[i]]) for i in np.nonzero(keep)[0]
    ]
    lb_a0 = _vector_norms(space, zeros.repeat(m, axis=0), coords) / norms ** (
        1.0 / n
    )
    lb_b0 = _vector_norms(space, coords, zeros.repeat(m, axis=0)) / norms ** (
        1.0 / n
    )
    cand_pairs += [(zeros[0], coords[i]) for i in np.nonzero(lb_a0 <= ceiling)[0]]
    cand_pairs += [(coords[i], zeros[0]) for i in np.nonzero(lb_b0 <= ceiling)[0]]

    exact = []
    for ac, bc in cand_pairs:
        a_el = FieldElement(field, [int(v) for v in ac])
        b_el = FieldElement(field, [int(v) for v in bc])
        h = height_of_point(space, a_el, b_el)
        exact.append((h, tuple(int(v) for v in ac), tuple(int(v) for v in bc), a_el, b_el))
    exact.sort(key=lambda t: (t[0], t[1], t[2]))

    h0, _, _, a0, b0 = exact[0]
    best = ProjectivePointHeight(a0, b0, h0)
    for h, _, _, a_el, b_el in exact[1:]:
        if not (a0 * b_el - b0 * a_el).is_zero():
            return best, ProjectivePointHeight(a_el, b_el, h)
    raise ValidationError("coordinate box too small to span the plane")
