"""Exact computation of mu_1(tau), mu_2(tau) and the maximizing cusps by
bounded enumeration, membership in the sphere of influence of infinity, and
reduction to the cusp-normalized fundamental domain.

The enumeration is complete above a threshold: every cusp c with
mu(tau, c) >= threshold appears, because its coprime representative
[alpha : beta] obeys |N(beta)| <= (threshold N(Im tau))^{-1/2} and
per-embedding boxes |sigma_j(alpha) - sigma_j(beta) x_j| <= radius_j derived
from the product constraint.  Candidates are scored vectorized by the
uncorrected ratio mu~ = N(Im tau)/|N(-beta tau + alpha)|^2, which equals the
true mu exactly on pairs that are coprime up to a unit and is strictly
smaller otherwise, so per-cusp maxima are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .cusps import Cusp, mu_of_pair
from .errors import BudgetExceeded, ValidationError, ViolationFound
from .hyperbolic import GroupElement, UpperHalfPoint, act
from .number_field import FieldElement, TotallyRealField, _CELL_SNAP

__all__ = [
    "CuspRanking",
    "MinkowskiReport",
    "default_threshold",
    "hermite_upper_bound",
    "closest_cusps",
    "mu1_lean",
    "in_sphere_of_influence",
    "reduce_to_fundamental_domain",
    "verify_minkowski",
]

DEFAULT_BUDGET = 10_000_000
DEFAULT_TIE_RTOL = 1e-9
# Box inflation making the enumeration complete for mu >= th*(1 - 1e-9)
# despite float64 bound arithmetic; acceptance below is gated at
# th*(1 + 1e-9), safely inside.
_BOX_SLACK = 1e-9


def default_threshold(field: TotallyRealField) -> float:
    """The guaranteed-attainable enumeration level 1/(2^n Delta_K): mu_1
    never falls below it, so searching down to it always finds the best
    cusp."""
    return 1.0 / (2**field.degree * field.discriminant)


def hermite_upper_bound(field: TotallyRealField) -> float:
    """sqrt(2) * Delta_K^(1/2n), an upper bound for the rank-2 Hermite-type
    constant of the field."""
    return math.sqrt(2.0) * field.discriminant ** (1.0 / (2 * field.degree))


@dataclass
class CuspRanking:
    best_cusp: Cusp
    mu1: float
    second_cusp: Cusp
    mu2: float
    tie_flag: bool
    enumeration_stats: dict = dc_field(default_factory=dict)


@dataclass
class MinkowskiReport:
    mu1: float
    mu2: float
    product: float
    lower_bound: float
    upper_bound: float
    hermite_upper: float
    passed: bool


# -- beta enumeration (cached per field) ------------------------------------------


def _beta_candidates(field: TotallyRealField, nmax: float, budget: int):
    """Nonzero beta in O_K with |N(beta)| <= nmax, exactly one representative
    per orbit under {+-1} x (totally positive units), chosen in the unit cell
    with sigma_1 > 0.  Returns (coords int array (m, n), embeddings float
    array (m, n), norms int array (m,)), sorted by (|norm|, coords).  Cached
    on the field and grown monotonically."""
    n = field.degree
    nmax_int = max(1, int(math.floor(nmax + 1e-12)))
    cached = field._search_cache.get("betas")
    if cached is None or cached[0] < nmax_int:
        target = nmax_int if cached is None else max(nmax_int, 2 * cached[0])
        entries = _enumerate_betas(field, target, budget)
        field._search_cache["betas"] = (target, entries)
        cached = field._search_cache["betas"]
    coords, embs, norms = cached[1]
    keep = norms <= nmax_int
    return coords[keep], embs[keep], norms[keep]


def _enumerate_betas(field: TotallyRealField, nmax_int: int, budget: int):
    n = field.degree
    if nmax_int > budget:
        raise BudgetExceeded(
            f"denominator norm bound {nmax_int} exceeds budget {budget}; "
            "reduce tau to the fundamental domain first"
        )
    if n == 1:
        ks = np.arange(1, nmax_int + 1, dtype=np.int64)
        coords = ks.reshape(-1, 1)
        embs = coords.astype(np.float64)
        return coords, embs, ks.copy()
    w_emb = field._emb_f64
    winv_abs = np.abs(field._emb_f64_inv)
    bound = np.exp(field._unit_cell_hi) * nmax_int ** (1.0 / n)
    half = winv_abs @ bound
    widths = [2 * int(math.floor(h + 1e-9)) + 1 for h in half]
    grid_size = 1
    for w in widths:
        grid_size *= w
    if grid_size > budget:
        raise BudgetExceeded(
            f"denominator grid of {grid_size} points exceeds budget "
            f"{budget}; reduce tau to the fundamental domain first"
        )
    ranges = [
        np.arange(-int(math.floor(h + 1e-9)), int(math.floor(h + 1e-9)) + 1)
        for h in half
    ]
    grids = np.meshgrid(*ranges, indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    coords = coords[np.any(coords != 0, axis=1)]
    embs = coords @ w_emb.T
    # Sign representative: sigma_1 > 0.
    flip = embs[:, 0] < 0
    coords[flip] *= -1
    embs[flip] *= -1
    # Unit-cell membership of the mean-adjusted log vector.
    logs = np.log(np.abs(embs))
    v = logs[:, : n - 1] - logs.sum(axis=1, keepdims=True) / n
    c = np.linalg.solve(field._unit_log_f64.T, v.T).T
    in_cell = np.all(np.floor(c + _CELL_SNAP) == 0, axis=1)
    coords = coords[in_cell]
    embs = embs[in_cell]
    # Exact norm filter and deduplication.
    norm_of = field._int_norm_fn()
    rows = []
    seen = set()
    for row, emb in zip(coords, embs):
        key = tuple(int(v) for v in row)
        if key in seen:
            continue
        seen.add(key)
        nrm = abs(norm_of(list(key)))
        if 1 <= nrm <= nmax_int:
            rows.append((nrm, key, emb))
    rows.sort(key=lambda t: (t[0], t[1]))
    if not rows:
        return (
            np.zeros((0, n), dtype=np.int64),
            np.zeros((0, n)),
            np.zeros(0, dtype=np.int64),
        )
    coords = np.array([r[1] for r in rows], dtype=np.int64)
    embs = np.array([r[2] for r in rows])
    norms = np.array([int(r[0]) for r in rows], dtype=np.int64)
    return coords, embs, norms


# -- candidate scoring ------------------------------------------------------------


def _score_pass(field, tau, threshold, budget):
    """One enumeration pass at a given threshold.  Returns (mus, alphas,
    betas, pairs_scored) with the cusp at infinity injected as the pair
    (1, 0); raises BudgetExceeded when the candidate count passes the cap."""
    n = field.degree
    x, y = tau.float_arrays()
    s = float(tau.norm_imag())
    w_emb = field._emb_f64
    winv = field._emb_f64_inv
    winv_abs = np.abs(winv)
    cap = s / threshold  # |N(-beta tau + alpha)|^2 <= cap
    nmax = cap**0.5 / s  # |N(beta)| bound
    bcoords, bembs, _ = _beta_candidates(field, nmax, budget)

    mus_parts = [np.array([s])]
    a_parts = [np.concatenate([[1], np.zeros(n - 1)]).reshape(1, n).astype(np.int64)]
    b_parts = [np.zeros((1, n), dtype=np.int64)]
    total = 1
    by2 = None
    for bc, be in zip(bcoords, bembs):
        prod_all = float(np.prod(be * be * y * y))
        radii_sq = cap / (prod_all / (be * be * y * y)) - be * be * y * y
        if np.any(radii_sq <= 0):
            continue
        radii = np.sqrt(radii_sq) * (1.0 + _BOX_SLACK)
        centers = be * x
        t = winv @ centers
        h = winv_abs @ radii
        los = np.ceil(t - h - 1e-9).astype(np.int64)
        his = np.floor(t + h + 1e-9).astype(np.int64)
        count = int(np.prod((his - los + 1).clip(min=0)))
        if count <= 0:
            continue
        total += count
        if total > budget:
            raise BudgetExceeded(
                f"candidate count {total} exceeds budget {budget}; "
                "reduce tau to the fundamental domain first"
            )
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(los, his)]
        grids = np.meshgrid(*axes, indexing="ij")
        acoords = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
        aembs = acoords @ w_emb.T
        dre = aembs - be * x
        den = (dre * dre + (be * y) ** 2).prod(axis=1)
        mus_parts.append(s / den)
        a_parts.append(acoords)
        b_parts.append(np.broadcast_to(bc, acoords.shape).copy())
    mus = np.concatenate(mus_parts)
    alphas = np.concatenate(a_parts)
    betas = np.concatenate(b_parts)
    return mus, alphas, betas, total, len(bcoords)


def _element(field, row) -> FieldElement:
    return FieldElement(field, [int(v) for v in row])


def _cusp_sort_key(c: Cusp):
    """Deterministic order on canonical cusps: infinity first, then
    lexicographic in (beta coords, alpha coords)."""
    if c.is_infinity:
        return (0,)
    return (1, tuple(c.beta.coords), tuple(c.alpha.coords))


def _sorted_order(mus, alphas, betas):
    """Descending mu~, ties broken lexicographically in the raw integer
    pair, so the scan order is reproducible."""
    keys = []
    n = alphas.shape[1]
    for j in range(n - 1, -1, -1):
        keys.append(alphas[:, j])
    for j in range(n - 1, -1, -1):
        keys.append(betas[:, j])
    keys.append(-mus)
    return np.lexsort(tuple(keys))


def closest_cusps(
    field: TotallyRealField,
    tau: UpperHalfPoint,
    threshold: Optional[float] = None,
    *,
    tie_rtol: float = DEFAULT_TIE_RTOL,
    budget: int = DEFAULT_BUDGET,
) -> CuspRanking:
    """The two largest values of mu(tau, .) over all cusps, with the
    maximizing cusps.  No false negatives at or above the threshold; the
    threshold is lowered geometrically until the second cusp is certified.
    On exact ties the canonically smallest cusp is reported and tie_flag is
    set."""
    if tau.n != field.degree:
        raise ValidationError("point degree does not match the field")
    th0 = default_threshold(field)
    if threshold is None:
        threshold = th0
    elif threshold > th0 * (1 + 1e-12):
        raise ValidationError(
            f"threshold {threshold} above the guaranteed level {th0}"
        )
    elif not threshold > 0:
        raise ValidationError("threshold must be positive")

    th = threshold
    passes = 0
    spent = 0
    while True:
        passes += 1
        mus, alphas, betas, scored, nbetas = _score_pass(
            field, tau, th, budget - spent
        )
        spent += scored
        order = _sorted_order(mus, alphas, betas)
        mus = mus[order]
        alphas = alphas[order]
        betas = betas[order]
        mu1_f = float(mus[0])

        # Projective classes among the top tie window.
        tie_cut = mu1_f * (1.0 - tie_rtol)
        tie_count = int(np.searchsorted(-mus, -tie_cut, side="right"))
        classes = []  # (alpha_el, beta_el, first_index)
        for i in range(tie_count):
            a_el = _element(field, alphas[i])
            b_el = _element(field, betas[i])
            if any(
                (a_el * b0 - b_el * a0).is_zero() for a0, b0, _ in classes
            ):
                continue
            classes.append((a_el, b_el, i))

        stats = {
            "betas": nbetas,
            "pairs_scored": spent,
            "passes": passes,
            "final_threshold": th,
        }

        if len(classes) >= 2:
            ranked = sorted(
                ((Cusp(field, a, b), i) for a, b, i in classes),
                key=lambda t: _cusp_sort_key(t[0]),
            )
            best_cusp, i1 = ranked[0]
            second_cusp, i2 = ranked[1]
            mu1 = float(mu_of_pair(tau, _element(field, alphas[i1]), _element(field, betas[i1])))
            mu2 = float(mu_of_pair(tau, _element(field, alphas[i2]), _element(field, betas[i2])))
            return CuspRanking(best_cusp, mu1, second_cusp, mu2, True, stats)

        # Unique best class; scan below the tie window for the first pair
        # that is a different projective point.
        a0, b0, i0 = classes[0]
        j = tie_count
        while j < len(mus):
            a_el = _element(field, alphas[j])
            b_el = _element(field, betas[j])
            if not (a_el * b0 - b_el * a0).is_zero():
                break
            j += 1
        if j < len(mus) and float(mus[j]) >= th * (1.0 + 1e-9):
            best_cusp = Cusp(field, a0, b0)
            second_cusp = Cusp(field, _element(field, alphas[j]), _element(field, betas[j]))
            mu1 = float(mu_of_pair(tau, a0, b0))
            mu2 = float(mu_of_pair(tau, _element(field, alphas[j]), _element(field, betas[j])))
            tie = abs(mu1 - mu2) <= tie_rtol * mu1
            return CuspRanking(best_cusp, mu1, second_cusp, mu2, tie, stats)

        th /= 16.0


def mu1_lean(
    field: TotallyRealField,
    tau: UpperHalfPoint,
    threshold: Optional[float] = None,
    *,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """mu_1(tau) alone, skipping cusp identification and the second value;
    single enumeration pass at the guaranteed threshold."""
    if tau.n != field.degree:
        raise ValidationError("point degree does not match the field")
    th = default_threshold(field) if threshold is None else threshold
    mus, _, _, _, _ = _score_pass(field, tau, th, budget)
    return float(mus.max())


def in_sphere_of_influence(
    field: TotallyRealField,
    tau: UpperHalfPoint,
    *,
    tie_rtol: float = DEFAULT_TIE_RTOL,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """True iff the cusp at infinity attains mu_1(tau) (within the tie
    tolerance).  When N(Im tau) > 1 no other cusp can exceed 1, so the
    answer is immediate."""
    s = float(tau.norm_imag())
    if s > 1.0 + 1e-12:
        return True
    m1 = mu1_lean(field, tau, budget=budget)
    return s >= m1 * (1.0 - tie_rtol)


def reduce_to_fundamental_domain(
    field: TotallyRealField,
    tau: UpperHalfPoint,
    *,
    budget: int = DEFAULT_BUDGET,
):
    """(tau', gamma) with tau' = act(gamma, tau) such that infinity attains
    mu_1 at tau', Im tau' has unit-cell log vector, and Re tau' lies in the
    centered fundamental cell of O_K.  gamma is assembled exactly as
    translation * unit-scaling * (the matrix sending the best cusp to
    infinity)."""
    ranking = closest_cusps(field, tau, budget=budget)
    c = ranking.best_cusp
    g = field.gcd(c.alpha, c.beta)
    gamma0 = GroupElement(field, g.u, g.w, -c.beta, c.alpha)
    tau1 = act(gamma0, tau)

    gamma_u = GroupElement.identity(field)
    if field.degree > 1:
        _, y1 = tau1.float_arrays()
        ks = field.reduce_log_vector(np.log(y1))
        if ks.any():
            eta = field.one()
            for u, k in zip(field.fundamental_units, ks):
                if k:
                    eta = eta * u ** (-int(k))
            gamma_u = GroupElement.scaling(field, eta)
            tau1 = act(gamma_u, tau1)

    x1, _ = tau1.float_arrays()
    t = field._emb_f64_inv @ x1
    nu = -np.floor(t + 0.5 + _CELL_SNAP).astype(np.int64)
    gamma_t = GroupElement.translation(field, _element(field, nu))

    gamma = gamma_t * (gamma_u * gamma0)
    return act(gamma, tau), gamma


def verify_minkowski(
    field: TotallyRealField,
    tau: UpperHalfPoint,
    hermite_upper: Optional[float] = None,
    *,
    upper_tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
) -> MinkowskiReport:
    """Check the two-sided bound hermite_upper^{-4n} <= mu_1 mu_2 <= 1 at
    tau and return the numbers; raises ViolationFound (with the report
    attached) if either side fails.  Both comparisons carry relative slack
    1e-9 because both ends are attained exactly at special points."""
    if hermite_upper is None:
        hermite_upper = hermite_upper_bound(field)
    if not hermite_upper > 0:
        raise ValidationError("hermite_upper must be positive")
    ranking = closest_cusps(field, tau, budget=budget)
    product = ranking.mu1 * ranking.mu2
    lower = hermite_upper ** (-4.0 * field.degree)
    upper = 1.0 + upper_tol
    passed = product >= lower * (1.0 - 1e-9) and product <= upper
    report = MinkowskiReport(
        mu1=ranking.mu1,
        mu2=ranking.mu2,
        product=product,
        lower_bound=lower,
        upper_bound=upper,
        hermite_upper=hermite_upper,
        passed=passed,
    )
    if not passed:
        raise ViolationFound(
            f"mu1*mu2 = {product} outside [{lower}, {upper}]", report
        )
    return report
