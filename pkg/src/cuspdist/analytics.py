"""Closed-form volumes, Monte Carlo estimation of the normalized mu_1^t
integrals, the partial volume function g, and numerical estimation of the
rank-2 Hermite-type constant as the farthest-point distance from the cusps.

The Poincare volume of the quotient is the classical Siegel value
(2/pi^n) Delta^(3/2) zeta_K(2); the fundamental cell of a cusp neighborhood
B(infty, r) factorizes as (Re cell of O_K) x (unit cell in trace-zero log
coordinates) x {N(Im tau) > 1/r^2}, with Poincare measure dx dl ds/s^2, whence
vol = sqrt(Delta) * (2^(n-1)/[O^x+ : O^x2]) * R_K * r^2.  Monte Carlo draws
from exactly that product form, so samples need no Jacobian weights, and the
integrals over the quotient are taken on the sphere-of-influence cell of
infinity (a full fundamental domain when h_K = 1) by rejection from the
enclosing ball.

All Monte Carlo is driven by counter-based Philox streams keyed by
(seed, worker); for a fixed seed and worker count every estimate is
bit-reproducible regardless of how the worker blocks are scheduled, because
the blocks are reduced in worker order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iter_product
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError
from .hyperbolic import UpperHalfPoint
from .number_field import TotallyRealField, ZetaEstimate
from .search import (
    DEFAULT_BUDGET,
    closest_cusps,
    default_threshold,
    hermite_upper_bound,
    in_sphere_of_influence,
    mu1_lean,
)

__all__ = [
    "VolumeReport",
    "McEstimate",
    "HermiteEstimate",
    "DEFAULT_PRIME_BOUND",
    "DEFAULT_SAMPLES",
    "vol_ball_unit",
    "siegel_volume",
    "sample_cusp_neighborhood",
    "partial_volume_g",
    "integral_mu1_t",
    "estimate_hermite",
]

DEFAULT_PRIME_BOUND = 200_000
DEFAULT_SAMPLES = 100_000


@dataclass
class VolumeReport:
    """Closed-form volumes attached to the field.

    vol_gamma       vol(Gamma_K \\ H^n) for the Hilbert modular group.
    vol_gamma_hat   the same for the extended group; vol_gamma / index_plus_sq.
    vol_ball_unit   vol of the quotient of the radius-1 cusp neighborhood
                    B(infty, 1) by the stabilizer of infinity.
    zeta2           the zeta_K(2) Euler-product value used, with tail bound.
    """

    vol_gamma: float
    vol_gamma_hat: float
    vol_ball_unit: float
    zeta2: ZetaEstimate

    def as_dict(self) -> dict:
        return {
            "vol_gamma": self.vol_gamma,
            "vol_gamma_hat": self.vol_gamma_hat,
            "vol_ball_unit": self.vol_ball_unit,
            "zeta2": {
                "value": self.zeta2.value,
                "tail_bound": self.zeta2.tail_bound,
                "prime_bound": self.zeta2.prime_bound,
            },
        }


@dataclass
class McEstimate:
    """A Monte Carlo estimate with its standard error.

    std_error is the sample standard deviation of the mean (delta-method
    variance for ratio estimates); it is exactly 0.0 on the closed-form
    branches (partial volume with x <= 1, exponent t = 0), in which case
    `samples` records 0 draws for the closed forms and the requested count
    for the degenerate t = 0 integral.
    """

    value: float
    std_error: float
    samples: int
    seed: int
    t: float

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "t": self.t,
        }


@dataclass
class HermiteEstimate:
    """Estimated farthest-point data of the cusp at infinity.

    distance = mu_1(tau_max)^(-1/2) is the farthest distance from the cusps
    attained on the sphere-of-influence cell, c_estimate its n-th root, and
    upper_bound the proven ceiling sqrt(2) Delta^(1/(2n)) for c_estimate.
    """

    tau_max: UpperHalfPoint
    distance: float
    c_estimate: float
    upper_bound: float

    def as_dict(self) -> dict:
        return {
            "tau_max": [[str(x), str(y)] for x, y in self.tau_max.coords],
            "distance": self.distance,
            "c_estimate": self.c_estimate,
            "upper_bound": self.upper_bound,
        }


# -- closed forms ---------------------------------------------------------------


def vol_ball_unit(field: TotallyRealField) -> float:
    """vol of the stabilizer quotient of B(infty, 1):
    sqrt(Delta) * (2^(n-1) / [O^{x,+} : O^{x,2}]) * R_K."""
    n = field.degree
    return (
        math.sqrt(field.discriminant)
        * (2.0 ** (n - 1) / field.index_plus_sq)
        * float(field.regulator)
    )


def siegel_volume(
    field: TotallyRealField, prime_bound: int = DEFAULT_PRIME_BOUND
) -> VolumeReport:
    """Siegel's volume (2/pi^n) Delta^(3/2) zeta_K(2) for the Hilbert modular
    group, its extended-group counterpart, and the unit ball volume.

    zeta_K(2) comes from the Euler product over rational primes up to
    prime_bound; its truncation error (bounded by zeta2.tail_bound)
    propagates linearly into vol_gamma and vol_gamma_hat.
    """
    z = field.zeta_K_2(prime_bound)
    n = field.degree
    vg = (2.0 / math.pi**n) * field.discriminant**1.5 * z.value
    return VolumeReport(
        vol_gamma=vg,
        vol_gamma_hat=vg / field.index_plus_sq,
        vol_ball_unit=vol_ball_unit(field),
        zeta2=z,
    )


# -- sampling -------------------------------------------------------------------


def _validate_mc(count: int, seed: int, workers: int) -> None:
    if count < 0:
        raise ValidationError("sample count must be nonnegative")
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must fit in an unsigned 64-bit integer")
    if workers < 1:
        raise ValidationError("workers must be >= 1")


def _split_counts(count: int, workers: int) -> list:
    base, extra = divmod(count, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _uniform_blocks(dim: int, count: int, seed: int, workers: int) -> np.ndarray:
    """(count, dim) uniforms on [0, 1).  Worker w draws its block from the
    counter-based Philox stream keyed by (seed, w); blocks are concatenated
    in worker order, so the result depends only on (seed, workers)."""
    blocks = []
    for w, size in enumerate(_split_counts(count, workers)):
        if size == 0:
            continue
        key = np.array([seed, w], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        blocks.append(rng.random((size, dim)))
    if not blocks:
        return np.zeros((0, dim))
    return np.concatenate(blocks, axis=0)


def _cell_points(field: TotallyRealField, r: float, count: int, seed: int, workers: int):
    """Sample the fundamental cell of B(infty, r) under the Poincare measure.

    Returns (x, y, s): Re parts (count, n), Im parts (count, n), and
    s = N(Im tau) (count,).  Re = W (u - 1/2) with W the embedding matrix of
    the integral basis; the trace-zero log coordinates are uniform on the
    fundamental parallelepiped of the totally-positive-unit log lattice; and
    s = 1/(r^2 (1 - U)) realizes the density 1/s^2 on (1/r^2, infty).
    """
    n = field.degree
    dim = 2 * n
    blk = _uniform_blocks(dim, count, seed, workers)
    u = blk[:, :n]
    g = blk[:, n : 2 * n - 1]
    last = blk[:, 2 * n - 1]
    x = (u - 0.5) @ field._emb_f64.T
    r2 = r * r
    s = 1.0 / (r2 * (1.0 - last))
    logs_n = np.log(s) / n
    logy = np.empty((count, n))
    if n > 1:
        ell = (g - 0.5) @ field._unit_log_f64
        logy[:, : n - 1] = ell + logs_n[:, None]
        logy[:, n - 1] = logs_n - ell.sum(axis=1)
    else:
        logy[:, 0] = logs_n
    return x, np.exp(logy), s


def sample_cusp_neighborhood(
    field: TotallyRealField,
    r: float,
    count: int,
    seed: int = 0,
    *,
    workers: int = 1,
) -> Iterator[UpperHalfPoint]:
    """i.i.d. points of the fundamental cell of B(infty, r) (modulo the
    stabilizer of infinity) under the normalized Poincare measure.

    Re is uniform on the centered cell of the O_K lattice, the trace-zero
    log coordinates of Im are uniform on the unit cell, and s = N(Im tau)
    has density proportional to 1/s^2 on (1/r^2, infty) by inverse CDF.
    """
    if not r > 0:
        raise ValidationError("radius must be positive")
    count = int(count)
    seed = int(seed)
    workers = int(workers)
    _validate_mc(count, seed, workers)
    x, y, _s = _cell_points(field, float(r), count, seed, workers)
    for i in range(count):
        yield UpperHalfPoint(list(zip(x[i].tolist(), y[i].tolist())))


def _membership(
    field: TotallyRealField,
    r: float,
    count: int,
    seed: int,
    workers: int,
    budget: int,
):
    """(accept, s) for `count` samples of the B(infty, r) cell: accept[i] is
    the sphere-of-influence membership of sample i and s[i] its N(Im tau).
    Cached on the field so several estimators (different exponents t, the
    volume-consistency check) share one rejection sweep."""
    key = ("mc_membership", r * r, count, seed, workers)
    hit = field._search_cache.get(key)
    if hit is not None:
        return hit
    x, y, s = _cell_points(field, r, count, seed, workers)
    accept = np.empty(count, dtype=bool)
    for i in range(count):
        # Same shortcut as in_sphere_of_influence, saved here to skip the
        # point construction: past s > 1 no other cusp can reach mu = s.
        if s[i] > 1.0 + 1e-12:
            accept[i] = True
            continue
        tau = UpperHalfPoint(
            list(zip(x[i].tolist(), y[i].tolist())), precision=53
        )
        accept[i] = in_sphere_of_influence(field, tau, budget=budget)
    out = (accept, s)
    field._search_cache[key] = out
    return out


def partial_volume_g(
    field: TotallyRealField,
    x: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> McEstimate:
    """Partial volume g(x): the volume of the part of the sphere-of-influence
    cell of infinity lying within distance... i.e. inside B(infty, x).

    For x <= 1 the ball is entirely inside the sphere of influence and the
    closed form vol_ball_unit * x^2 is returned exactly (zero std_error, no
    sampling).  For x > 1 the ball cell is sampled and points outside the
    sphere of influence are rejected; the estimate is the cell volume times
    the acceptance rate, with a binomial standard error.
    """
    xx = float(x)
    if not xx > 0:
        raise ValidationError("x must be positive")
    seed = int(seed)
    if xx <= 1.0:
        return McEstimate(
            value=vol_ball_unit(field) * xx * xx,
            std_error=0.0,
            samples=0,
            seed=seed,
            t=0.0,
        )
    count = int(samples)
    workers = int(workers)
    _validate_mc(count, seed, workers)
    if count < 2:
        raise ValidationError("need at least 2 samples")
    accept, _s = _membership(field, xx, count, seed, workers, budget)
    cell = vol_ball_unit(field) * xx * xx
    a = accept.astype(np.float64)
    return McEstimate(
        value=cell * float(a.mean()),
        std_error=cell * float(a.std(ddof=1)) / math.sqrt(count),
        samples=count,
        seed=seed,
        t=0.0,
    )


def integral_mu1_t(
    field: TotallyRealField,
    t: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> McEstimate:
    """Normalized integral of mu_1^t over the quotient, 0 <= t < 1.

    The integral is taken on the sphere-of-influence cell of infinity (a full
    fundamental domain since h_K = 1), reached by rejection sampling from the
    enclosing ball B(infty, ub^n) with ub = sqrt(2) Delta^(1/(2n)).  On the
    cell mu_1 = N(Im tau) exactly, so the ratio estimator
    sum(1_S s^t) / sum(1_S) needs no further cusp searches; its standard
    error is the delta-method value std(Z - value * A) / (mean(A) sqrt(N)).
    t = 0 short-circuits to exactly 1 with zero error.
    """
    tt = float(t)
    if not 0.0 <= tt < 1.0:
        raise ValidationError("t must lie in [0, 1)")
    count = int(samples)
    seed = int(seed)
    workers = int(workers)
    _validate_mc(count, seed, workers)
    if tt == 0.0:
        return McEstimate(
            value=1.0, std_error=0.0, samples=count, seed=seed, t=0.0
        )
    if count < 2:
        raise ValidationError("need at least 2 samples")
    rball = hermite_upper_bound(field) ** field.degree
    accept, s = _membership(field, rball, count, seed, workers, budget)
    a = accept.astype(np.float64)
    asum = float(a.sum())
    if asum == 0.0:
        raise ValidationError("no samples accepted; increase the sample count")
    z = s**tt * a
    value = float(z.sum()) / asum
    resid = z - value * a
    se = float(resid.std(ddof=1)) / (float(a.mean()) * math.sqrt(count))
    return McEstimate(
        value=value, std_error=se, samples=count, seed=seed, t=tt
    )


# -- Hermite-type constant ------------------------------------------------------


def estimate_hermite(
    field: TotallyRealField,
    grid_resolution: int = 12,
    refine_iters: int = 200,
    seed: int = 0,
    *,
    budget: int = DEFAULT_BUDGET,
) -> HermiteEstimate:
    """Farthest-point distance max mu_1(tau)^(-1/2) over the fundamental cell
    of the sphere of influence of infinity.

    Coarse grid over the 2n cell coordinates (Re coefficients, unit
    coefficients, and log N(Im tau) restricted to [-log(2^n Delta), 0]),
    followed by Nelder-Mead refinement started from the five best cells and
    from the balanced point with N(Im tau) = 1, where the distance is
    exactly 1 -- so the result never falls below 1 up to roundoff.  mu_1 is
    piecewise smooth with ridges where the nearest cusp switches, hence the
    multi-start.  The procedure is deterministic; `seed` is accepted for
    interface stability but no random numbers are drawn.
    """
    n = field.degree
    res = int(grid_resolution)
    iters = int(refine_iters)
    if res < 2:
        raise ValidationError("grid_resolution must be >= 2")
    if iters < 0:
        raise ValidationError("refine_iters must be nonnegative")
    del seed  # deterministic procedure; kept for interface stability
    lb = default_threshold(field)
    th = 0.5 * lb
    dims = 2 * n
    emb = field._emb_f64
    ulog = field._unit_log_f64
    log_lb = math.log(lb)
    zeta_lo = log_lb - math.log(4.0)
    zeta_hi = math.log(4.0)

    def tau_of(p: np.ndarray, precision: Optional[int] = 53) -> UpperHalfPoint:
        u = p[:n]
        g = p[n : dims - 1]
        zeta = p[dims - 1]
        x = emb @ (u - 0.5)
        logs_n = zeta / n
        logy = np.empty(n)
        if n > 1:
            ell = ulog.T @ (g - 0.5)
            logy[: n - 1] = ell + logs_n
            logy[n - 1] = logs_n - ell.sum()
        else:
            logy[0] = logs_n
        y = np.exp(logy)
        return UpperHalfPoint(
            list(zip(x.tolist(), y.tolist())), precision=precision
        )

    def objective(p: np.ndarray) -> float:
        # Re and unit coefficients are periodic directions of mu_1; the box
        # penalty only stops the simplex from drifting without bound.
        pen = 0.0
        for v in p[: dims - 1]:
            if v < -1.0:
                pen += -1.0 - v
            elif v > 2.0:
                pen += v - 2.0
        zeta = p[dims - 1]
        if zeta < zeta_lo:
            pen += zeta_lo - zeta
        elif zeta > zeta_hi:
            pen += zeta - zeta_hi
        if pen > 0.0:
            return 1e6 * (1.0 + pen)
        return mu1_lean(field, tau_of(p), threshold=th, budget=budget)

    centers = (np.arange(res) + 0.5) / res
    zgrid = log_lb * (1.0 - centers)
    scored = []
    for combo in _iter_product(range(res), repeat=dims):
        p = np.empty(dims)
        for d in range(dims - 1):
            p[d] = centers[combo[d]]
        p[dims - 1] = zgrid[combo[dims - 1]]
        scored.append((objective(p), p))
    scored.sort(key=lambda vp: vp[0])

    balanced = np.full(dims, 0.5)
    balanced[dims - 1] = 0.0
    best_val, best_p = scored[0]
    bal_val = objective(balanced)
    if bal_val < best_val:
        best_val, best_p = bal_val, balanced
    starts = [p for _, p in scored[:5]] + [balanced]
    for p0 in starts:
        result = minimize(
            objective,
            p0,
            method="Nelder-Mead",
            options={
                "maxiter": iters,
                "xatol": 1e-7,
                "fatol": 1e-11,
                "adaptive": n > 1,
            },
        )
        if result.fun < best_val:
            best_val, best_p = float(result.fun), np.asarray(result.x)

    # Wrap the periodic coordinates back into the canonical cell: integer
    # shifts of u are lattice translations, integer shifts of g are unit
    # scalings, and both leave mu_1 and the recomputed Im part invariant.
    wrapped = best_p.copy()
    snap = 2.0**-30
    wrapped[: dims - 1] -= np.floor(wrapped[: dims - 1] + snap)
    tau_best = tau_of(wrapped, precision=field.precision)
    ranking = closest_cusps(field, tau_best, budget=budget)
    distance = float(ranking.mu1) ** -0.5
    return HermiteEstimate(
        tau_max=tau_best,
        distance=distance,
        c_estimate=distance ** (1.0 / n),
        upper_bound=hermite_upper_bound(field),
    )
