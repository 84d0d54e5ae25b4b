"""Shared fixtures and small numeric helpers for the test suite."""

import math
from itertools import product as iter_product

import numpy as np
import pytest

from cuspdist import Cusp, UpperHalfPoint, make_rationals, make_real_quadratic


@pytest.fixture(scope="session")
def Q():
    return make_rationals()


@pytest.fixture(scope="session")
def K2():
    return make_real_quadratic(2)


@pytest.fixture(scope="session")
def K5():
    return make_real_quadratic(5)


@pytest.fixture(scope="session")
def fields(Q, K2, K5):
    return {"Q": Q, "K2": K2, "K5": K5}


def random_taus(field, count, seed, y_lo=0.3, y_hi=3.0):
    """Random points whose real parts cover one coordinate cell of the ring
    lattice and whose imaginary parts are log-uniform in [y_lo, y_hi]."""
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, 1], dtype=np.uint64))
    )
    n = field.degree
    taus = []
    for _ in range(count):
        coeff = rng.uniform(-0.5, 0.5, size=n)
        x = field._emb_f64 @ coeff
        y = np.exp(rng.uniform(math.log(y_lo), math.log(y_hi), size=n))
        taus.append(UpperHalfPoint(list(zip(x.tolist(), y.tolist())), precision=53))
    return taus


def random_integral_element(field, rng, lo=-5, hi=5, nonzero=False):
    while True:
        coords = [int(rng.integers(lo, hi + 1)) for _ in range(field.degree)]
        e = field.element(*coords)
        if not (nonzero and e.is_zero()):
            return e


def coprime_pairs(field, bound):
    """Every coordinate box pair (alpha, beta) generating the unit ideal.

    Norms with coprime integer parts are coprime outright; the remaining
    pairs go through the two-generator ideal norm.
    """
    n = field.degree
    coords = list(iter_product(range(-bound, bound + 1), repeat=n))
    elems = {c: field.element(*c) for c in coords}
    norms = {c: abs(int(elems[c].norm())) for c in coords}
    zero = (0,) * n
    pairs = []
    for ca in coords:
        for cb in coords:
            if ca == zero and cb == zero:
                continue
            if math.gcd(norms[ca], norms[cb]) == 1:
                pairs.append((elems[ca], elems[cb]))
            elif field.ideal_norm(elems[ca], elems[cb]) == 1:
                pairs.append((elems[ca], elems[cb]))
    return pairs


def pair_embedding_arrays(pairs):
    A = np.array([[float(v) for v in a.embeddings()] for a, _ in pairs])
    B = np.array([[float(v) for v in b.embeddings()] for _, b in pairs])
    return A, B


def mu_table(A, B, tau):
    """Vectorized float64 evaluation of the norm-form expression
    N(Im tau) / N(|alpha - beta tau|^2) over the whole pair list."""
    x, y = tau.float_arrays()
    num = np.prod((A - B * x) ** 2 + (B * y) ** 2, axis=1)
    return float(np.prod(y)) / num


def oracle_top2(field, pairs, values):
    """Best two distinct projective points by mu value, brute force."""
    order = np.argsort(values)[::-1]
    best = Cusp(field, *pairs[order[0]])
    best_mu = float(values[order[0]])
    for idx in order[1:]:
        c = Cusp(field, *pairs[idx])
        if not c.same_point(best):
            return best, best_mu, c, float(values[idx])
    raise AssertionError("pair box does not contain two distinct cusps")
