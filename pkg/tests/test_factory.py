"""Construction of the built-in fields: invariants, units, embeddings."""

import math

import pytest

from cuspdist import (
    QuadraticFieldRequest,
    ValidationError,
    make_rationals,
    make_real_quadratic,
)

# m -> (discriminant, w*w in coords, generator of the totally positive
#       units in coords, index of squared units inside them, regulator)
QUADRATIC_TABLE = {
    2: (8, (2, 0), (3, 2), 1, math.log(1 + math.sqrt(2))),
    3: (12, (3, 0), (2, 1), 2, math.log(2 + math.sqrt(3))),
    5: (5, (1, 1), (1, 1), 1, math.log((1 + math.sqrt(5)) / 2)),
    7: (28, (7, 0), (8, 3), 2, math.log(8 + 3 * math.sqrt(7))),
    13: (13, (3, 1), (4, 3), 1, math.log((3 + math.sqrt(13)) / 2)),
}


@pytest.mark.parametrize("m", sorted(QUADRATIC_TABLE))
def test_quadratic_invariants(m):
    disc, w_sq, unit, index, regulator = QUADRATIC_TABLE[m]
    field = make_real_quadratic(m)
    assert field.degree == 2
    assert field.discriminant == disc
    w = field.element(0, 1)
    assert ((w * w) - field.element(*w_sq)).is_zero()
    assert len(field.fundamental_units) == 1
    gen = field.fundamental_units[0]
    assert (gen - field.element(*unit)).is_zero()
    assert field.field_norm(gen) == 1
    assert field.is_totally_positive(gen)
    assert field.index_plus_sq == index
    assert abs(field.regulator - regulator) < 1e-12


@pytest.mark.parametrize("m", (2, 3, 5, 13))
def test_fundamental_unit_brute_force(m):
    """Smallest unit above 1 found by scanning coordinates directly."""
    field = make_real_quadratic(m)
    best = None
    for a in range(-100, 101):
        for b in range(-100, 101):
            x = field.element(a, b)
            if x.is_zero() or abs(x.norm()) != 1:
                continue
            sigma = float(x.embeddings()[0])
            if sigma > 1 + 1e-12 and (best is None or sigma < best):
                best = sigma
    assert best is not None
    assert abs(field.regulator - math.log(best)) < 1e-9
    gen = float(field.fundamental_units[0].embeddings()[0])
    norm_minus_one_exists = abs(best**2 - math.exp(2 * field.regulator)) < 1e-6
    assert norm_minus_one_exists
    # the totally positive generator is the fundamental unit itself when it
    # is totally positive, and its square otherwise
    assert abs(gen - best) < 1e-6 or abs(gen - best**2) < 1e-6


def test_embeddings_match_surds():
    sqrt5 = math.sqrt(5)
    field = make_real_quadratic(5)
    w = field.element(0, 1)
    emb = [float(v) for v in w.embeddings()]
    assert abs(emb[0] - (1 + sqrt5) / 2) < 1e-14
    assert abs(emb[1] - (1 - sqrt5) / 2) < 1e-14

    field = make_real_quadratic(2)
    w = field.element(0, 1)
    emb = sorted(float(v) for v in w.embeddings())
    assert abs(emb[0] + math.sqrt(2)) < 1e-14
    assert abs(emb[1] - math.sqrt(2)) < 1e-14


def test_discriminant_is_squared_covolume():
    for m in (2, 3, 5, 13):
        field = make_real_quadratic(m)
        w = field.element(0, 1)
        e1, e2 = (float(v) for v in w.embeddings())
        assert abs((e1 - e2) ** 2 - field.discriminant) < 1e-9


def test_request_wrapper_and_precision():
    field = make_real_quadratic(QuadraticFieldRequest(5, precision=120))
    assert field.precision == 120
    assert field.discriminant == 5
    default = make_real_quadratic(5)
    assert default.precision >= 24


def test_rationals_factory():
    field = make_rationals()
    assert field.degree == 1
    assert field.discriminant == 1
    assert field.name == "Q"


def test_negative_and_zero_m_rejected():
    for bad in (0, -5, 1):
        with pytest.raises(ValidationError):
            make_real_quadratic(bad)
