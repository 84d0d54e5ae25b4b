"""Exact arithmetic in a totally real number field K of degree n with class
number one, plus the classical invariants: discriminant, regulator, unit-group
indices, and the value zeta_K(2).

Elements are exact rational coordinate vectors over a fixed integral basis
whose first element must be 1.  Real embeddings are carried as configurable-
precision floats (default 80 mantissa bits).  Finite places are never
materialized individually: every finite-place product enters through |N(.)|
aggregates, so no prime-ideal machinery exists here.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .errors import (
    GeneratorNotFound,
    PrecisionExhausted,
    UnsupportedField,
    ValidationError,
)

DEFAULT_PRECISION = 80

# Relative tolerances for load-time validation.
_DISC_RTOL = 1e-10
_REG_RTOL = 1e-10
_EMB_RTOL = 1e-9

# Offset added before floor() when snapping a point to a unit-cell index.
# Inputs that sit exactly on a cell wall (e.g. pure unit powers) would
# otherwise floor unstably between adjacent integers under rounding noise;
# the offset is far above arithmetic error yet negligible against the cell.
_CELL_SNAP = 2.0**-30


def _default_precision() -> int:
    env = os.environ.get("HC_PRECISION_BITS")
    if env is None:
        return DEFAULT_PRECISION
    bits = int(env)
    if bits < 24:
        raise ValidationError(f"HC_PRECISION_BITS too small: {bits}")
    return bits


def _as_mpq(value) -> mpq:
    if isinstance(value, float):
        # Exact binary floats silently encode rounding; demand exact input.
        if value != int(value):
            raise ValidationError(
                f"exact rational expected, got non-integral float {value!r}"
            )
        return mpq(int(value))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def _rat_to_obj(q: mpq):
    """JSON-friendly form: int when integral, 'p/q' string otherwise."""
    if q.denominator == 1:
        return int(q.numerator)
    return str(q)


class FieldElement:
    """Element of K as exact rational coordinates over the integral basis."""

    __slots__ = ("field", "coords")

    def __init__(self, field: "TotallyRealField", coords: Iterable):
        self.field = field
        c = tuple(_as_mpq(v) for v in coords)
        if len(c) != field.degree:
            raise ValidationError(
                f"expected {field.degree} coordinates, got {len(c)}"
            )
        self.coords = c

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldElement):
            if isinstance(other, (int, mpz)):
                other = self.field.element_from_rational(other)
            else:
                return NotImplemented
        if self.field is not other.field:
            return False
        return self.coords == other.coords

    def __hash__(self) -> int:
        return hash((id(self.field), self.coords))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValidationError("elements of different fields")
            return other
        return self.field.element_from_rational(other)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(
            self.field, tuple(a + b for a, b in zip(self.coords, o.coords))
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement(
            self.field, tuple(a - b for a, b in zip(self.coords, o.coords))
        )

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, mpz, mpq, Fraction)):
            q = _as_mpq(other)
            return FieldElement(self.field, tuple(q * a for a in self.coords))
        o = self._coerce(other)
        mt = self.field._mt
        n = self.field.degree
        out = [mpq(0)] * n
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            for j, b in enumerate(o.coords):
                if b == 0:
                    continue
                ab = a * b
                row = mt[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += ab * row[k]
        return FieldElement(self.field, out)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        f = self.field
        n = f.degree
        # Solve (mult-by-self matrix) z = coords of 1 exactly.
        cols = [(self * f.basis_element(j)).coords for j in range(n)]
        mat = [[cols[j][i] for j in range(n)] for i in range(n)]
        rhs = [mpq(1) if i == 0 else mpq(0) for i in range(n)]
        z = _solve_mpq(mat, rhs)
        return FieldElement(f, z)

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, mpz)):
            raise TypeError("integer exponent expected")
        e = int(exponent)
        base = self
        if e < 0:
            base = self.inverse()
            e = -e
        result = self.field.one()
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- invariants of the element ------------------------------------------

    def norm(self) -> mpq:
        return self.field.field_norm(self)

    def trace(self) -> mpq:
        f = self.field
        return sum(
            ((self * f.basis_element(j)).coords[j] for j in range(f.degree)),
            mpq(0),
        )

    def embeddings(self) -> np.ndarray:
        """Real embeddings as a float64 vector (sigma_1(x), ..., sigma_n(x))."""
        return self.field._emb_f64 @ np.array(
            [float(c) for c in self.coords], dtype=np.float64
        )

    def embeddings_mpfr(self) -> list:
        """Real embeddings at the field's working precision."""
        f = self.field
        with gmpy2.context(precision=f.precision):
            out = []
            for i in range(f.degree):
                acc = mpfr(0)
                for j, c in enumerate(self.coords):
                    if c:
                        acc += f._emb_mpfr[i][j] * mpfr(c)
                out.append(acc)
        return out

    def __repr__(self) -> str:
        return f"FieldElement({self.field.format_element(self)})"


def _solve_mpq(mat, rhs):
    """Exact Gaussian elimination over the rationals; mat is modified-copied."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _det_mpq(mat) -> mpq:
    """Exact determinant by fraction Gaussian elimination."""
    n = len(mat)
    a = [row[:] for row in mat]
    det = mpq(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return mpq(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] * inv
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return det


def _solve_mpfr(mat, rhs):
    """Gaussian elimination with partial pivoting in the current mpfr context."""
    n = len(rhs)
    a = [[mpfr(v) for v in row] + [mpfr(rhs[i])] for i, row in enumerate(mat)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _det_mpfr(mat):
    n = len(mat)
    a = [[mpfr(v) for v in row] for row in mat]
    det = mpfr(1)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return mpfr(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] * inv
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return det


def hnf_with_transform(rows: Sequence[Sequence[int]]):
    """Row Hermite normal form with transform.

    Returns (H, U, rank) with U unimodular (m x m), U*A having `rank` nonzero
    echelon rows H (pivots positive, entries above pivots reduced into
    [0, pivot)) followed by zero rows.
    """
    m = len(rows)
    n = len(rows[0])
    a = [[int(v) for v in row] for row in rows]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, m) if a[r][col] != 0), None)
        if piv is None:
            continue
        for r in range(piv + 1, m):
            if a[r][col] == 0:
                continue
            g, s, t = gmpy2.gcdext(a[piv][col], a[r][col])
            g, s, t = int(g), int(s), int(t)
            bf = a[r][col] // g
            af = a[piv][col] // g
            for mat, width in ((a, n), (u, m)):
                rp, rr = mat[piv], mat[r]
                for c in range(width):
                    x, y = rp[c], rr[c]
                    rp[c] = s * x + t * y
                    rr[c] = af * y - bf * x
        if piv != row:
            a[piv], a[row] = a[row], a[piv]
            u[piv], u[row] = u[row], u[piv]
        if a[row][col] < 0:
            a[row] = [-v for v in a[row]]
            u[row] = [-v for v in u[row]]
        p = a[row][col]
        for r in range(row):
            q = a[r][col] // p
            if q:
                a[r] = [v - q * w for v, w in zip(a[r], a[row])]
                u[r] = [v - q * w for v, w in zip(u[r], u[row])]
        row += 1
    return [a[i] for i in range(row)], u, row


class GcdResult(NamedTuple):
    """Canonical generator of the ideal (alpha, beta) with Bezout witnesses:
    alpha*u + beta*w = d exactly."""

    d: FieldElement
    u: FieldElement
    w: FieldElement


class ZetaEstimate(NamedTuple):
    """Euler-product value for zeta_K(2) with a rigorous (crude) tail bound."""

    value: float
    tail_bound: float
    prime_bound: int


class TotallyRealField:
    """A totally real field of degree n with h_K = 1.

    Carries the integral basis (first element 1) through its multiplication
    table, the real embeddings at working precision, the generators of the
    totally positive unit group modulo torsion, and the classical invariants.
    All structural invariants are validated at construction time.
    """

    def __init__(
        self,
        degree: int,
        mult_table,
        embeddings,
        discriminant: int,
        fundamental_units,
        regulator,
        index_plus_sq: int,
        labels: Optional[Sequence[str]] = None,
        primitive_poly: Optional[Sequence[int]] = None,
        precision: Optional[int] = None,
        class_number_assertion: int = 1,
        name: Optional[str] = None,
    ):
        self.degree = int(degree)
        self.precision = int(precision) if precision else _default_precision()
        n = self.degree
        if n < 1:
            raise ValidationError("degree must be >= 1")
        if class_number_assertion != 1:
            raise ValidationError("class number must be asserted equal to 1")
        self.class_number_assertion = 1
        self.name = name or f"degree-{n} field"

        self._mt = tuple(
            tuple(tuple(_as_mpq(v) for v in cell) for cell in row)
            for row in mult_table
        )
        if len(self._mt) != n or any(
            len(row) != n or any(len(cell) != n for cell in row)
            for row in self._mt
        ):
            raise ValidationError("mult_table must be n x n x n")

        with gmpy2.context(precision=self.precision):
            self._emb_mpfr = [
                [self._parse_real(v) for v in row] for row in embeddings
            ]
        if len(self._emb_mpfr) != n or any(len(r) != n for r in self._emb_mpfr):
            raise ValidationError("embeddings must be n x n")
        self._emb_f64 = np.array(
            [[float(v) for v in row] for row in self._emb_mpfr],
            dtype=np.float64,
        )
        self._emb_f64_inv = np.linalg.inv(self._emb_f64)

        self.discriminant = int(discriminant)
        if self.discriminant <= 0:
            raise ValidationError("discriminant must be positive")
        self.index_plus_sq = int(index_plus_sq)
        with gmpy2.context(precision=self.precision):
            self.regulator = mpfr(self._parse_real(regulator))

        if labels is None:
            if n == 1:
                labels = ("1",)
            elif n == 2:
                labels = ("1", "w")
            else:
                labels = ("1",) + tuple(f"w{i}" for i in range(1, n))
        self.labels = tuple(labels)
        if len(self.labels) != n:
            raise ValidationError("labels length must equal degree")

        self.fundamental_units = tuple(
            u if isinstance(u, FieldElement) else FieldElement(self, u)
            for u in fundamental_units
        )
        self.primitive_poly = (
            tuple(int(c) for c in primitive_poly) if primitive_poly else None
        )

        self._unit_log_full, self._unit_log_sq, self._unit_log_f64 = (
            self._build_unit_logs()
        )
        self._unit_cell_lo, self._unit_cell_hi = self._unit_cell_ranges()
        # Coset representatives of the full unit group modulo +-(totally
        # positive units); populated by factories that know the fundamental
        # unit of O^x, default just 1 (correct whenever index_plus_sq = 2^(n-1)).
        self.unit_coset_reps = (self.one(),)
        self._search_cache: dict = {}

        self._validate()

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _parse_real(v):
        if isinstance(v, mpfr):
            return +v
        if isinstance(v, (int, mpz)):
            return mpfr(v)
        if isinstance(v, float):
            return mpfr(v)
        if isinstance(v, str):
            return mpfr(v)
        if isinstance(v, (mpq, Fraction)):
            return mpfr(_as_mpq(v))
        raise ValidationError(f"cannot parse real value {v!r}")

    def _build_unit_logs(self):
        n = self.degree
        if n == 1:
            return [], [], np.zeros((0, 0))
        with gmpy2.context(precision=self.precision):
            full = []
            for u in self.fundamental_units:
                embs = u.embeddings_mpfr()
                full.append([gmpy2.log(abs(e)) for e in embs])
            sq = [row[: n - 1] for row in full]
        f64 = np.array([[float(v) for v in row] for row in sq], dtype=np.float64)
        return full, sq, f64

    def _unit_cell_ranges(self):
        """Componentwise range of {sum_k t_k * log|sigma_j(u_k)| : t in [0,1)^r}
        over all n embeddings; bounds the log distortion of unit-reduced
        elements around |N|^(1/n)."""
        n = self.degree
        lo = np.zeros(n)
        hi = np.zeros(n)
        for row in self._unit_log_full:
            for j in range(n):
                v = float(row[j])
                if v < 0:
                    lo[j] += v
                else:
                    hi[j] += v
        return lo, hi

    # -- basic constructors ----------------------------------------------------

    def element(self, *coords) -> FieldElement:
        return FieldElement(self, coords)

    def element_from_coords(self, coords) -> FieldElement:
        return FieldElement(self, coords)

    def element_from_rational(self, q) -> FieldElement:
        coords = [_as_mpq(q)] + [mpq(0)] * (self.degree - 1)
        return FieldElement(self, coords)

    def basis_element(self, k: int) -> FieldElement:
        coords = [mpq(0)] * self.degree
        coords[k] = mpq(1)
        return FieldElement(self, coords)

    def one(self) -> FieldElement:
        return self.element_from_rational(1)

    def zero(self) -> FieldElement:
        return self.element_from_rational(0)

    # -- validation -------------------------------------------------------------

    def _validate(self):
        n = self.degree
        for j in range(n):
            ej = tuple(mpq(1) if k == j else mpq(0) for k in range(n))
            if self._mt[0][j] != ej or self._mt[j][0] != ej:
                raise ValidationError(
                    "first basis element must act as the identity"
                )
        for i in range(n):
            for j in range(i):
                if self._mt[i][j] != self._mt[j][i]:
                    raise ValidationError("mult_table must be commutative")
        if n <= 4:
            basis = [self.basis_element(k) for k in range(n)]
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        left = (basis[i] * basis[j]) * basis[k]
                        right = basis[i] * (basis[j] * basis[k])
                        if left.coords != right.coords:
                            raise ValidationError(
                                "mult_table is not associative"
                            )

        with gmpy2.context(precision=self.precision):
            det = _det_mpfr(self._emb_mpfr)
            disc = det * det
            if abs(disc - self.discriminant) > _DISC_RTOL * self.discriminant:
                raise ValidationError(
                    f"det(embeddings)^2 = {disc} does not match "
                    f"discriminant {self.discriminant}"
                )
            # Embeddings must represent the same algebra the mult table does.
            for i in range(n):
                row = self._emb_mpfr[i]
                scale = max(abs(v) for v in row) ** 2 + mpfr(1)
                for j in range(n):
                    for k in range(j, n):
                        target = sum(
                            (
                                mpfr(c) * row[l]
                                for l, c in enumerate(self._mt[j][k])
                                if c
                            ),
                            mpfr(0),
                        )
                        if abs(row[j] * row[k] - target) > _EMB_RTOL * scale:
                            raise ValidationError(
                                "embeddings inconsistent with mult_table at "
                                f"(sigma_{i + 1}, e_{j}, e_{k})"
                            )

        if n == 1:
            if self.fundamental_units:
                raise ValidationError("degree 1 admits no fundamental units")
            if self.index_plus_sq != 1:
                raise ValidationError("degree 1 requires index_plus_sq = 1")
            if abs(float(self.regulator) - 1.0) > 1e-15:
                raise ValidationError("degree 1 requires regulator 1")
            return

        if len(self.fundamental_units) != n - 1:
            raise ValidationError(
                f"expected {n - 1} fundamental units, got "
                f"{len(self.fundamental_units)}"
            )
        if 2**n % self.index_plus_sq != 0:
            raise ValidationError("index_plus_sq must divide 2^n")
        if float(self.regulator) <= 0:
            raise ValidationError("regulator must be positive")
        for u in self.fundamental_units:
            if not u.is_integral():
                raise ValidationError("fundamental units must be integral")
            if abs(self.field_norm(u)) != 1:
                raise ValidationError("fundamental units must have |norm| 1")
            if not self.is_totally_positive(u):
                raise ValidationError(
                    "fundamental units must be totally positive"
                )
        with gmpy2.context(precision=self.precision):
            covol = abs(_det_mpfr(self._unit_log_sq))
            expected = mpfr(2) ** (n - 1) / self.index_plus_sq * self.regulator
            if abs(covol - expected) > _REG_RTOL * expected:
                raise ValidationError(
                    f"unit log-lattice covolume {covol} does not match "
                    f"(2^(n-1)/index)*regulator = {expected}"
                )

    # -- spec operations ---------------------------------------------------------

    def field_norm(self, x: FieldElement) -> mpq:
        """Product of all real embeddings, computed exactly as the determinant
        of the multiplication-by-x matrix over the integral basis."""
        n = self.degree
        c = x.coords
        if n == 1:
            return c[0]
        if n == 2:
            # omega^2 = q + p*omega  =>  N(a + b*omega) = a^2 + p*a*b - q*b^2
            q, p = self._mt[1][1][0], self._mt[1][1][1]
            a, b = c
            return a * a + p * a * b - q * b * b
        cols = [(x * self.basis_element(j)).coords for j in range(n)]
        mat = [[cols[j][i] for j in range(n)] for i in range(n)]
        return _det_mpq(mat)

    def product_formula_check(self, x: FieldElement) -> bool:
        """Check prod_i |sigma_i(x)| * (1/|N(x)|) = 1 to relative 1e-10.

        The factor 1/|N(x)| aggregates the finite places of an integral x.
        """
        if x.is_zero():
            raise ValidationError("product formula needs a nonzero element")
        if not x.is_integral():
            raise ValidationError("product formula check expects integral x")
        norm = abs(self.field_norm(x))
        with gmpy2.context(precision=self.precision):
            prod = mpfr(1)
            for sigma in x.embeddings_mpfr():
                prod *= abs(sigma)
            ratio = prod / mpfr(norm)
            return abs(ratio - 1) <= mpfr("1e-10")

    def is_totally_positive(self, x: FieldElement) -> bool:
        """True iff every real embedding of x is strictly positive.

        Exact for degree <= 2 (norm/trace signs); for higher degree decided
        at working precision with an explicit margin.
        """
        n = self.degree
        if x.is_zero():
            return False
        if n == 1:
            return x.coords[0] > 0
        if n == 2:
            return self.field_norm(x) > 0 and x.trace() > 0
        with gmpy2.context(precision=self.precision):
            embs = x.embeddings_mpfr()
            scale = max(mpfr(1), max(abs(e) for e in embs))
            margin = scale * mpfr(2) ** (-(self.precision // 2))
            if any(abs(e) < margin for e in embs):
                raise PrecisionExhausted(
                    "embedding too close to zero to decide total positivity"
                )
            return all(e > 0 for e in embs)

    # -- unit reduction ------------------------------------------------------------

    def reduce_log_vector(self, logv: np.ndarray) -> np.ndarray:
        """Integer exponents k such that subtracting sum_k k_r*log|sigma(u_r)|
        lands the mean-adjusted log vector in the unit cell; float64 path."""
        n = self.degree
        if n == 1:
            return np.zeros(0, dtype=np.int64)
        v = logv[: n - 1] - float(np.sum(logv)) / n
        c = np.linalg.solve(self._unit_log_f64.T, v)
        return np.floor(c + _CELL_SNAP).astype(np.int64)

    def unit_reduce(self, x: FieldElement):
        """Return (eta*x, eta) with eta a totally positive unit chosen so the
        mean-adjusted log-embedding vector of eta*x lies in the fundamental
        cell of the unit log-lattice; deterministic."""
        if x.is_zero():
            raise ValidationError("cannot unit-reduce zero")
        n = self.degree
        if n == 1:
            return x, self.one()
        with gmpy2.context(precision=self.precision):
            w = [gmpy2.log(abs(s)) for s in x.embeddings_mpfr()]
            mean = sum(w, mpfr(0)) / n
            v = [w[j] - mean for j in range(n - 1)]
            mat = [
                [self._unit_log_sq[k][j] for k in range(n - 1)]
                for j in range(n - 1)
            ]
            c = _solve_mpfr(mat, v)
            snap = mpfr(_CELL_SNAP)
            ks = [int(gmpy2.floor(ci + snap)) for ci in c]
        eta = self.one()
        for u, k in zip(self.fundamental_units, ks):
            if k:
                eta = eta * u ** (-k)
        return eta * x, eta

    # -- gcd ---------------------------------------------------------------------

    def ideal_norm(self, alpha: FieldElement, beta: FieldElement) -> int:
        """Norm of the ideal alpha*O_K + beta*O_K, via the HNF determinant of
        the coordinate module; both elements integral, not both zero."""
        rows = self._module_rows(alpha, beta)
        h, _, rank = hnf_with_transform(rows)
        if rank != self.degree:
            raise ValidationError("coordinate module does not have full rank")
        prod = 1
        for i in range(self.degree):
            prod *= h[i][i]
        return prod

    def _module_rows(self, alpha: FieldElement, beta: FieldElement):
        if not (alpha.is_integral() and beta.is_integral()):
            raise ValidationError("gcd requires integral elements")
        if alpha.is_zero() and beta.is_zero():
            raise ValidationError("gcd(0, 0) is undefined")
        n = self.degree
        rows = []
        for gen in (alpha, beta):
            for k in range(n):
                prod = gen * self.basis_element(k)
                rows.append([int(c) for c in prod.coords])
        return rows

    def gcd(self, alpha: FieldElement, beta: FieldElement, slack: float = 2.0) -> GcdResult:
        """Canonical generator d of alpha*O_K + beta*O_K with Bezout witnesses.

        Strategy: HNF of the 2n x n coordinate module gives an ideal basis and
        the ideal norm; a generator is an ideal element whose own norm matches
        it, searched in an embedding box sized by the unit-cell distortion
        (scaled by `slack`).  Witnesses come from the HNF transform.  The
        result is canonicalized over all units, with sigma_1(d) > 0.
        """
        n = self.degree
        if alpha.is_zero():
            d, factor = self._canonicalize_generator(beta)
            return GcdResult(d, self.zero(), factor)
        if beta.is_zero():
            d, factor = self._canonicalize_generator(alpha)
            return GcdResult(d, factor, self.zero())
        if n == 1:
            a, b = int(alpha.coords[0]), int(beta.coords[0])
            g, s, t = gmpy2.gcdext(a, b)
            return GcdResult(
                self.element_from_rational(int(g)),
                self.element_from_rational(int(s)),
                self.element_from_rational(int(t)),
            )

        rows = self._module_rows(alpha, beta)
        h, u, rank = hnf_with_transform(rows)
        if rank != n:
            raise ValidationError("coordinate module does not have full rank")
        ideal_norm = 1
        for i in range(n):
            ideal_norm *= h[i][i]

        coeffs = None
        if ideal_norm == 1:
            # The ideal is all of O_K; 1 itself is the generator, and its
            # coordinates in the HNF basis solve c*H = (1, 0, ..., 0).
            coeffs = self._hnf_coordinates(h, [1] + [0] * (n - 1))
        else:
            coeffs = self._generator_search(h, ideal_norm, slack)
            if coeffs is None:
                raise GeneratorNotFound(
                    f"no generator of norm {ideal_norm} within slack {slack}; "
                    "corrupted field data or class number > 1"
                )
        # Bezout recovery: c*H = c*(U[0:n]*A), so t = c*U[0:n] expresses d
        # over the original generators alpha*e_k, beta*e_k.
        t = [
            sum(coeffs[r] * u[r][j] for r in range(n)) for j in range(2 * n)
        ]
        bez_u = FieldElement(self, t[:n])
        bez_w = FieldElement(self, t[n:])
        d = alpha * bez_u + beta * bez_w

        d_canon, factor = self._canonicalize_generator(d)
        return GcdResult(d_canon, factor * bez_u, factor * bez_w)

    def _canonicalize_generator(self, d: FieldElement):
        """Canonical representative of d modulo the full unit group, with
        sigma_1 > 0; returns (d', unit factor) with d' = factor * d.
        Deterministic: lexicographically smallest coordinate tuple over the
        unit cosets.  A unit always canonicalizes to 1."""
        if abs(self.field_norm(d)) == 1:
            return self.one(), d.inverse()
        best = None
        for rep in self.unit_coset_reps:
            cand, eta = self.unit_reduce(rep * d)
            cand, flip = self._sign_normalize(cand)
            key = tuple(cand.coords)
            if best is None or key < best[0]:
                best = (key, cand, rep * eta * flip)
        _, d_canon, factor = best
        return d_canon, factor

    def _sign_normalize(self, x: FieldElement):
        """Flip the global sign so sigma_1(x) > 0; returns (x', +-1 element)."""
        s1 = x.embeddings()[0]
        if s1 < 0:
            return -x, self.element_from_rational(-1)
        if s1 == 0.0:
            s1m = x.embeddings_mpfr()[0]
            if s1m < 0:
                return -x, self.element_from_rational(-1)
        return x, self.one()

    def _hnf_coordinates(self, h, target):
        """Solve c*H = target over the integers (H upper triangular); returns
        None when the target is not in the row lattice."""
        n = self.degree
        c = [0] * n
        rem = list(target)
        for i in range(n):
            if rem[i] % h[i][i] != 0:
                return None
            c[i] = rem[i] // h[i][i]
            for j in range(i, n):
                rem[j] -= c[i] * h[i][j]
        if any(rem):
            return None
        return c

    def _generator_search(self, h, ideal_norm, slack):
        """Enumerate ideal elements xi = c*H inside the Minkowski-style
        embedding box |sigma_j(xi)| <= slack * exp(hi_j) * N^(1/n) and return
        the HNF coordinates of the first (lexicographically smallest) xi with
        |N(xi)| = ideal_norm."""
        n = self.degree
        nroot = float(ideal_norm) ** (1.0 / n)
        box = slack * np.exp(self._unit_cell_hi) * nroot
        hmat = np.array(h, dtype=np.float64)
        w = self._emb_f64 @ hmat.T  # embeddings of the HNF basis rows
        winv = np.linalg.inv(w)
        bounds = np.abs(winv) @ box
        ranges = [range(-int(math.floor(b + 1e-9)), int(math.floor(b + 1e-9)) + 1) for b in bounds]

        norm_of = self._int_norm_fn()
        best = None
        for c in _lex_product(ranges):
            if not any(c):
                continue
            coords = [
                sum(c[r] * h[r][j] for r in range(n)) for j in range(n)
            ]
            if abs(norm_of(coords)) == ideal_norm:
                key = tuple(coords)
                if best is None or key < best[0]:
                    best = (key, list(c))
        return best[1] if best else None

    def _int_norm_fn(self):
        """Exact integer norm of an integer coordinate vector."""
        n = self.degree
        if n == 2:
            q, p = int(self._mt[1][1][0]), int(self._mt[1][1][1])

            def norm2(coords):
                a, b = coords
                return a * a + p * a * b - q * b * b

            return norm2

        def normn(coords):
            x = FieldElement(self, coords)
            return int(self.field_norm(x))

        return normn

    # -- zeta ------------------------------------------------------------------------

    def zeta_K_2(self, prime_bound: int) -> ZetaEstimate:
        """Euler product for zeta_K(2) over rational primes p <= prime_bound.

        Splitting types come from the discriminant's Kronecker symbol for
        degree <= 2 and from factoring the primitive-element polynomial mod p
        for higher degree (exact off the finitely many primes dividing the
        index [O_K : Z[theta]]).  The returned tail bound 4^n/prime_bound is
        deliberately crude but rigorous.
        """
        if prime_bound < 2:
            raise ValidationError("prime_bound must be >= 2")
        n = self.degree
        primes = _sieve(prime_bound)
        log_total = 0.0
        if n == 1:
            for p in primes:
                log_total -= math.log1p(-float(p) ** -2)
        elif n == 2:
            disc = self.discriminant
            for p in primes:
                chi = gmpy2.kronecker(disc, int(p))
                if chi == 1:
                    log_total -= 2.0 * math.log1p(-float(p) ** -2)
                elif chi == -1:
                    log_total -= math.log1p(-float(p) ** -4)
                else:
                    log_total -= math.log1p(-float(p) ** -2)
        else:
            if not self.primitive_poly:
                raise UnsupportedField(
                    "zeta for degree > 2 needs a primitive-element polynomial"
                )
            for p in primes:
                for deg, count in _degree_profile(self.primitive_poly, int(p)):
                    log_total -= count * math.log1p(-float(p) ** (-2 * deg))
        tail = float(4**n) / prime_bound
        return ZetaEstimate(math.exp(log_total), tail, int(prime_bound))

    # -- serialization -----------------------------------------------------------------

    def to_dict(self) -> dict:
        # str() of an mpfr prints enough digits to round-trip exactly at the
        # same context precision.
        with gmpy2.context(precision=self.precision):
            emb = [[str(+v) for v in row] for row in self._emb_mpfr]
            reg = str(+self.regulator)
        data = {
            "degree": self.degree,
            "labels": list(self.labels),
            "mult_table": [
                [[_rat_to_obj(v) for v in cell] for cell in row]
                for row in self._mt
            ],
            "embeddings": emb,
            "discriminant": self.discriminant,
            "fundamental_units": [
                [_rat_to_obj(c) for c in u.coords]
                for u in self.fundamental_units
            ],
            "regulator": reg,
            "index_plus_sq": self.index_plus_sq,
        }
        if self.primitive_poly:
            data["primitive_poly"] = list(self.primitive_poly)
        return data

    # -- formatting / parsing ------------------------------------------------------------

    def format_element(self, x: FieldElement) -> str:
        parts = []
        for c, label in zip(x.coords, self.labels):
            if c == 0:
                continue
            if label == "1":
                parts.append(str(c))
            elif c == 1:
                parts.append(label)
            elif c == -1:
                parts.append(f"-{label}")
            else:
                parts.append(f"{c}*{label}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f"+{p}" if not p.startswith("-") else p
        return out

    def parse_element(self, text: str) -> FieldElement:
        """Parse a literal like '3/2+5*w' over the declared basis labels."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValidationError("empty element literal")
        # Split into signed terms.
        terms = []
        start = 0
        for i, ch in enumerate(s):
            if ch in "+-" and i > start and s[i - 1] not in "+-*/eE":
                terms.append(s[start:i])
                start = i
        terms.append(s[start:])
        coords = [mpq(0)] * self.degree
        label_index = {lab: k for k, lab in enumerate(self.labels) if lab != "1"}
        for term in terms:
            if not term or term in "+-":
                raise ValidationError(f"malformed element literal {text!r}")
            sign = 1
            body = term
            if body[0] == "+":
                body = body[1:]
            elif body[0] == "-":
                sign = -1
                body = body[1:]
            coeff = mpq(1)
            label = None
            if "*" in body:
                coeff_str, label = body.split("*", 1)
                coeff = self._parse_rational(coeff_str, text)
            elif body in label_index:
                label = body
            else:
                coeff = self._parse_rational(body, text)
            if label is None:
                coords[0] += sign * coeff
            else:
                if label not in label_index:
                    raise ValidationError(
                        f"unknown basis label {label!r} in {text!r}"
                    )
                coords[label_index[label]] += sign * coeff
        return FieldElement(self, coords)

    @staticmethod
    def _parse_rational(s: str, context: str) -> mpq:
        try:
            return mpq(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(
                f"bad rational {s!r} in element literal {context!r}"
            ) from exc

    def __repr__(self) -> str:
        return (
            f"TotallyRealField({self.name}, degree={self.degree}, "
            f"disc={self.discriminant})"
        )


def _lex_product(ranges):
    """Deterministic lexicographic product of integer ranges."""
    if not ranges:
        yield ()
        return
    head, *tail = ranges
    for value in head:
        for rest in _lex_product(tail):
            yield (value,) + rest


def _sieve(bound: int) -> np.ndarray:
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(bound + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(math.isqrt(bound)) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


# -- polynomial factorization degrees mod p (general-degree zeta support) -------


def _poly_mod_trim(coeffs, p):
    c = [x % p for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _poly_mul_mod(a, b, mod_poly, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_rem(out, mod_poly, p)


def _poly_rem(a, b, p):
    a = a[:]
    db, lb = len(b) - 1, b[-1]
    inv = pow(lb, -1, p)
    for i in range(len(a) - 1, db - 1, -1):
        if a[i]:
            f = a[i] * inv % p
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - f * b[j]) % p
    a = a[:db] or [0]
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _poly_gcd(a, b, p):
    a, b = _poly_mod_trim(a, p), _poly_mod_trim(b, p)
    while b != [0]:
        a, b = b, _poly_rem(a, b, p)
    if a[-1] != 1 and a != [0]:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def _poly_deriv(a, p):
    return _poly_mod_trim([i * a[i] % p for i in range(1, len(a))] or [0], p)


def _poly_pow_x_mod(exp, mod_poly, p):
    """x^exp modulo mod_poly over F_p."""
    result = [1]
    base = [0, 1] if len(mod_poly) > 2 else _poly_rem([0, 1], mod_poly, p)
    while exp:
        if exp & 1:
            result = _poly_mul_mod(result, base, mod_poly, p)
        base = _poly_mul_mod(base, base, mod_poly, p)
        exp >>= 1
    return result


def _degree_profile(coeffs, p):
    """Degrees (with multiplicity of distinct factors) of the irreducible
    factors of the squarefree part of coeffs mod p.  For p not dividing the
    index [O_K : Z[theta]] these are the residue degrees of the primes above
    p; at the finitely many exceptional primes the profile is approximate."""
    f = _poly_mod_trim(list(coeffs), p)
    if len(f) <= 1:
        return []
    g = _poly_gcd(f, _poly_deriv(f, p), p)
    if len(g) > 1:
        f = _poly_rem_exact(f, g, p)
    profile = []
    d = 1
    while len(f) - 1 >= 2 * d:
        xp = _poly_pow_x_mod(p**d, f, p)
        xp = xp[:] + [0] * (2 - len(xp))
        diff = [(xp[0]) % p, (xp[1] - 1) % p] + [x % p for x in xp[2:]]
        h = _poly_gcd(f, diff, p)
        if len(h) > 1:
            profile.append((d, (len(h) - 1) // d))
            f = _poly_rem_exact(f, h, p)
        d += 1
    if len(f) > 1:
        profile.append((len(f) - 1, 1))
    return profile


def _poly_rem_exact(a, b, p):
    """Exact quotient a/b over F_p (b divides a)."""
    a = _poly_mod_trim(a[:], p)
    db, lb = len(b) - 1, b[-1]
    inv = pow(lb, -1, p)
    out = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        f = a[i] * inv % p
        out[i - db] = f
        if f:
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - f * b[j]) % p
    return _poly_mod_trim(out, p)


# -- field-spec files --------------------------------------------------------------


def field_from_dict(data: dict, precision: Optional[int] = None) -> TotallyRealField:
    required = {
        "degree",
        "mult_table",
        "embeddings",
        "discriminant",
        "fundamental_units",
        "regulator",
        "index_plus_sq",
    }
    missing = required - set(data)
    if missing:
        raise ValidationError(f"field spec missing keys: {sorted(missing)}")
    return TotallyRealField(
        degree=data["degree"],
        mult_table=data["mult_table"],
        embeddings=data["embeddings"],
        discriminant=data["discriminant"],
        fundamental_units=data["fundamental_units"],
        regulator=data["regulator"],
        index_plus_sq=data["index_plus_sq"],
        labels=data.get("labels"),
        primitive_poly=data.get("primitive_poly"),
        precision=precision,
        name=data.get("name"),
    )


def load_field_file(path: str, precision: Optional[int] = None) -> TotallyRealField:
    """Load a field-spec file; JSON or TOML, auto-detected by extension.

    All structural invariants are validated; a spec violating any of them is
    rejected rather than trusted.
    """
    lower = path.lower()
    if lower.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    elif lower.endswith(".toml"):
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        raise ValidationError(
            f"field-spec file must end in .json or .toml: {path!r}"
        )
    return field_from_dict(data, precision=precision)
