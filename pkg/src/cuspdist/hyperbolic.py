"""Points of the product upper half-plane H^n, the homographic action of the
(extended) Hilbert modular group, the Poincare measure density, and the
correspondence between H x R_{>0} and symmetric positive-definite matrices.

Group elements carry exact integral field entries; equality is taken in the
quotient by scalar units, via a canonical form that rescales by the unit
orbit of the first nonzero entry.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr, mpq

from .errors import (
    NonPositiveDefinite,
    PrecisionExhausted,
    ValidationError,
)
from .number_field import FieldElement, TotallyRealField, _default_precision

__all__ = [
    "UpperHalfPoint",
    "GroupElement",
    "PosDefPair",
    "act",
    "classify",
    "phi",
    "psi_matrix",
    "t_of_tau",
    "poincare_density",
]


def _to_mpfr(v) -> mpfr:
    if isinstance(v, mpfr):
        return +v
    if isinstance(v, (int, float, str)):
        return mpfr(v)
    if isinstance(v, (mpq,)):
        return mpfr(v)
    if isinstance(v, np.floating):
        return mpfr(float(v))
    raise ValidationError(f"cannot interpret {v!r} as a real number")


class UpperHalfPoint:
    """A point tau = (x_1 + i y_1, ..., x_n + i y_n) of H^n.

    Coordinates are stored as high-precision reals; float64 views are cached
    for the vectorized engines.
    """

    __slots__ = ("coords", "precision", "_f64")

    def __init__(self, coords: Iterable, precision: int | None = None):
        self.precision = precision or _default_precision()
        pairs = []
        with gmpy2.context(precision=self.precision):
            for pair in coords:
                if isinstance(pair, complex):
                    x, y = pair.real, pair.imag
                else:
                    x, y = pair
                xm, ym = _to_mpfr(x), _to_mpfr(y)
                if not ym > 0:
                    raise ValidationError(
                        f"imaginary part must be positive, got {ym}"
                    )
                pairs.append((xm, ym))
        if not pairs:
            raise ValidationError("a point needs at least one coordinate")
        self.coords = tuple(pairs)
        self._f64 = None

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def x(self) -> tuple:
        return tuple(p[0] for p in self.coords)

    @property
    def y(self) -> tuple:
        return tuple(p[1] for p in self.coords)

    def norm_imag(self) -> mpfr:
        """N(Im tau) = prod_j y_j."""
        with gmpy2.context(precision=self.precision):
            s = mpfr(1)
            for _, yj in self.coords:
                s *= yj
        return s

    def float_arrays(self):
        """(x, y) as float64 arrays, cached."""
        if self._f64 is None:
            self._f64 = (
                np.array([float(p[0]) for p in self.coords]),
                np.array([float(p[1]) for p in self.coords]),
            )
        return self._f64

    def complex_f64(self) -> np.ndarray:
        x, y = self.float_arrays()
        return x + 1j * y

    def is_close(self, other: "UpperHalfPoint", tol: float = 1e-12) -> bool:
        if self.n != other.n:
            return False
        ax, ay = self.float_arrays()
        bx, by = other.float_arrays()
        scale = np.maximum(1.0, np.maximum(np.abs(ay), np.abs(by)))
        return bool(
            np.all(np.abs(ax - bx) <= tol * scale)
            and np.all(np.abs(ay - by) <= tol * scale)
        )

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        parts = ", ".join(
            f"{float(x):.6g}{float(y):+.6g}i" for x, y in self.coords
        )
        return f"UpperHalfPoint({parts})"


class GroupElement:
    """2x2 matrix over O_K with determinant 1 ("special") or a totally
    positive unit ("extended"); equality modulo scalar units."""

    __slots__ = ("field", "a", "b", "c", "d", "det", "det_class", "_key")

    def __init__(self, field: TotallyRealField, a, b, c, d):
        self.field = field
        ents = []
        for e in (a, b, c, d):
            if not isinstance(e, FieldElement):
                e = field.element_from_rational(e)
            if e.field is not field:
                raise ValidationError("entries belong to a different field")
            if not e.is_integral():
                raise ValidationError("group element entries must be integral")
            ents.append(e)
        self.a, self.b, self.c, self.d = ents
        det = self.a * self.d - self.b * self.c
        self.det = det
        if det == 1:
            self.det_class = "special"
        else:
            nrm = field.field_norm(det)
            if abs(nrm) == 1 and field.is_totally_positive(det):
                self.det_class = "extended"
            else:
                raise ValidationError(
                    "determinant must be 1 or a totally positive unit, got "
                    f"{field.format_element(det)}"
                )
        self._key = None

    # -- algebra -----------------------------------------------------------------

    @classmethod
    def identity(cls, field: TotallyRealField) -> "GroupElement":
        return cls(field, field.one(), field.zero(), field.zero(), field.one())

    @classmethod
    def translation(cls, field: TotallyRealField, nu) -> "GroupElement":
        """[[1, nu], [0, 1]]: tau -> tau + sigma(nu)."""
        return cls(field, field.one(), nu, field.zero(), field.one())

    @classmethod
    def inversion(cls, field: TotallyRealField) -> "GroupElement":
        """[[0, -1], [1, 0]]: tau -> -1/tau."""
        one = field.one()
        return cls(field, field.zero(), -one, one, field.zero())

    @classmethod
    def scaling(cls, field: TotallyRealField, eta) -> "GroupElement":
        """[[eta, 0], [0, 1]] for a totally positive unit eta:
        tau_j -> sigma_j(eta) tau_j (extended group)."""
        return cls(field, eta, field.zero(), field.zero(), field.one())

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement) or other.field is not self.field:
            return NotImplemented
        return GroupElement(
            self.field,
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        dinv = self.det.inverse()
        return GroupElement(
            self.field,
            self.d * dinv,
            -self.b * dinv,
            -self.c * dinv,
            self.a * dinv,
        )

    def trace(self) -> FieldElement:
        return self.a + self.d

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    # -- embeddings -----------------------------------------------------------------

    def embeddings_f64(self):
        """Four float64 arrays (A, B, C, D) of the entry embeddings."""
        return tuple(e.embeddings() for e in self.entries())

    def embeddings_mpfr(self):
        """List over embeddings j of the mpfr 4-tuples (a_j, b_j, c_j, d_j)."""
        cols = [e.embeddings_mpfr() for e in self.entries()]
        return [tuple(col[j] for col in cols) for j in range(self.field.degree)]

    # -- canonical form modulo scalar units ---------------------------------------

    def canonical_key(self):
        """Deterministic key identifying the class modulo scalar units: the
        lexicographically smallest coordinate tuple over the full unit orbit,
        anchored at the first nonzero entry (unit-cell representative, then
        sign-normalized)."""
        if self._key is None:
            field = self.field
            ents = self.entries()
            anchor = next(e for e in ents if not e.is_zero())
            best = None
            for rep in field.unit_coset_reps:
                _, eta = field.unit_reduce(anchor * rep)
                mul = rep * eta
                _, flip = field._sign_normalize(anchor * mul)
                mul = mul * flip
                scaled = tuple(e * mul for e in ents)
                key = tuple(tuple(e.coords) for e in scaled)
                if best is None or key < best:
                    best = key
            self._key = best
        return self._key

    def __eq__(self, other):
        if not isinstance(other, GroupElement) or other.field is not self.field:
            return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        f = self.field.format_element
        return (
            f"GroupElement[[{f(self.a)}, {f(self.b)}], "
            f"[{f(self.c)}, {f(self.d)}]]"
        )


def act(gamma: GroupElement, tau: UpperHalfPoint) -> UpperHalfPoint:
    """Component-wise homographic action
    tau_j -> (sigma_j(a) tau_j + sigma_j(b)) / (sigma_j(c) tau_j + sigma_j(d))."""
    field = gamma.field
    if tau.n != field.degree:
        raise ValidationError(
            f"point has {tau.n} coordinates, field has degree {field.degree}"
        )
    prec = max(tau.precision, field.precision)
    embs = gamma.embeddings_mpfr()
    out = []
    with gmpy2.context(precision=prec):
        for (xj, yj), (aj, bj, cj, dj) in zip(tau.coords, embs):
            z = mpc(xj, yj)
            w = (aj * z + bj) / (cj * z + dj)
            out.append((w.real, w.imag))
    return UpperHalfPoint(out, precision=prec)


def _embedding_signs(x: FieldElement) -> list:
    """Exact signs of the embeddings of a nonzero element; raises
    PrecisionExhausted when the working precision cannot separate an
    embedding from zero."""
    field = x.field
    embs = x.embeddings_mpfr()
    scale = max(abs(e) for e in embs)
    margin = scale * mpfr(2) ** (-(field.precision // 2))
    signs = []
    for e in embs:
        if abs(e) <= margin:
            raise PrecisionExhausted(
                "embedding too close to zero to classify; raise "
                "HC_PRECISION_BITS"
            )
        signs.append(1 if e > 0 else -1)
    return signs


def classify(gamma: GroupElement) -> str:
    """Fixed-point type from the per-embedding sign of trace^2 - 4 det:
    'identity', 'parabolic' (all zero), 'hyperbolic' (all positive),
    'elliptic' (all negative), or 'mixed'.  Exact: entries are integral, so
    a nonzero discriminant has no vanishing embedding."""
    if gamma.b.is_zero() and gamma.c.is_zero() and gamma.a == gamma.d:
        return "identity"
    tr = gamma.trace()
    disc = tr * tr - gamma.det * 4
    if disc.is_zero():
        return "parabolic"
    signs = _embedding_signs(disc)
    if all(s > 0 for s in signs):
        return "hyperbolic"
    if all(s < 0 for s in signs):
        return "elliptic"
    return "mixed"


def _sqrt_like(v):
    if isinstance(v, mpfr):
        return gmpy2.sqrt(v)
    if isinstance(v, mpq):
        return gmpy2.sqrt(mpfr(v))
    return math.sqrt(v)


def _work_precision(*vals) -> int | None:
    """mpfr working precision when any input is high-precision, else None
    (plain float64 arithmetic)."""
    precs = [v.precision for v in vals if isinstance(v, mpfr)]
    return max(precs) if precs else None


def phi(tau_j, lam_j):
    """Single-embedding correspondence H x R_{>0} -> S_2^{++}(R):
    (x + iy, lam) -> (sqrt(lam)/y) [[x^2 + y^2, x], [x, 1]].

    Inputs may be floats or mpfr; the output 2x2 nested tuple follows the
    input kind.  Symmetric positive-definite with determinant lam.
    """
    if isinstance(tau_j, complex):
        x, y = tau_j.real, tau_j.imag
    else:
        x, y = tau_j
    if not y > 0:
        raise ValidationError("phi requires y > 0")
    if not lam_j > 0:
        raise ValidationError("phi requires lambda > 0")
    prec = _work_precision(x, y, lam_j)
    if prec is not None:
        with gmpy2.context(precision=prec):
            f = _sqrt_like(+lam_j) / y
            return ((f * (x * x + y * y), f * x), (f * x, f))
    f = _sqrt_like(lam_j) / y
    return ((f * (x * x + y * y), f * x), (f * x, f))


def psi_matrix(S):
    """Inverse of phi: S = [[u, v], [v, w]] positive-definite maps to
    ((v + i sqrt(det S)) / w, det S), returned as ((x, y), lam)."""
    try:
        (u, v1), (v2, w) = (S[0][0], S[0][1]), (S[1][0], S[1][1])
    except (TypeError, IndexError, KeyError) as exc:
        raise ValidationError(f"not a 2x2 matrix: {S!r}") from exc
    if isinstance(u, np.floating):
        u, v1, v2, w = float(u), float(v1), float(v2), float(w)
    scale = max(abs(u), abs(v1), abs(w), 1)
    if abs(v1 - v2) > 1e-9 * scale:
        raise ValidationError("matrix is not symmetric")
    prec = _work_precision(u, v1, v2, w)
    with gmpy2.context(precision=prec or 53):
        v = (v1 + v2) / 2
        det = u * w - v * v
        if not (w > 0 and det > 0 and u > 0):
            raise NonPositiveDefinite(
                f"matrix [[{u}, {v}], [{v}, {w}]] is not positive-definite"
            )
        y = _sqrt_like(det) / w
        x = v / w
    return ((x, y), det)


def t_of_tau(tau_j):
    """Archimedean matrix T with transpose(T) T = phi(tau_j, 1):
    T = (1/sqrt(y)) [[y, 0], [x, 1]]."""
    if isinstance(tau_j, complex):
        x, y = tau_j.real, tau_j.imag
    else:
        x, y = tau_j
    if not y > 0:
        raise ValidationError("t_of_tau requires y > 0")
    prec = _work_precision(x, y)
    with gmpy2.context(precision=prec or 53):
        r = _sqrt_like(+y)
        zero = y - y
        out = ((r, zero), (x / r, 1 / r))
    return out


class PosDefPair:
    """n symmetric positive-definite 2x2 matrices with their determinants."""

    __slots__ = ("matrices", "lams")

    def __init__(self, matrices: Sequence, lams: Sequence):
        mats = tuple(
            ((m[0][0], m[0][1]), (m[1][0], m[1][1])) for m in matrices
        )
        lams = tuple(lams)
        if len(mats) != len(lams):
            raise ValidationError("matrix and lambda counts differ")
        for m, lam in zip(mats, lams):
            tr = m[0][0] + m[1][1]
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
            if not (tr > 0 and det > 0):
                raise NonPositiveDefinite(
                    "matrix is not positive-definite (trace or determinant "
                    "not positive)"
                )
            if not lam > 0:
                raise ValidationError("lambda must be positive")
        self.matrices = mats
        self.lams = lams

    @classmethod
    def from_point(cls, tau: UpperHalfPoint, lams: Sequence) -> "PosDefPair":
        lams = tuple(lams)
        if len(lams) != tau.n:
            raise ValidationError("need one lambda per coordinate")
        return cls([phi(p, lam) for p, lam in zip(tau.coords, lams)], lams)

    def to_point(self) -> tuple:
        """Recover (UpperHalfPoint, lams) through psi_matrix."""
        pairs = []
        lams = []
        for m in self.matrices:
            (xy, lam) = psi_matrix(m)
            pairs.append(xy)
            lams.append(lam)
        return UpperHalfPoint(pairs), tuple(lams)

    def __len__(self):
        return len(self.matrices)


def poincare_density(tau: UpperHalfPoint) -> float:
    """Density prod_j y_j^{-2} of the Poincare measure against Lebesgue
    measure in the (x_j, y_j) coordinates."""
    dens = 1.0
    for _, yj in tau.coords:
        dens /= float(yj) ** 2
    return dens
