"""Command-line front end.

Every capability of the library is exposed as a subcommand with
machine-readable output (JSON with a top-level ``schema: 1`` key, or CSV/text
renderings of the same record).  Identical invocations with identical seed
and worker count produce byte-identical JSON.

Exit codes: 0 on success, 1 on validation errors (including malformed tau or
cusp literals), 2 when a verification subcommand finds a genuine violation of
one of the proven inequalities.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .analytics import (
    DEFAULT_PRIME_BOUND,
    DEFAULT_SAMPLES,
    estimate_hermite,
    integral_mu1_t,
    partial_volume_g,
    sample_cusp_neighborhood,
    siegel_volume,
)
from .cusps import Cusp, iota, mu, mu_invariance_check
from .errors import CuspdistError, ValidationError, ViolationFound
from .factory import make_rationals, make_real_quadratic
from .heights import RigidAdelicSpace, height_mu_bridge_check
from .hyperbolic import (
    GroupElement,
    PosDefPair,
    UpperHalfPoint,
    act,
    phi,
    t_of_tau,
)
from .number_field import (
    TotallyRealField,
    _default_precision,
    load_field_file,
)
from .search import (
    default_threshold,
    closest_cusps,
    hermite_upper_bound,
    reduce_to_fundamental_domain,
    verify_minkowski,
)

__all__ = ["RunConfig", "main", "entry"]


@dataclass
class RunConfig:
    """Validated run-wide options shared by all subcommands."""

    field_spec: str
    precision: int
    seed: int
    samples: int
    out_format: str
    workers: int

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        precision = (
            args.precision if args.precision is not None else _default_precision()
        )
        if precision < 24:
            raise ValidationError(f"precision too small: {precision}")
        if not 0 <= args.seed < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if args.samples < 0:
            raise ValidationError("samples must be nonnegative")
        if args.workers < 1:
            raise ValidationError("workers must be >= 1")
        return cls(
            field_spec=args.field,
            precision=precision,
            seed=args.seed,
            samples=args.samples,
            out_format=args.format,
            workers=args.workers,
        )


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_field(cfg: RunConfig) -> TotallyRealField:
    spec = cfg.field_spec
    if spec == "builtin:Q":
        return make_rationals(cfg.precision)
    if spec.startswith("quadratic:"):
        try:
            m = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"malformed quadratic field selector {spec!r}")
        return make_real_quadratic(m, precision=cfg.precision)
    if spec.startswith("file:"):
        return load_field_file(spec.split(":", 1)[1], precision=cfg.precision)
    raise ValidationError(
        f"unknown field selector {spec!r}; use builtin:Q, quadratic:m, or file:path"
    )


def _parse_tau(field: TotallyRealField, text: str, precision: int) -> UpperHalfPoint:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != field.degree:
        raise ValidationError(
            f"tau needs {field.degree} comma-separated complex literal(s), "
            f"got {len(parts)}"
        )
    pairs = []
    for part in parts:
        try:
            z = complex(part.replace("i", "j").replace("I", "j"))
        except ValueError:
            raise ValidationError(f"malformed complex literal {part!r}")
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValidationError(f"non-finite complex literal {part!r}")
        pairs.append((z.real, z.imag))
    return UpperHalfPoint(pairs, precision=precision)


def _parse_cusp(field: TotallyRealField, text: str) -> Cusp:
    if ":" not in text:
        raise ValidationError(
            f"cusp literal must be 'alpha:beta' over the integral basis, got {text!r}"
        )
    a_str, b_str = text.split(":", 1)
    return Cusp(field, field.parse_element(a_str), field.parse_element(b_str))


def _one_of(pos, opt, name: str) -> str:
    if (pos is None) == (opt is None):
        raise ValidationError(
            f"provide {name} exactly once, positionally or via --{name}"
        )
    return pos if pos is not None else opt


def _cusp_str(c: Cusp) -> str:
    f = c.field.format_element
    return f"{f(c.alpha)}:{f(c.beta)}"


def _tau_records(tau: UpperHalfPoint) -> list:
    return [[str(x), str(y)] for x, y in tau.coords]


def _tau_floats(tau: UpperHalfPoint) -> list:
    return [[float(x), float(y)] for x, y in tau.coords]


# -- output ---------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _render(payload: dict, out_format: str) -> str:
    if out_format == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(payload):
            writer.writerow([key, value])
        return buf.getvalue()
    lines = [f"{key} = {value}" for key, value in _flatten(payload)]
    return "\n".join(lines) + "\n"


def _emit(payload: dict, args: argparse.Namespace) -> None:
    text = _render(payload, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommand handlers ----------------------------------------------------------


def _head(command: str, cfg: RunConfig) -> dict:
    return {"schema": 1, "command": command, "field": cfg.field_spec}


def _cmd_field_info(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    payload = _head("field-info", cfg)
    payload.update(
        {
            "name": field.name,
            "degree": field.degree,
            "discriminant": field.discriminant,
            "class_number": 1,
            "labels": list(field.labels),
            "regulator": float(field.regulator),
            "index_plus_sq": field.index_plus_sq,
            "fundamental_units": [
                field.format_element(u) for u in field.fundamental_units
            ],
            "unit_coset_reps": [
                field.format_element(u) for u in field.unit_coset_reps
            ],
            "precision": field.precision,
            "default_threshold": default_threshold(field),
            "hermite_upper_bound": hermite_upper_bound(field),
        }
    )
    return payload, 0


def _cmd_mu(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    tau = _parse_tau(field, _one_of(args.tau_pos, args.tau_opt, "tau"), cfg.precision)
    c = _parse_cusp(field, _one_of(args.cusp_pos, args.cusp_opt, "cusp"))
    value = mu(tau, c)
    payload = _head("mu", cfg)
    payload.update(
        {
            "tau": _tau_records(tau),
            "cusp": _cusp_str(c),
            "mu": float(value),
            "distance": float(value) ** -0.5,
        }
    )
    return payload, 0


def _cmd_closest(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    tau = _parse_tau(field, _one_of(args.tau_pos, args.tau_opt, "tau"), cfg.precision)
    ranking = closest_cusps(field, tau, args.threshold)
    payload = _head("closest", cfg)
    payload.update(
        {
            "tau": _tau_records(tau),
            "best_cusp": _cusp_str(ranking.best_cusp),
            "mu1": ranking.mu1,
            "distance1": ranking.mu1**-0.5,
            "second_cusp": _cusp_str(ranking.second_cusp),
            "mu2": ranking.mu2,
            "distance2": ranking.mu2**-0.5,
            "tie": ranking.tie_flag,
            "enumeration_stats": dict(ranking.enumeration_stats),
        }
    )
    return payload, 0


def _cmd_reduce(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    tau = _parse_tau(field, _one_of(args.tau_pos, args.tau_opt, "tau"), cfg.precision)
    reduced, gamma = reduce_to_fundamental_domain(field, tau)
    a, b, c, d = gamma.entries()
    fmt = field.format_element
    payload = _head("reduce", cfg)
    payload.update(
        {
            "tau": _tau_records(tau),
            "tau_reduced": _tau_records(reduced),
            "tau_reduced_float": _tau_floats(reduced),
            "gamma": {"a": fmt(a), "b": fmt(b), "c": fmt(c), "d": fmt(d)},
        }
    )
    return payload, 0


def _random_taus(field: TotallyRealField, count: int, seed: int, precision: int):
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 1], dtype=np.uint64)))
    n = field.degree
    for _ in range(count):
        coeff = rng.uniform(-0.5, 0.5, size=n)
        x = field._emb_f64 @ coeff
        y = np.exp(rng.uniform(math.log(0.3), math.log(3.0), size=n))
        yield UpperHalfPoint(list(zip(x.tolist(), y.tolist())), precision=precision)


def _cmd_verify_minkowski(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    payload = _head("verify-minkowski", cfg)
    if args.tau is not None:
        tau = _parse_tau(field, args.tau, cfg.precision)
        report = verify_minkowski(field, tau)
        payload.update({"tau": _tau_records(tau), "report": asdict(report)})
        return payload, 0
    count = args.random if args.random is not None else 100
    if count < 1:
        raise ValidationError("--random needs a positive count")
    prod_min, prod_max = math.inf, -math.inf
    lower = upper = None
    for tau in _random_taus(field, count, cfg.seed, cfg.precision):
        report = verify_minkowski(field, tau)
        prod_min = min(prod_min, report.product)
        prod_max = max(prod_max, report.product)
        lower, upper = report.lower_bound, report.upper_bound
    payload.update(
        {
            "checked": count,
            "violations": 0,
            "seed": cfg.seed,
            "product_min": prod_min,
            "product_max": prod_max,
            "lower_bound": lower,
            "upper_bound": upper,
            "hermite_upper": hermite_upper_bound(field),
        }
    )
    return payload, 0


def _cmd_volume(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    report = siegel_volume(field, args.prime_bound)
    payload = _head("volume", cfg)
    payload.update(report.as_dict())
    return payload, 0


def _cmd_zeta2(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    z = field.zeta_K_2(args.prime_bound)
    payload = _head("zeta2", cfg)
    payload.update(
        {
            "value": z.value,
            "tail_bound": z.tail_bound,
            "prime_bound": z.prime_bound,
        }
    )
    return payload, 0


def _cmd_integral(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    est = integral_mu1_t(
        field, args.t, cfg.samples, cfg.seed, workers=cfg.workers
    )
    payload = _head("integral", cfg)
    payload.update(est.as_dict())
    payload["workers"] = cfg.workers
    return payload, 0


def _cmd_g(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    est = partial_volume_g(
        field, args.x, cfg.samples, cfg.seed, workers=cfg.workers
    )
    payload = _head("g", cfg)
    payload.update(est.as_dict())
    del payload["t"]
    payload["x"] = args.x
    payload["workers"] = cfg.workers
    return payload, 0


def _cmd_hermite(args, cfg: RunConfig):
    field = _resolve_field(cfg)
    est = estimate_hermite(
        field, args.grid_resolution, args.refine_iters, cfg.seed
    )
    payload = _head("hermite", cfg)
    payload.update(est.as_dict())
    return payload, 0


# -- selftest ---------------------------------------------------------------------


def _rand_element(field, rng, span=5):
    coords = rng.integers(-span, span + 1, size=field.degree)
    return field.element_from_coords([int(v) for v in coords])


def _rand_tau(field, rng, precision):
    n = field.degree
    coeff = rng.uniform(-0.5, 0.5, size=n)
    x = field._emb_f64 @ coeff
    y = np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=n))
    return UpperHalfPoint(list(zip(x.tolist(), y.tolist())), precision=precision)


def _rand_gamma(field, rng):
    g = (
        GroupElement.translation(field, _rand_element(field, rng, 2))
        * GroupElement.inversion(field)
        * GroupElement.translation(field, _rand_element(field, rng, 2))
    )
    if field.fundamental_units and rng.integers(0, 2):
        g = g * GroupElement.scaling(field, field.fundamental_units[0])
    return g


def _rand_cusp(field, rng):
    while True:
        a = _rand_element(field, rng, 4)
        b = _rand_element(field, rng, 4)
        if not (a.is_zero() and b.is_zero()):
            return Cusp(field, a, b)


def _selftest(cfg: RunConfig):
    """Cross-module invariant battery; every check is deterministic in the
    configured seed."""
    rng = np.random.Generator(
        np.random.Philox(key=np.array([cfg.seed, 0xA5], dtype=np.uint64))
    )
    fields = [
        make_rationals(cfg.precision),
        make_real_quadratic(2, precision=cfg.precision),
        make_real_quadratic(5, precision=cfg.precision),
    ]
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append({"name": name, "passed": True, "detail": ""})
        except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
            checks.append({"name": name, "passed": False, "detail": str(exc)})

    def product_formula():
        for field in fields:
            for _ in range(120):
                a = _rand_element(field, rng)
                b = _rand_element(field, rng)
                if field.field_norm(a * b) != field.field_norm(a) * field.field_norm(b):
                    raise AssertionError("norm is not multiplicative")
                na = float(abs(field.field_norm(a)))
                pa = float(abs(np.prod(a.embeddings())))
                if abs(pa - na) > 1e-8 * max(1.0, na):
                    raise AssertionError("product of embeddings != |norm|")

    def gcd_bezout():
        for field in fields:
            for _ in range(60):
                a = _rand_element(field, rng)
                b = _rand_element(field, rng)
                if a.is_zero() and b.is_zero():
                    continue
                g = field.gcd(a, b)
                if g.u * a + g.w * b != g.d:
                    raise AssertionError("Bezout identity fails")
                for v in (a, b):
                    if not v.is_zero() and not (v / g.d).is_integral():
                        raise AssertionError("gcd does not divide its inputs")

    def action_associativity():
        for field in fields:
            for _ in range(40):
                g1 = _rand_gamma(field, rng)
                g2 = _rand_gamma(field, rng)
                tau = _rand_tau(field, rng, cfg.precision)
                lhs = act(g1 * g2, tau)
                rhs = act(g1, act(g2, tau))
                if not lhs.is_close(rhs, 1e-9):
                    raise AssertionError("(g1 g2) tau != g1 (g2 tau)")

    def iota_involution():
        for field in fields:
            for _ in range(80):
                c = _rand_cusp(field, rng)
                if iota(iota(c)) != c:
                    raise AssertionError("iota is not an involution")

    def mu_invariance():
        for field in fields:
            for _ in range(40):
                gamma = _rand_gamma(field, rng)
                tau = _rand_tau(field, rng, cfg.precision)
                c = _rand_cusp(field, rng)
                if not mu_invariance_check(gamma, tau, c, rtol=1e-9):
                    raise AssertionError("mu is not invariant under the action")

    def reduction_idempotent():
        for field in fields:
            for _ in range(20):
                tau = _rand_tau(field, rng, cfg.precision)
                t1, _ = reduce_to_fundamental_domain(field, tau)
                t2, _ = reduce_to_fundamental_domain(field, t1)
                if not t2.is_close(t1, 1e-9):
                    raise AssertionError("reduction is not idempotent")

    def bridge():
        for field in fields:
            for _ in range(40):
                tau = _rand_tau(field, rng, cfg.precision)
                space = RigidAdelicSpace(field, tau)
                c = _rand_cusp(field, rng)
                if not height_mu_bridge_check(space, c, rtol=1e-9):
                    raise AssertionError("height-mu bridge fails")

    def minkowski_mini():
        for field in fields:
            for _ in range(50):
                tau = _rand_tau(field, rng, cfg.precision)
                verify_minkowski(field, tau)

    def volume_identity():
        for field in fields:
            rep = siegel_volume(field, 50_000)
            if abs(rep.vol_gamma - rep.vol_gamma_hat * field.index_plus_sq) > 1e-9 * rep.vol_gamma:
                raise AssertionError("vol_gamma != vol_gamma_hat * index")
        repq = siegel_volume(fields[0], 50_000)
        if abs(repq.vol_gamma - math.pi / 3) > 1e-5:
            raise AssertionError("Q volume is not pi/3")

    def g_closed_form():
        est = partial_volume_g(fields[0], 0.5)
        if est.value != 0.25 or est.std_error != 0.0:
            raise AssertionError("closed form g(0.5) != 0.25 exactly")

    def integral_t0():
        est = integral_mu1_t(fields[2], 0.0, 1000, cfg.seed)
        if est.value != 1.0 or est.std_error != 0.0:
            raise AssertionError("integral at t=0 is not exactly 1")

    def seed_reproducibility():
        qa = make_rationals(cfg.precision)
        qb = make_rationals(cfg.precision)
        e1 = integral_mu1_t(qa, 0.5, 4000, 17)
        e2 = integral_mu1_t(qb, 0.5, 4000, 17)
        if e1 != e2:
            raise AssertionError("integral is not seed-reproducible")
        k5a = make_real_quadratic(5, precision=cfg.precision)
        k5b = make_real_quadratic(5, precision=cfg.precision)
        g1 = partial_volume_g(k5a, 1.2, 2000, 5, workers=2)
        g2 = partial_volume_g(k5b, 1.2, 2000, 5, workers=2)
        if g1 != g2:
            raise AssertionError("g is not seed-reproducible across workers")
        s1 = [p for p in sample_cusp_neighborhood(fields[1], 1.5, 40, 9)]
        s2 = [p for p in sample_cusp_neighborhood(fields[1], 1.5, 40, 9)]
        for p1, p2 in zip(s1, s2):
            if not (p1.x == p2.x and p1.y == p2.y):
                raise AssertionError("sample stream is not seed-reproducible")

    def sample_support():
        for p in sample_cusp_neighborhood(fields[0], 1.0, 300, cfg.seed):
            x0 = float(p.x[0])
            if not (-0.5 <= x0 < 0.5) or not float(p.y[0]) > 1.0:
                raise AssertionError("n=1 sample outside the r=1 cell")
        for p in sample_cusp_neighborhood(fields[2], 2.0, 300, cfg.seed):
            if not float(p.norm_imag()) > 0.25 * (1 - 1e-12):
                raise AssertionError("n=2 sample below the support bound")

    check("product-formula", product_formula)
    check("gcd-bezout", gcd_bezout)
    check("action-associativity", action_associativity)
    check("phi-psi-roundtrip", _phi_psi_roundtrip_check(fields, rng, cfg))
    check("phi-equivariance", _phi_equivariance_check(fields, rng, cfg))
    check("t-matrix-gram", _t_matrix_check(fields, rng, cfg))
    check("iota-involution", iota_involution)
    check("mu-invariance", mu_invariance)
    check("reduction-idempotence", reduction_idempotent)
    check("height-mu-bridge", bridge)
    check("minkowski-sandwich", minkowski_mini)
    check("volume-identity", volume_identity)
    check("g-closed-form", g_closed_form)
    check("integral-t0-exact", integral_t0)
    check("seed-reproducibility", seed_reproducibility)
    check("sample-support", sample_support)

    passed = all(c["passed"] for c in checks)
    payload = {
        "schema": 1,
        "command": "selftest",
        "seed": cfg.seed,
        "precision": cfg.precision,
        "checks": checks,
        "passed": passed,
    }
    return payload, 0 if passed else 1


def _phi_psi_roundtrip_check(fields, rng, cfg):
    import gmpy2
    from gmpy2 import mpfr

    def run():
        for field in fields:
            for _ in range(30):
                tau = _rand_tau(field, rng, cfg.precision)
                with gmpy2.context(precision=cfg.precision):
                    lams = [
                        mpfr(10) ** mpfr(rng.uniform(-2.0, 2.0))
                        for _ in range(field.degree)
                    ]
                    pair = PosDefPair.from_point(tau, lams)
                    tau2, lams2 = pair.to_point()
                    for j in range(field.degree):
                        for a, b in (
                            (tau.coords[j][0], tau2.coords[j][0]),
                            (tau.coords[j][1], tau2.coords[j][1]),
                            (lams[j], lams2[j]),
                        ):
                            scale = max(1.0, abs(float(a)))
                            if abs(float(a - b)) > 1e-12 * scale:
                                raise AssertionError("psi(phi(tau, lam)) != (tau, lam)")

    return run


def _phi_equivariance_check(fields, rng, cfg):
    import gmpy2

    def run():
        for field in fields:
            for _ in range(30):
                gamma = (
                    GroupElement.translation(field, _rand_element(field, rng, 2))
                    * GroupElement.inversion(field)
                    * GroupElement.translation(field, _rand_element(field, rng, 2))
                )
                tau = _rand_tau(field, rng, cfg.precision)
                tau2 = act(gamma, tau)
                with gmpy2.context(precision=cfg.precision):
                    for j, (aj, bj, cj, dj) in enumerate(gamma.embeddings_mpfr()):
                        lam = gmpy2.mpfr(1)
                        s = phi(tau.coords[j], lam)
                        left = phi(tau2.coords[j], lam)
                        # P S P^T
                        p = ((aj, bj), (cj, dj))
                        ps = (
                            (
                                p[0][0] * s[0][0] + p[0][1] * s[1][0],
                                p[0][0] * s[0][1] + p[0][1] * s[1][1],
                            ),
                            (
                                p[1][0] * s[0][0] + p[1][1] * s[1][0],
                                p[1][0] * s[0][1] + p[1][1] * s[1][1],
                            ),
                        )
                        right = (
                            (
                                ps[0][0] * p[0][0] + ps[0][1] * p[0][1],
                                ps[0][0] * p[1][0] + ps[0][1] * p[1][1],
                            ),
                            (
                                ps[1][0] * p[0][0] + ps[1][1] * p[0][1],
                                ps[1][0] * p[1][0] + ps[1][1] * p[1][1],
                            ),
                        )
                        for r in range(2):
                            for ccol in range(2):
                                a = float(left[r][ccol])
                                b = float(right[r][ccol])
                                if abs(a - b) > 1e-9 * max(1.0, abs(a)):
                                    raise AssertionError("phi is not equivariant")

    return run


def _t_matrix_check(fields, rng, cfg):
    import gmpy2

    def run():
        for field in fields:
            for _ in range(30):
                tau = _rand_tau(field, rng, cfg.precision)
                with gmpy2.context(precision=cfg.precision):
                    for j in range(field.degree):
                        t = t_of_tau(tau.coords[j])
                        det = t[0][0] * t[1][1] - t[0][1] * t[1][0]
                        if abs(float(det) - 1.0) > 1e-12:
                            raise AssertionError("det T != 1")
                        gram = (
                            (
                                t[0][0] * t[0][0] + t[1][0] * t[1][0],
                                t[0][0] * t[0][1] + t[1][0] * t[1][1],
                            ),
                            (
                                t[0][1] * t[0][0] + t[1][1] * t[1][0],
                                t[0][1] * t[0][1] + t[1][1] * t[1][1],
                            ),
                        )
                        s = phi(tau.coords[j], gmpy2.mpfr(1))
                        for r in range(2):
                            for ccol in range(2):
                                a = float(gram[r][ccol])
                                b = float(s[r][ccol])
                                if abs(a - b) > 1e-12 * max(1.0, abs(b)):
                                    raise AssertionError("T^t T != phi(tau, 1)")

    return run


def _cmd_selftest(args, cfg: RunConfig):
    return _selftest(cfg)


# -- parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--field",
        default="builtin:Q",
        help="field selector: builtin:Q, quadratic:m, or file:path "
        "(default builtin:Q)",
    )
    common.add_argument(
        "--precision",
        type=int,
        default=None,
        help="working precision in bits (default 80, or HC_PRECISION_BITS)",
    )
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument(
        "--samples",
        type=int,
        default=DEFAULT_SAMPLES,
        help="Monte Carlo sample count (default 100000)",
    )
    common.add_argument(
        "--workers", type=int, default=1, help="worker count (default 1)"
    )
    common.add_argument(
        "--format",
        choices=("json", "csv", "text"),
        default="json",
        help="output format (default json)",
    )
    common.add_argument("--out", default=None, help="write output to this path")

    parser = _Parser(
        prog="cuspdist",
        description="Distances to cusps on Hilbert modular varieties: "
        "closest-cusp search, reduction, heights, volumes, and Monte Carlo "
        "verification of the proven bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(handler=handler, subparser=sp)
        return sp

    add("field-info", _cmd_field_info, "field invariants: basis, Delta, R, indices")

    tau_help = (
        "n comma-separated complex literals, e.g. 0.5+1.2i (use --tau=... "
        "for values starting with a minus sign)"
    )
    cusp_help = "cusp literal alpha:beta, e.g. 1:0 or 1+w:2"

    sp = add("mu", _cmd_mu, "evaluate mu(tau, cusp) and the distance to the cusp")
    sp.add_argument("tau_pos", nargs="?", default=None, metavar="tau", help=tau_help)
    sp.add_argument(
        "cusp_pos", nargs="?", default=None, metavar="cusp", help=cusp_help
    )
    sp.add_argument("--tau", dest="tau_opt", default=None, help=tau_help)
    sp.add_argument("--cusp", dest="cusp_opt", default=None, help=cusp_help)

    sp = add("closest", _cmd_closest, "two closest cusps and their mu values")
    sp.add_argument("tau_pos", nargs="?", default=None, metavar="tau", help=tau_help)
    sp.add_argument("--tau", dest="tau_opt", default=None, help=tau_help)
    sp.add_argument("--threshold", type=float, default=None)

    sp = add("reduce", _cmd_reduce, "reduce tau to the fundamental cell")
    sp.add_argument("tau_pos", nargs="?", default=None, metavar="tau", help=tau_help)
    sp.add_argument("--tau", dest="tau_opt", default=None, help=tau_help)

    sp = add(
        "verify-minkowski",
        _cmd_verify_minkowski,
        "check the Minkowski-type sandwich at a point or a random sweep",
    )
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--random", type=int, default=None, metavar="N")
    group.add_argument("--tau", default=None)

    sp = add("volume", _cmd_volume, "closed-form volumes of the quotients")
    sp.add_argument("--prime-bound", type=int, default=DEFAULT_PRIME_BOUND)

    sp = add("zeta2", _cmd_zeta2, "Euler-product value of zeta_K(2)")
    sp.add_argument("--prime-bound", type=int, default=DEFAULT_PRIME_BOUND)

    sp = add("integral", _cmd_integral, "normalized integral of mu_1^t")
    sp.add_argument("--t", type=float, required=True)

    sp = add("g", _cmd_g, "partial volume function g(x)")
    sp.add_argument("--x", type=float, required=True)

    sp = add("hermite", _cmd_hermite, "estimate the farthest-point distance")
    sp.add_argument("--grid-resolution", type=int, default=12)
    sp.add_argument("--refine-iters", type=int, default=200)

    add("selftest", _cmd_selftest, "run the cross-module invariant suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        cfg = RunConfig.from_args(args)
        payload, code = args.handler(args, cfg)
        _emit(payload, args)
        return code
    except ViolationFound as exc:
        sys.stderr.write(f"cuspdist {args.command}: violation: {exc}\n")
        if exc.report is not None:
            sys.stderr.write(json.dumps(asdict(exc.report), sort_keys=True) + "\n")
        return 2
    except CuspdistError as exc:
        sub = getattr(args, "subparser", None)
        if sub is not None:
            sub.print_usage(sys.stderr)
        sys.stderr.write(f"cuspdist {args.command}: error: {exc}\n")
        return 1
    except (ValueError, ZeroDivisionError, OverflowError, OSError) as exc:
        sys.stderr.write(f"cuspdist {args.command}: error: {exc}\n")
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
