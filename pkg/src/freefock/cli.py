"""Command-line interface.

Every subcommand reads a polynomial (or series) in the canonical JSON form
``{"n": 2, "terms": [{"word": [1, 2], "re": 1.0, "im": 0.0}, ...]}`` from
``--input`` (``-`` for stdin) when it needs one, and writes JSON to stdout.

Exit codes: 0 success, 2 bad input or violated precondition, 3 size cap
exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass

from freefock import catalog, codim1, factor, opnorm, vncheck
from freefock.errors import ConvergenceError, NotDivisibleError, PreconditionError, ResourceError
from freefock.freepoly import FreePoly, TruncatedSeries, coerce_poly, l1_upper_bound

log = logging.getLogger("freefock")

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_RESOURCE = 3


@dataclass(frozen=True)
class Config:
    degree: int = 12
    tol: float = 1e-9
    cap: int = opnorm.DEFAULT_COLUMN_CAP
    seed: int = 0

    def __post_init__(self):
        if self.degree < 0:
            raise PreconditionError("--degree must be >= 0")
        if not self.tol > 0:
            raise PreconditionError("--tol must be positive")
        if self.cap < 1:
            raise PreconditionError("--cap must be positive")


# -- input parsing ------------------------------------------------------------

def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise PreconditionError(f"cannot read {path}: {exc.strerror}") from exc


def load_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def value_from_obj(obj):
    """A :class:`FreePoly`, or a :class:`TruncatedSeries` when a tail is given."""
    poly = FreePoly.from_json_obj(obj)
    if isinstance(obj, dict) and "tail_bound" in obj:
        try:
            tail = float(obj["tail_bound"])
            deg = int(obj.get("trunc_degree", max(poly.degree, 0)))
        except (TypeError, ValueError) as exc:
            raise PreconditionError("tail_bound and trunc_degree must be numbers") from exc
        return TruncatedSeries(poly, deg, tail)
    return poly


def load_value(path: str):
    return value_from_obj(load_json(path))


def parse_word(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(a) for a in text.split(","))
    except ValueError as exc:
        raise PreconditionError(f"cannot parse word {text!r}") from exc


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise PreconditionError(f"cannot parse number {text!r}") from exc


def parse_ints(text: str) -> list:
    try:
        return [int(a) for a in text.split(",") if a.strip()]
    except ValueError as exc:
        raise PreconditionError(f"cannot parse integer list {text!r}") from exc


def report(value, interval, converged=True, degree=None, **extra) -> dict:
    out = {"value": value, "interval": [interval[0], interval[1]], "converged": converged, "degree": degree}
    out.update(extra)
    return out


# -- commands -----------------------------------------------------------------

def cmd_norm(args, cfg):
    x = load_value(args.input)
    try:
        est = opnorm.linf_estimate_report(x, tol=args.norm_tol, N_max=cfg.degree, cap=cfg.cap)
    except ConvergenceError as exc:
        lo, hi = exc.interval
        return report(lo, (lo, hi), False, cfg.degree, message=str(exc))
    obj = est.to_json_obj()
    obj["l1_bound"] = l1_upper_bound(x) + (x.tail_bound if isinstance(x, TruncatedSeries) else 0.0)
    return obj


def cmd_inner_check(args, cfg):
    x = load_value(args.input)
    verdict, defect = factor.is_inner(x, cfg.tol)
    allowance = factor._tail_allowance(x)
    return report(defect, (defect, defect + allowance), True, coerce_poly(x).degree,
                  verdict=verdict, defect=defect, tail_allowance=allowance)


def cmd_outer_check(args, cfg):
    psi = coerce_poly(load_value(args.input))
    prof = factor.outer_profile(psi, cfg.degree, cfg.cap)
    verdict = factor.outer_verdict(prof, args.outer_tol)
    return report(prof[-1], (0.0, prof[-1]), True, cfg.degree, profile=prof, verdict=verdict)


def cmd_factor(args, cfg):
    psi = coerce_poly(load_value(args.input))
    res = factor.inner_outer(psi, cfg.degree, cfg.cap)
    obj = res.to_json_obj()
    obj["inner_defect"] = factor.inner_defect(res.inner_part)
    return obj


def cmd_invert(args, cfg):
    phi = coerce_poly(load_value(args.input))
    inv = factor.formal_inverse(phi, cfg.degree, cfg.cap)
    rep = factor.invertibility_report(phi, cfg.degree, tol=args.outer_tol, cap=cfg.cap)
    return {"inverse": inv.to_json_obj(), "report": rep.to_json_obj()}


def cmd_divide(args, cfg):
    num = load_value(args.input)
    den = load_value(args.divisor)
    try:
        q = factor.inner_divide(num, den, cfg.degree, tol=max(cfg.tol, 1e-8))
    except NotDivisibleError as exc:
        return {"divisible": False, "message": str(exc)}
    return {"divisible": True, "quotient": q.to_json_obj()}


def _generator_list(obj) -> list:
    if isinstance(obj, dict) and "generators" in obj:
        obj = obj["generators"]
    if not isinstance(obj, list):
        raise PreconditionError('expected a list of polynomials or {"generators": [...]}')
    return [coerce_poly(value_from_obj(o)) for o in obj]


def cmd_wandering(args, cfg):
    gens = _generator_list(load_json(args.input))
    wb = factor.wandering_basis(gens, cfg.degree, cfg.cap)
    return {"generators": [g.to_json_obj() for g in wb.generators], "dim": wb.dim,
            "gram_defect": wb.gram_defect, "degree": wb.trunc_degree,
            "inner_defects": [factor.inner_defect(g.flip()) for g in wb.generators]}


def cmd_mobius(args, cfg):
    return catalog.mobius(args.n, parse_word(args.word), parse_complex(args.mu), cfg.degree).to_json_obj()


def _lambda(args) -> codim1.Lambda:
    return codim1.Lambda.parse(args.lam)


def cmd_zlambda(args, cfg):
    return codim1.z_lambda(_lambda(args), cfg.degree).to_json_obj()


def cmd_abelianize(args, cfg):
    psi = coerce_poly(load_value(args.input))
    ab = codim1.abelianize(psi)
    return {"n": psi.n, "terms": [{"multidegree": list(k), "re": v.real, "im": v.imag}
                                  for k, v in sorted(ab.items())]}


def cmd_ideal_check(args, cfg):
    psi = coerce_poly(load_value(args.input))
    ab = codim1.abelianize(psi)
    worst = max((abs(v) for v in ab.values()), default=0.0)
    return report(worst, (worst, worst), True, psi.degree, verdict=codim1.in_commutator_ideal(psi))


def cmd_project(args, cfg):
    x = load_value(args.input)
    fn = codim1.q_lambda if args.which == "q" else codim1.p_lambda
    return fn(x, _lambda(args), cfg.degree).to_json_obj()


def cmd_wandering_lambda(args, cfg):
    lam = _lambda(args)
    out = []
    for phi in codim1.wandering_lambda(lam, cfg.degree):
        obj = phi.to_json_obj()
        obj["inner_defect"] = factor.inner_defect(phi)
        out.append(obj)
    return {"lambda": lam.to_json_obj(), "functions": out}


def cmd_mlambda_contains(args, cfg):
    x = load_value(args.input)
    lam = _lambda(args)
    val, unc = codim1.m_lambda_pairing(x, lam)
    return report(abs(val), (max(abs(val) - unc, 0.0), abs(val) + unc), True, coerce_poly(x).degree,
                  verdict=codim1.m_lambda_contains(x, lam), pairing=[val.real, val.imag])


def cmd_vn_test(args, cfg):
    p = coerce_poly(load_value(args.input))
    rep = vncheck.vn_check(p, args.samples, parse_ints(args.dims), cfg.seed,
                           section_degree=min(cfg.degree, args.section_degree))
    return rep.to_json_obj()


def cmd_catalog(args, cfg):
    kind = args.kind
    if kind == "monomial":
        return catalog.monomial(args.n, parse_word(args.word)).to_json_obj()
    if kind == "mobius":
        return catalog.mobius(args.n, parse_word(args.word), parse_complex(args.mu), cfg.degree).to_json_obj()
    if kind == "h-series":
        return catalog.h_series(args.n, parse_word(args.word), parse_complex(args.mu), cfg.degree).to_json_obj()
    if kind == "inherited":
        coeffs = [parse_complex(c) for c in args.coeffs.split(",")]
        return catalog.inherited(args.n, parse_word(args.word), coeffs, cfg.degree).to_json_obj()
    if kind in ("homogeneous", "distinct-first-letter"):
        obj = load_json(args.input)
        if not isinstance(obj, dict) or "n" not in obj or "terms" not in obj:
            raise PreconditionError('expected {"n": ..., "terms": [...]}')
        poly = FreePoly.from_json_obj(obj)
        if kind == "homogeneous":
            return catalog.homogeneous(poly.n, dict(poly.items())).to_json_obj()
        return catalog.distinct_first_letter(poly.n, poly.items()).to_json_obj()
    x = coerce_poly(load_value(args.input))
    if kind == "right-letter":
        return catalog.right_letter_inner(x, args.letter).to_json_obj()
    if kind == "exp":
        return catalog.exp_series(x, tol=cfg.tol).to_json_obj()
    if kind == "geometric-inverse":
        return catalog.geometric_inverse(x, cfg.degree).to_json_obj()
    raise PreconditionError(f"unknown catalog kind {kind!r}")


CATALOG_KINDS = ("monomial", "homogeneous", "distinct-first-letter", "right-letter", "inherited",
                 "mobius", "h-series", "exp", "geometric-inverse")


# -- parser -------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", "-i", default="-", help="JSON file, or - for stdin (default)")
    p.add_argument("--degree", "-N", type=int, default=Config.degree, help="truncation degree (default 12)")
    p.add_argument("--tol", type=float, default=Config.tol, help="tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--cap", type=int, default=Config.cap, help="column cap for sections")
    p.add_argument("--format", choices=["json"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freefock", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="multiplier-norm estimate from finite sections")
    _common(p)
    p.add_argument("--norm-tol", type=float, default=1e-6, help="stop when successive sections differ by less")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("inner-check", help="test whether left multiplication is isometric")
    _common(p)
    p.set_defaults(func=cmd_inner_check)

    p = sub.add_parser("outer-check", help="distance profile from e_0 to psi (x) polynomials")
    _common(p)
    p.add_argument("--outer-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_outer_check)

    p = sub.add_parser("factor", help="inner-outer factorization")
    _common(p)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("invert", help="formal inverse and invertibility diagnostics")
    _common(p)
    p.add_argument("--outer-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("divide", help="divide one inner function by another")
    _common(p)
    p.add_argument("--divisor", required=True, help="JSON file with the divisor")
    p.set_defaults(func=cmd_divide)

    p = sub.add_parser("wandering", help="wandering-subspace basis of a generated invariant subspace")
    _common(p)
    p.set_defaults(func=cmd_wandering)

    p = sub.add_parser("mobius", help="Mobius-type inner series in e_f")
    _common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True, help="alphabet size")
    p.add_argument("--word", required=True, help="comma-separated letters, e.g. 1,2")
    p.add_argument("--mu", required=True, help="complex number with |mu| < 1")
    p.set_defaults(func=cmd_mobius)

    for name, func, help_ in (("zlambda", cmd_zlambda, "truncated eigenvector z_lambda"),
                              ("wandering-lambda", cmd_wandering_lambda, "wandering family of M_lambda")):
        p = sub.add_parser(name, help=help_)
        _common(p, needs_input=False)
        p.add_argument("--lambda", dest="lam", required=True, help="comma-separated entries, e.g. 0.5,0.2j")
        p.set_defaults(func=func)

    p = sub.add_parser("abelianize", help="collapse words to multidegrees")
    _common(p)
    p.set_defaults(func=cmd_abelianize)

    p = sub.add_parser("ideal-check", help="membership in the commutator ideal")
    _common(p)
    p.set_defaults(func=cmd_ideal_check)

    p = sub.add_parser("project", help="apply the projection Q_lambda or P_lambda")
    _common(p)
    p.add_argument("--which", choices=["q", "p"], required=True)
    p.add_argument("--lambda", dest="lam", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("mlambda-contains", help="does psi generate a subspace of M_lambda")
    _common(p)
    p.add_argument("--lambda", dest="lam", required=True)
    p.set_defaults(func=cmd_mlambda_contains)

    p = sub.add_parser("vn-test", help="sample row contractions and compare ||p(T)|| with bounds")
    _common(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--dims", default="2,4,8")
    p.add_argument("--section-degree", type=int, default=6)
    p.set_defaults(func=cmd_vn_test)

    p = sub.add_parser("catalog", help="construct a standard example")
    _common(p)
    p.add_argument("kind", choices=CATALOG_KINDS)
    p.add_argument("--n", type=int, default=2, help="alphabet size")
    p.add_argument("--word", default="1")
    p.add_argument("--mu", default="0.5")
    p.add_argument("--coeffs", default="1,1", help="Taylor coefficients for inherited")
    p.add_argument("--letter", type=int, default=2)
    p.set_defaults(func=cmd_catalog)
    return parser


def _clean(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_PRECONDITION if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=stderr)
    try:
        cfg = Config(args.degree, args.tol, args.cap, args.seed)
        result = args.func(args, cfg)
    except ResourceError as exc:
        print(f"freefock: resource cap: {exc}", file=stderr)
        return EXIT_RESOURCE
    except (PreconditionError, ValueError, TypeError) as exc:
        print(f"freefock: {exc}", file=stderr)
        return EXIT_PRECONDITION
    json.dump(_clean(result), stdout)
    stdout.write("\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
