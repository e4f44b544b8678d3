"""Exact symbolic scalars: the coefficient substrate for all forms.

Expressions are sympy trees restricted to rational constants, named
variables, sums, products, quotients, integer powers, and the elementary
functions sin, cos, exp, log.  No floats ever enter a tree; equality
questions reduce to a deterministic canonical form plus rational probing.
"""

from __future__ import annotations

import random
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import sympy as sp
from sympy.printing import sstr

from .errors import EvaluationError, UnsupportedExpressionError

Expr = sp.Expr
ExprLike = Union[sp.Expr, int, str, Fraction]

ALLOWED_FUNCTIONS = (sp.sin, sp.cos, sp.exp, sp.log)

#: Probe points are rationals in [-PROBE_RANGE, PROBE_RANGE] with
#: denominators up to PROBE_MAX_DENOMINATOR, drawn from a seeded RNG so
#: every run of a zero test sees the same points.
DEFAULT_PROBE_SEED = 0
PROBE_POINTS = 8
PROBE_RANGE = 3
PROBE_MAX_DENOMINATOR = 7

_FLOAT_NONZERO_TOL = 1e-9
_FLOAT_NOISE_TOL = 1e-15
_RESAMPLE_LIMIT = 40

_BAD_VALUES = (sp.zoo, sp.nan, sp.oo, -sp.oo)


class ZeroStatus(Enum):
    """Three-valued verdict of a symbolic zero test."""

    ZERO = "zero"
    NONZERO = "nonzero"
    PROBABLY_NONZERO = "probably-nonzero"


def variable(name: str) -> Expr:
    return sp.Symbol(name)


def as_expr(value: ExprLike) -> Expr:
    """Coerce strings/ints/Fractions into a validated expression.

    Strings go through sympy's parser with ``^`` meaning power and decimal
    literals rationalized; the DSL parser in :mod:`formcalc.dsl` is the
    strict front end with positioned errors.
    """
    if isinstance(value, Fraction):
        e = sp.Rational(value.numerator, value.denominator)
    elif isinstance(value, str):
        e = sp.sympify(value, rational=True, convert_xor=True)
    else:
        e = sp.sympify(value, rational=True)
    validate_expr(e)
    return e


@lru_cache(maxsize=16384)
def _validate(e: sp.Basic) -> None:
    if isinstance(e, sp.Rational):  # Integer is a Rational
        return
    if e is sp.E:  # produced by exp(1); accepted as a constant
        return
    if isinstance(e, sp.Symbol):
        return
    if isinstance(e, (sp.Add, sp.Mul)):
        for arg in e.args:
            _validate(arg)
        return
    if isinstance(e, sp.Pow):
        if not e.exp.is_Integer:
            raise UnsupportedExpressionError(
                f"only integer powers are supported, got exponent {e.exp}"
            )
        _validate(e.base)
        return
    if isinstance(e, ALLOWED_FUNCTIONS):
        _validate(e.args[0])
        return
    if isinstance(e, sp.Float):
        raise UnsupportedExpressionError(
            f"float constant {e} is not allowed; use an exact rational"
        )
    raise UnsupportedExpressionError(
        f"unsupported node {type(e).__name__} in {e}"
    )


def validate_expr(e: Expr) -> Expr:
    """Raise UnsupportedExpressionError unless ``e`` is in the supported class."""
    _validate(sp.sympify(e))
    return sp.sympify(e)


def _pythagorean_collapse(e: Expr) -> Expr:
    # sin(u)**2 -> 1 - cos(u)**2 for every sine argument, then cancel.
    out = e
    for s in sorted(e.atoms(sp.sin), key=sp.default_sort_key):
        out = out.subs(s**2, 1 - sp.cos(s.args[0]) ** 2)
    return out


def simplify_expr(e: ExprLike) -> Expr:
    """Deterministic canonical form.

    Pipeline: sympy's automatic flatten/sort of commutative operands and
    constant folding, rational-function cancellation, and a Pythagorean
    rewrite candidate (kept only when it shortens the expression).  The
    same mathematical tree always lands on the same canonical tree.
    """
    e = sp.sympify(e, rational=True)
    base = sp.cancel(e)
    candidates = [base]
    if base.atoms(sp.sin):
        candidates.append(sp.cancel(_pythagorean_collapse(base)))
    return min(candidates, key=lambda c: (sp.count_ops(c), sp.default_sort_key(c)))


def differentiate(e: ExprLike, v: str) -> Expr:
    """Partial derivative with respect to the variable named ``v``, simplified."""
    e = validate_expr(sp.sympify(e, rational=True))
    return simplify_expr(sp.diff(e, sp.Symbol(v)))


def substitute(e: ExprLike, bindings: Mapping[str, ExprLike]) -> Expr:
    """Simultaneous substitution of variables by expressions, then simplify."""
    e = validate_expr(sp.sympify(e, rational=True))
    table = {}
    for name, value in bindings.items():
        table[sp.Symbol(name)] = validate_expr(sp.sympify(value, rational=True))
    return simplify_expr(e.xreplace(table))


def _is_rational_tree(e: Expr) -> bool:
    return not e.atoms(sp.Function) and not e.has(sp.E)


def eval_at(e: ExprLike, point: Mapping[str, object]) -> Union[Fraction, float]:
    """Evaluate at a rational point: exact Fraction for function-free trees,
    float otherwise.

    Raises EvaluationError for unbound variables, division by zero at the
    point, or values outside the real domain.
    """
    e = validate_expr(sp.sympify(e, rational=True))
    table = {}
    for name, value in point.items():
        frac = Fraction(value) if not isinstance(value, Fraction) else value
        table[sp.Symbol(name)] = sp.Rational(frac.numerator, frac.denominator)
    missing = sorted(s.name for s in e.free_symbols if s not in table)
    if missing:
        raise EvaluationError(f"unbound variable(s): {', '.join(missing)}")
    val = e.xreplace(table)
    if val.has(*_BAD_VALUES):
        raise EvaluationError("division by zero (or pole) at evaluation point")
    if val.is_Rational:
        return Fraction(int(val.p), int(val.q))
    approx = val.evalf(20)
    if approx.has(*_BAD_VALUES):
        raise EvaluationError("division by zero (or pole) at evaluation point")
    if not approx.is_real:
        raise EvaluationError(f"non-real value {approx} at evaluation point")
    return float(approx)


def random_rational(rng: random.Random) -> Fraction:
    den = rng.randint(1, PROBE_MAX_DENOMINATOR)
    num = rng.randint(-PROBE_RANGE * den, PROBE_RANGE * den)
    return Fraction(num, den)


def probe_point(names: Iterable[str], rng: random.Random) -> dict[str, Fraction]:
    return {name: random_rational(rng) for name in names}


def is_zero(e: ExprLike, *, seed: int | None = None, points: int = PROBE_POINTS) -> ZeroStatus:
    """Three-valued zero test.

    ZERO iff the canonical form is the literal 0.  Otherwise the expression
    is evaluated at ``points`` seeded random rational points (resampling on
    singularities); any clearly nonzero value gives NONZERO.  If every probe
    vanishes: function-free trees are decided exactly by their canonical
    rational normal form, anything else is PROBABLY_NONZERO.
    """
    e = validate_expr(sp.sympify(e, rational=True))
    s = simplify_expr(e)
    if s == 0:
        return ZeroStatus.ZERO
    rng = random.Random(DEFAULT_PROBE_SEED if seed is None else seed)
    names = sorted(sym.name for sym in s.free_symbols)
    evaluated = 0
    attempts = 0
    while evaluated < points and attempts < points + _RESAMPLE_LIMIT:
        attempts += 1
        try:
            val = eval_at(s, probe_point(names, rng))
        except EvaluationError:
            continue
        evaluated += 1
        if isinstance(val, Fraction):
            if val != 0:
                return ZeroStatus.NONZERO
        elif abs(val) > _FLOAT_NONZERO_TOL:
            return ZeroStatus.NONZERO
        elif abs(val) > _FLOAT_NOISE_TOL:
            # ambiguous magnitude: count the probe but do not call it nonzero
            continue
    if _is_rational_tree(s):
        # canonical form is a nonzero rational function, hence a nonzero
        # function of its variables: the probes were simply unlucky
        return ZeroStatus.NONZERO
    return ZeroStatus.PROBABLY_NONZERO


def expr_text(e: ExprLike) -> str:
    """Canonical text of an expression in the DSL grammar (``^`` for powers)."""
    return sstr(sp.sympify(e, rational=True)).replace("**", "^")


def free_variables(e: ExprLike) -> tuple[str, ...]:
    return tuple(sorted(s.name for s in sp.sympify(e).free_symbols))
