"""Arbitrary-precision re-evaluation of corpus functions.

Inputs are lifted exactly from their double values.  Constants written in a
corpus definition are lifted from their shortest round-trip decimal, so the
``0.4`` in ``sin(x) - 0.4`` means four tenths, not the nearest double.

A fixed working precision is not enough near deep cancellation: at
``x = 1e-120`` the expression ``exp(x) - 1 - x`` needs about 800 bits before
``exp(x)`` even differs from 1.  Two guards handle this.  The working
precision starts at ``precision_bits`` plus twice the largest binary exponent
among the inputs, which covers cancellation of second-order terms such as
``x**2 / 2`` against 1.  The evaluation is then repeated with the precision
doubled until two consecutive results agree to half of ``precision_bits``
(or ``max_bits`` is reached).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import mpmath

from .exceptions import DomainError, OracleDomainError
from .trace import CorpusFunction, OpKind, execute, evaluate_plain

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleConfig:
    precision_bits: int = 256  # starting precision
    adaptive: bool = True
    max_bits: int = 16384

    def __post_init__(self):
        if self.precision_bits < 128:
            raise ValueError("precision_bits must be at least 128")
        if self.max_bits < self.precision_bits:
            raise ValueError("max_bits must be >= precision_bits")


class MpBackend:
    def __init__(self, precision_bits: int):
        # private context: never share a mutable precision setting
        self.ctx = mpmath.MPContext()
        self.ctx.prec = precision_bits
        c = self.ctx
        self._impl = {
            OpKind.ADD: lambda a, b: a + b,
            OpKind.SUB: lambda a, b: a - b,
            OpKind.MUL: lambda a, b: a * b,
            OpKind.DIV: self._div,
            OpKind.SIN: c.sin,
            OpKind.COS: c.cos,
            OpKind.TAN: c.tan,
            OpKind.ASIN: self._bounded(c.asin, "asin"),
            OpKind.ACOS: self._bounded(c.acos, "acos"),
            OpKind.ATAN: c.atan,
            OpKind.EXP: c.exp,
            OpKind.LOG: self._nonneg(c.log, "log"),
            OpKind.SQRT: self._nonneg(c.sqrt, "sqrt"),
            OpKind.SINH: c.sinh,
            OpKind.COSH: c.cosh,
            OpKind.TANH: c.tanh,
            OpKind.POW: self._pow,
        }

    def lift_input(self, v):
        return self.ctx.mpf(float(v))

    def lift_const(self, c):
        return self.ctx.mpf(repr(c))

    def apply(self, op, operands):
        return self._impl[op](*operands)

    @staticmethod
    def _div(a, b):
        if b == 0:
            raise DomainError("division by zero")
        return a / b

    @staticmethod
    def _bounded(fn, name):
        def wrapped(x):
            if not -1 <= x <= 1:
                raise DomainError(f"{name} argument outside [-1, 1]")
            return fn(x)

        return wrapped

    @staticmethod
    def _nonneg(fn, name):
        def wrapped(x):
            if x < 0:
                raise DomainError(f"{name} of a negative number")
            return fn(x)

        return wrapped

    def _pow(self, a, b):
        if a < 0 and not self.ctx.isint(b):
            raise DomainError("negative base with non-integer exponent")
        if a == 0 and b < 0:
            raise DomainError("zero to a negative power")
        return self.ctx.power(a, b)


def evaluate_high_precision(f: CorpusFunction, inputs, cfg: OracleConfig = OracleConfig()):
    """Return f(inputs) as an mpf, at ``cfg.precision_bits`` or more."""
    bits = start_bits(inputs, cfg)
    prev = _evaluate_at(f, inputs, bits)
    if not cfg.adaptive:
        return prev
    limit = max(cfg.max_bits, 2 * bits)  # always at least one confirming pass
    while bits < limit:
        bits *= 2
        cur = _evaluate_at(f, inputs, bits)
        if _agree(prev, cur, cfg.precision_bits // 2):
            return cur
        prev = cur
    log.warning("%s at %r: oracle not stable at %d bits", f.id, tuple(inputs), bits)
    return prev


def start_bits(inputs, cfg: OracleConfig) -> int:
    if not cfg.adaptive:
        return cfg.precision_bits
    span = max((abs(math.frexp(v)[1] - 1) for v in inputs if math.isfinite(v) and v != 0.0), default=0)
    bits = cfg.precision_bits + 2 * span
    return -(-bits // 64) * 64


def _evaluate_at(f, inputs, bits):
    try:
        return execute(f, inputs, MpBackend(bits))[0]
    except DomainError as exc:
        raise OracleDomainError(f"{f.id}: {exc}") from None


def _agree(a, b, bits) -> bool:
    ctx = b.context
    a = ctx.mpf(a)
    if a == b:
        return True
    if not (ctx.isfinite(a) and ctx.isfinite(b)):
        return bool(ctx.isnan(a) and ctx.isnan(b))
    return abs(a - b) <= ctx.ldexp(abs(b), -bits)


def relative_error(approx: float, reference) -> float:
    """|approx - ref| / |ref|, falling back to absolute error when ref == 0."""
    if math.isnan(approx):
        return math.nan
    ctx = reference.context if hasattr(reference, "context") else mpmath.mp
    if math.isinf(approx):
        return math.inf
    diff = abs(ctx.mpf(approx) - reference)
    if reference == 0:
        return float(diff)
    return float(diff / abs(reference))


def oracle_relative_error(f: CorpusFunction, inputs, cfg: OracleConfig = OracleConfig()) -> float:
    """Relative error of the double evaluation against the high-precision one."""
    hp = evaluate_high_precision(f, inputs, cfg)
    return relative_error(evaluate_plain(f, inputs), hp)


def format_decimal(value, digits: int = 40) -> str:
    return mpmath.nstr(value, digits)
