"""Condition numbers of atomic operations and the scenarios that blow them up.

For a unary op ``f`` the condition number is ``|x f'(x) / f(x)|``.  Binary
ops get one condition per operand (``|a/(a+b)|`` and ``|b/(a+b)|`` for an
addition) and the reported value is the larger of the two.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .exceptions import InvalidRecord
from .trace import ExecutionTrace, OpKind, TraceRecord

log = logging.getLogger(__name__)

INF = math.inf


def _ratio(num: float, den: float) -> float:
    """|num/den| with 0/0 -> 0 and nonzero/0 -> inf."""
    num, den = abs(num), abs(den)
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return INF
    if math.isinf(den):
        return 0.0 if math.isfinite(num) else math.nan
    return num / den


def _at_zero(value_at_zero):
    """Wrap a unary formula so x == 0 returns its limit instead of 0/0."""

    def deco(fn):
        def wrapped(x, r):
            if x == 0.0:
                return value_at_zero
            return fn(x, r)

        return wrapped

    return deco


@_at_zero(1.0)
def _sin(x, r):
    return _ratio(x * math.cos(x), r)


def _cos(x, r):
    return _ratio(x * math.sin(x), r)


@_at_zero(1.0)
def _tan(x, r):
    if r == 0.0:
        return INF
    # x (1 + r^2) / r written to avoid overflowing r^2
    return abs(x) * abs(1.0 / r + r)


@_at_zero(1.0)
def _asin(x, r):
    return _ratio(x, math.sqrt((1.0 - x) * (1.0 + x)) * r)


def _acos(x, r):
    return _ratio(x, math.sqrt((1.0 - x) * (1.0 + x)) * r)


@_at_zero(1.0)
def _atan(x, r):
    return _ratio(x, (1.0 + x * x) * r)


def _exp(x, r):
    return abs(x)


def _log(x, r):
    return _ratio(1.0, r)


def _sqrt(x, r):
    return 0.5


@_at_zero(1.0)
def _sinh(x, r):
    return _ratio(x, math.tanh(x))


def _cosh(x, r):
    return abs(x * math.tanh(x))


@_at_zero(1.0)
def _tanh(x, r):
    return _ratio(x * ((1.0 - r) * (1.0 + r)), r)


_UNARY = {
    OpKind.SIN: _sin,
    OpKind.COS: _cos,
    OpKind.TAN: _tan,
    OpKind.ASIN: _asin,
    OpKind.ACOS: _acos,
    OpKind.ATAN: _atan,
    OpKind.EXP: _exp,
    OpKind.LOG: _log,
    OpKind.SQRT: _sqrt,
    OpKind.SINH: _sinh,
    OpKind.COSH: _cosh,
    OpKind.TANH: _tanh,
}

FORMULA_TEXT = {
    OpKind.ADD: "max(|a|, |b|) / |a + b|",
    OpKind.SUB: "max(|a|, |b|) / |a - b|",
    OpKind.MUL: "1",
    OpKind.DIV: "1",
    OpKind.POW: "max(|b|, |b ln a|)",
    OpKind.SIN: "|x cos(x) / sin(x)|",
    OpKind.COS: "|x tan(x)|",
    OpKind.TAN: "|x (1 + tan(x)^2) / tan(x)|",
    OpKind.ASIN: "|x / (sqrt(1 - x^2) asin(x))|",
    OpKind.ACOS: "|x / (sqrt(1 - x^2) acos(x))|",
    OpKind.ATAN: "|x / ((1 + x^2) atan(x))|",
    OpKind.EXP: "|x|",
    OpKind.LOG: "|1 / log(x)|",
    OpKind.SQRT: "1/2",
    OpKind.SINH: "|x / tanh(x)|",
    OpKind.COSH: "|x tanh(x)|",
    OpKind.TANH: "|x (1 - tanh(x)^2) / tanh(x)|",
}


def operand_conditions(op: OpKind, operands: Sequence[float], result: float) -> tuple:
    """Condition number of ``result`` with respect to each operand."""
    if op in (OpKind.ADD, OpKind.SUB):
        a, b = operands
        return _ratio(a, result), _ratio(b, result)
    if op in (OpKind.MUL, OpKind.DIV):
        return 1.0, 1.0
    if op is OpKind.POW:
        a, b = operands
        wrt_b = 0.0 if a == 0.0 else abs(b * math.log(abs(a)))
        return abs(b), wrt_b
    (x,) = operands
    return (_UNARY[op](x, result),)


@dataclass(frozen=True)
class ConditionFormula:
    op: OpKind

    @property
    def text(self) -> str:
        return FORMULA_TEXT[self.op]

    def evaluate(self, operands: Sequence[float], result: float) -> float:
        return max(operand_conditions(self.op, operands, result))


def condition_number(record: TraceRecord) -> float:
    if any(not math.isfinite(v) for v in record.operands) or math.isnan(record.result):
        raise InvalidRecord(f"non-finite operands in {record}")
    return ConditionFormula(record.op).evaluate(record.operands, record.result)


# ---------------------------------------------------------------------------
# danger specs

FIXED = "fixed"
INFINITY = "infinity"


@dataclass(frozen=True)
class DangerSpec:
    """When ``op``'s result tends to ``value`` (kind fixed) or to +-inf, its
    condition number grows without bound."""

    op: OpKind
    kind: str = FIXED
    value: float = 0.0

    def __str__(self):
        if self.kind == INFINITY:
            return f"{self.op.value}->inf"
        return f"{self.op.value}->{self.value!r}"


class DangerCatalog:
    """Op -> danger specs table.

    ``include_overflow`` adds Infinity targets for exp/sinh/cosh, which are
    range rather than rounding hazards and are off by default.
    """

    def __init__(self, include_overflow: bool = False):
        fixed0 = lambda op: DangerSpec(op, FIXED, 0.0)  # noqa: E731
        table = {op: [] for op in OpKind}
        for op in (OpKind.ADD, OpKind.SUB, OpKind.SIN, OpKind.COS, OpKind.TAN, OpKind.LOG):
            table[op].append(fixed0(op))
        table[OpKind.TAN].append(DangerSpec(OpKind.TAN, INFINITY))
        if include_overflow:
            for op in (OpKind.EXP, OpKind.SINH, OpKind.COSH):
                table[op].append(DangerSpec(op, INFINITY))
        self.include_overflow = include_overflow
        self._table = {op: tuple(specs) for op, specs in table.items()}

    def danger_specs(self, op: OpKind) -> list:
        return list(self._table[OpKind(op)])

    def rows(self):
        for op in OpKind:
            yield op, self._table[op], FORMULA_TEXT[op]


DEFAULT_CATALOG = DangerCatalog()


def danger_specs(op: OpKind, catalog: DangerCatalog = DEFAULT_CATALOG) -> list:
    return catalog.danger_specs(op)


def flag_dangerous_sites(trace: ExecutionTrace, threshold: float = 1e5) -> list:
    """Sites whose condition number exceeds ``threshold``, in trace order."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    flagged, skipped = [], 0
    for rec in trace.records:
        try:
            gamma = condition_number(rec)
        except InvalidRecord:
            skipped += 1
            continue
        if gamma > threshold:
            flagged.append((rec.site, gamma))
    if skipped:
        log.warning("skipped %d non-finite records", skipped)
    return flagged
