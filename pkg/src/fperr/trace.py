"""Shadow execution of corpus functions.

A corpus function is written once as ordinary Python over the symbolic
numeric interface exported here (``sin``, ``log``, operators, ...).  Calling
it with placeholder inputs captures a straight-line operation graph whose
nodes are numbered in definition order; those numbers are the static site
labels.  The graph is then interpreted by a backend: IEEE double (plain,
traced or perturbed) or arbitrary precision (see :mod:`fperr.oracle`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence

from .exceptions import DomainError


class OpKind(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    SIN = "sin"
    COS = "cos"
    TAN = "tan"
    ASIN = "asin"
    ACOS = "acos"
    ATAN = "atan"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"
    SINH = "sinh"
    COSH = "cosh"
    TANH = "tanh"
    POW = "pow"

    def __str__(self):
        return self.value

    @property
    def arity(self) -> int:
        return 2 if self in BINARY_OPS else 1


BINARY_OPS = frozenset({OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.DIV, OpKind.POW})
UNARY_OPS = frozenset(OpKind) - BINARY_OPS


@dataclass(frozen=True, order=True)
class SiteId:
    function_id: str
    op_index: int

    def __str__(self):
        return f"{self.function_id}#{self.op_index}"


@dataclass(frozen=True)
class TraceRecord:
    site: SiteId
    op: OpKind
    operands: tuple
    result: float


@dataclass(frozen=True)
class ExecutionTrace:
    records: tuple = ()
    final_result: float = math.nan

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def record_at(self, site: SiteId) -> TraceRecord | None:
        for rec in self.records:
            if rec.site == site:
                return rec
        return None


# ---------------------------------------------------------------------------
# graph capture

INPUT, CONST, NODE = 0, 1, 2


class Node(NamedTuple):
    index: int
    op: OpKind
    args: tuple  # of (kind, payload) references


class _Capture:
    def __init__(self):
        self.nodes: list[Node] = []

    def emit(self, op, args):
        refs = tuple(_ref(a, self) for a in args)
        node = Node(len(self.nodes), op, refs)
        self.nodes.append(node)
        return Sym(self, (NODE, node.index))


def _ref(value, capture):
    if isinstance(value, Sym):
        if value._capture is not capture:
            raise ValueError("symbolic values from different captures cannot be mixed")
        return value._ref
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"unsupported constant {value!r}")
    return (CONST, float(value))


class Sym:
    """Placeholder value seen by a corpus function while its graph is captured."""

    __slots__ = ("_capture", "_ref")

    def __init__(self, capture, ref):
        self._capture = capture
        self._ref = ref

    def __add__(self, other):
        return self._capture.emit(OpKind.ADD, (self, other))

    def __radd__(self, other):
        return self._capture.emit(OpKind.ADD, (other, self))

    def __sub__(self, other):
        return self._capture.emit(OpKind.SUB, (self, other))

    def __rsub__(self, other):
        return self._capture.emit(OpKind.SUB, (other, self))

    def __mul__(self, other):
        return self._capture.emit(OpKind.MUL, (self, other))

    def __rmul__(self, other):
        return self._capture.emit(OpKind.MUL, (other, self))

    def __truediv__(self, other):
        return self._capture.emit(OpKind.DIV, (self, other))

    def __rtruediv__(self, other):
        return self._capture.emit(OpKind.DIV, (other, self))

    def __neg__(self):
        # sign flip is exact; expressed as a benign multiplication
        return self._capture.emit(OpKind.MUL, (-1.0, self))

    def __pow__(self, exponent):
        # constant positive integer powers are lowered to x*x*...*x
        if isinstance(exponent, int) and not isinstance(exponent, bool) and exponent >= 1:
            acc = self
            for _ in range(exponent - 1):
                acc = acc * self
            return acc
        return self._capture.emit(OpKind.POW, (self, exponent))

    def __rpow__(self, base):
        return self._capture.emit(OpKind.POW, (base, self))

    def __bool__(self):
        raise TypeError("corpus functions must be straight-line: no branching on values")

    def __repr__(self):
        return f"Sym{self._ref}"


def _unary(op, fallback):
    def fn(x):
        if isinstance(x, Sym):
            return x._capture.emit(op, (x,))
        return fallback(float(x))

    fn.__name__ = op.value
    fn.__doc__ = f"Traced {op.value}; constant arguments are folded."
    return fn


sin = _unary(OpKind.SIN, math.sin)
cos = _unary(OpKind.COS, math.cos)
tan = _unary(OpKind.TAN, math.tan)
asin = _unary(OpKind.ASIN, math.asin)
acos = _unary(OpKind.ACOS, math.acos)
atan = _unary(OpKind.ATAN, math.atan)
exp = _unary(OpKind.EXP, math.exp)
log = _unary(OpKind.LOG, math.log)
sqrt = _unary(OpKind.SQRT, math.sqrt)
sinh = _unary(OpKind.SINH, math.sinh)
cosh = _unary(OpKind.COSH, math.cosh)
tanh = _unary(OpKind.TANH, math.tanh)


def power(base, exponent):
    """General ``base ** exponent`` kept as a single atomic op."""
    for v in (base, exponent):
        if isinstance(v, Sym):
            return v._capture.emit(OpKind.POW, (base, exponent))
    return math.pow(base, exponent)


# ---------------------------------------------------------------------------
# corpus functions


@dataclass(frozen=True)
class CorpusFunction:
    id: str
    arity: int
    domain: tuple  # ((lo, hi), ...) closed bounds per input
    evaluator: Callable = field(compare=False, repr=False)
    description: str = ""
    nodes: tuple = field(init=False, compare=False, repr=False)
    output: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be positive")
        if len(self.domain) != self.arity:
            raise ValueError("domain must give one interval per input")
        cap = _Capture()
        out = self.evaluator(*[Sym(cap, (INPUT, i)) for i in range(self.arity)])
        object.__setattr__(self, "nodes", tuple(cap.nodes))
        object.__setattr__(self, "output", _ref(out, cap))

    def in_domain(self, inputs: Sequence[float]) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(inputs, self.domain))

    def site(self, index: int) -> SiteId:
        return SiteId(self.id, index)


# ---------------------------------------------------------------------------
# IEEE double backend


def _div(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _overflow_safe(fn):
    def wrapped(x):
        try:
            return fn(x)
        except OverflowError:
            return math.copysign(math.inf, x) if fn is math.sinh else math.inf

    return wrapped


def _pow(a, b):
    try:
        return math.pow(a, b)
    except OverflowError:
        if a < 0 and float(b).is_integer() and int(b) % 2 == 1:
            return -math.inf
        return math.inf
    except ValueError:
        if a == 0.0 and b < 0:
            if float(b).is_integer() and int(b) % 2 == 1:
                return math.copysign(math.inf, a)
            return math.inf
        raise DomainError(f"pow({a!r}, {b!r}) is not real")


def _checked(fn, ok, name):
    def wrapped(x):
        if not math.isfinite(x):
            if math.isnan(x):
                return math.nan
            try:
                return fn(x)
            except ValueError:
                return math.nan
        if not ok(x):
            raise DomainError(f"{name}({x!r}) outside the real domain")
        return fn(x)

    return wrapped


def _log(x):
    if x == 0.0:
        return -math.inf
    return math.log(x)


FLOAT_IMPL = {
    OpKind.ADD: lambda a, b: a + b,
    OpKind.SUB: lambda a, b: a - b,
    OpKind.MUL: lambda a, b: a * b,
    OpKind.DIV: _div,
    OpKind.SIN: _checked(math.sin, lambda x: True, "sin"),
    OpKind.COS: _checked(math.cos, lambda x: True, "cos"),
    OpKind.TAN: _checked(math.tan, lambda x: True, "tan"),
    OpKind.ASIN: _checked(math.asin, lambda x: -1.0 <= x <= 1.0, "asin"),
    OpKind.ACOS: _checked(math.acos, lambda x: -1.0 <= x <= 1.0, "acos"),
    OpKind.ATAN: _checked(math.atan, lambda x: True, "atan"),
    OpKind.EXP: _overflow_safe(math.exp),
    OpKind.LOG: _checked(_log, lambda x: x >= 0.0, "log"),
    OpKind.SQRT: _checked(math.sqrt, lambda x: x >= 0.0, "sqrt"),
    OpKind.SINH: _overflow_safe(math.sinh),
    OpKind.COSH: _overflow_safe(math.cosh),
    OpKind.TANH: math.tanh,
    OpKind.POW: _pow,
}


def apply_double(op: OpKind, operands: Sequence[float]) -> float:
    """Evaluate one atomic op in IEEE double, round-to-nearest."""
    return FLOAT_IMPL[op](*operands)


class FloatBackend:
    """Double-precision interpretation; inputs and constants are used as-is."""

    def lift_input(self, v):
        return float(v)

    def lift_const(self, c):
        return c

    def apply(self, op, operands):
        return FLOAT_IMPL[op](*operands)


DOUBLE = FloatBackend()


def execute(f: CorpusFunction, inputs, backend=DOUBLE, *, record=False, inject=None, adjust=None):
    """Interpret ``f``'s graph.

    ``inject`` optionally maps ``(node, operands) -> operands`` before each
    node is evaluated and ``adjust`` maps ``(node, result) -> result`` after.
    Returns ``(result, records)``; ``records`` is None unless ``record`` is set.
    """
    if len(inputs) != f.arity:
        raise ValueError(f"{f.id} takes {f.arity} inputs, got {len(inputs)}")
    lifted = [backend.lift_input(v) for v in inputs]
    values = []
    records = [] if record else None
    fid = f.id

    def resolve(ref):
        kind, payload = ref
        if kind == NODE:
            return values[payload]
        if kind == INPUT:
            return lifted[payload]
        return backend.lift_const(payload)

    for node in f.nodes:
        operands = [resolve(r) for r in node.args]
        if inject is not None:
            operands = inject(node, operands)
        try:
            result = backend.apply(node.op, operands)
        except DomainError as exc:
            raise DomainError(
                str(exc),
                site=SiteId(fid, node.index),
                op=node.op,
                operands=operands,
                partial_trace=records or (),
            ) from None
        if adjust is not None:
            result = adjust(node, result)
        values.append(result)
        if record:
            records.append(TraceRecord(SiteId(fid, node.index), node.op, tuple(operands), result))
    return resolve(f.output), records


def _check_call(f, inputs, strict_domain):
    if len(inputs) != f.arity:
        raise ValueError(f"{f.id} takes {f.arity} inputs, got {len(inputs)}")
    if strict_domain and not f.in_domain(inputs):
        raise DomainError(f"inputs {list(inputs)!r} outside the declared domain of {f.id}")


def evaluate_plain(f: CorpusFunction, inputs: Sequence[float], *, strict_domain=False) -> float:
    _check_call(f, inputs, strict_domain)
    return execute(f, inputs)[0]


def evaluate_traced(f: CorpusFunction, inputs: Sequence[float], *, strict_domain=False):
    """Evaluate in double while recording every atomic op.

    Returns ``(result, ExecutionTrace)``.  On a domain violation the raised
    :class:`DomainError` carries the records executed so far.
    """
    _check_call(f, inputs, strict_domain)
    result, records = execute(f, inputs, record=True)
    return result, ExecutionTrace(tuple(records), result)


def site_table(f: CorpusFunction) -> list:
    return [(SiteId(f.id, n.index), n.op) for n in f.nodes]


def trace_to_csv(trace: ExecutionTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "op", "operand1", "operand2", "result"])
    for rec in trace.records:
        ops = [repr(v) for v in rec.operands] + [""] * (2 - len(rec.operands))
        w.writerow([rec.site.op_index, rec.op.value, *ops, repr(rec.result)])
    return buf.getvalue()


def trace_from_csv(text: str, function_id: str) -> ExecutionTrace:
    rows = list(csv.DictReader(io.StringIO(text)))
    records = []
    for row in rows:
        operands = [float(row["operand1"])]
        if row["operand2"]:
            operands.append(float(row["operand2"]))
        records.append(
            TraceRecord(SiteId(function_id, int(row["site"])), OpKind(row["op"]),
                        tuple(operands), float(row["result"]))
        )
    final = records[-1].result if records else math.nan
    return ExecutionTrace(tuple(records), final)
