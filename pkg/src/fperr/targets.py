"""Residual equations whose roots make one operation ill-conditioned."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .catalog import DEFAULT_CATALOG, INFINITY, DangerCatalog, DangerSpec
from .exceptions import DomainError
from .trace import CorpusFunction, SiteId, evaluate_traced, execute


@dataclass(frozen=True)
class ResidualTarget:
    function_id: str
    site: SiteId
    spec: DangerSpec

    def __str__(self):
        return f"{self.site} {self.spec}"


@dataclass(frozen=True)
class ResidualEvaluation:
    value: float
    site_executed: bool


def enumerate_targets(f: CorpusFunction, probe, catalog: DangerCatalog = DEFAULT_CATALOG) -> list:
    """One target per (executed site, danger spec), in trace then spec order.

    A domain error part-way through still yields targets for the sites that
    ran before it.
    """
    if len(probe) != f.arity:
        raise ValueError(f"{f.id} takes {f.arity} inputs")
    try:
        _, trace = evaluate_traced(f, probe)
        records = trace.records
    except DomainError as exc:
        records = exc.partial_trace
    out = []
    for rec in records:
        for spec in catalog.danger_specs(rec.op):
            out.append(ResidualTarget(f.id, rec.site, spec))
    return out


def residual_from_result(spec: DangerSpec, result: float) -> float:
    if spec.kind == INFINITY:
        if result == 0.0:
            return math.copysign(math.inf, result)
        return 1.0 / result
    return result - spec.value


def residual(t: ResidualTarget, inputs, f: CorpusFunction | None = None) -> ResidualEvaluation:
    """Re-run the function at ``inputs`` and read the target site's result.

    ``f`` defaults to the corpus function named by ``t.function_id``.
    """
    if f is None:
        from .corpus import get_function

        f = get_function(t.function_id)
    try:
        _, records = execute(f, inputs, record=True)
    except DomainError as exc:
        records = exc.partial_trace
    for rec in records:
        if rec.site == t.site:
            return ResidualEvaluation(residual_from_result(t.spec, rec.result), True)
    return ResidualEvaluation(math.nan, False)


def residual_function(f: CorpusFunction, t: ResidualTarget):
    """Scalar callable ``g(inputs) -> float`` for the solvers (NaN if the site did not run)."""

    def g(*inputs):
        return residual(t, inputs, f).value

    return g
