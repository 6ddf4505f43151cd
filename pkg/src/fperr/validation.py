"""False-positive filtering by perturbation injection, plus oracle checks.

A candidate site is re-run with a relative perturbation ``delta`` injected at
that site.  By default the perturbation goes into the operand the site is
most sensitive to (largest operand-wise condition number, constants
excluded), so the site's result moves by roughly ``condition * delta`` and
the question is whether that movement survives to the output.  The older
``"result"`` mode scales the site's own result by ``1 + delta`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .catalog import condition_number, operand_conditions
from .exceptions import DomainError, InvalidRecord, OracleDomainError, SiteNotExecuted
from .oracle import OracleConfig, oracle_relative_error
from .trace import CONST, INPUT, CorpusFunction, SiteId, apply_double, evaluate_plain, evaluate_traced, execute

SIGNIFICANCE_THRESHOLD = 1e-3

OPERAND = "operand"
RESULT = "result"


@dataclass(frozen=True)
class PerturbationConfig:
    delta: float = 1e-14
    cond_threshold: float = 1e5
    bug_threshold: float = 1e-10
    mode: str = OPERAND

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if not (self.cond_threshold > 0 and self.bug_threshold > 0):
            raise ValueError("thresholds must be positive")
        if self.mode not in (OPERAND, RESULT):
            raise ValueError(f"unknown perturbation mode {self.mode!r}")


@dataclass(frozen=True)
class BugRecord:
    function_id: str
    site: SiteId
    op: str
    witness: tuple
    condition_number: float
    perturbed_rel_error: float
    oracle_rel_error: float
    confirmed: bool
    operand_source: str = ""  # "input" or "computed": what the perturbation hit

    @property
    def significant(self) -> bool:
        return is_significant(self.oracle_rel_error)


def _operand_source(node, index):
    kind = node.args[index][0]
    return "input" if kind == INPUT else "computed"


def pick_operand(node, operands) -> int | None:
    """Index of the non-constant operand with the largest condition number."""
    result = apply_double(node.op, operands)
    conds = operand_conditions(node.op, operands, result)
    best, best_cond = None, -1.0
    for i, c in enumerate(conds):
        if node.args[i][0] == CONST:
            continue
        c = -1.0 if math.isnan(c) else c
        if c > best_cond:
            best, best_cond = i, c
    return best


def _run_perturbed(f, inputs, site, delta, mode):
    info = {}

    def inject(node, operands):
        if node.index != site.op_index:
            return operands
        info["hit"] = True
        if mode == OPERAND:
            i = pick_operand(node, operands)
            if i is not None:
                operands = list(operands)
                operands[i] = operands[i] * (1.0 + delta)
                info["source"] = _operand_source(node, i)
        return operands

    def adjust(node, result):
        if mode == RESULT and node.index == site.op_index:
            return result * (1.0 + delta)
        return result

    try:
        out, _ = execute(f, inputs, inject=inject, adjust=adjust)
    except DomainError as exc:
        if "hit" not in info:
            raise SiteNotExecuted(str(site)) from None
        raise exc
    if "hit" not in info:
        raise SiteNotExecuted(str(site))
    return out, info.get("source", "")


def evaluate_perturbed(f: CorpusFunction, inputs, site: SiteId, delta: float, mode: str = OPERAND) -> float:
    if site.function_id != f.id:
        raise SiteNotExecuted(f"{site} does not belong to {f.id}")
    return _run_perturbed(f, inputs, site, delta, mode)[0]


def _rel(new, ref):
    if math.isnan(new) and math.isnan(ref):
        return math.nan
    if new == ref:
        return 0.0
    if not (math.isfinite(new) and math.isfinite(ref)):
        # the perturbation moved the output across a pole or out of NaN
        return math.inf
    if ref == 0.0:
        return abs(new - ref)
    return abs((new - ref) / ref)


def perturbed_relative_error(f: CorpusFunction, inputs, site: SiteId,
                             cfg: PerturbationConfig = PerturbationConfig()) -> float:
    plain = evaluate_plain(f, inputs)
    return _rel(evaluate_perturbed(f, inputs, site, cfg.delta, cfg.mode), plain)


def is_significant(err: float) -> bool:
    return err > SIGNIFICANCE_THRESHOLD  # NaN compares false


def _confirm_site(f, trace, rec, witness, pcfg, ocfg, oerr=None):
    try:
        gamma = condition_number(rec)
    except InvalidRecord:
        gamma = math.nan
    try:
        perturbed, source = _run_perturbed(f, witness, rec.site, pcfg.delta, pcfg.mode)
        perr = _rel(perturbed, trace.final_result)
    except (SiteNotExecuted, DomainError):
        perr, source = math.nan, ""
    if oerr is None:
        oerr = _oracle_or_nan(f, witness, ocfg)
    confirmed = gamma > pcfg.cond_threshold and perr > pcfg.bug_threshold
    return BugRecord(f.id, rec.site, rec.op.value, witness, gamma, perr, oerr, bool(confirmed), source)


def _oracle_or_nan(f, witness, ocfg):
    try:
        return oracle_relative_error(f, witness, ocfg)
    except OracleDomainError:
        return math.nan


def confirm_witness(f: CorpusFunction, witness, pcfg: PerturbationConfig = PerturbationConfig(),
                    ocfg: OracleConfig = OracleConfig()) -> list:
    """Check every site of the witness trace whose condition number exceeds
    ``pcfg.cond_threshold``; one record per such site, in trace order."""
    witness = tuple(witness)
    try:
        _, trace = evaluate_traced(f, witness)
    except DomainError:
        return []
    out, oerr = [], None
    for rec in trace.records:
        try:
            gamma = condition_number(rec)
        except InvalidRecord:
            continue
        if not gamma > pcfg.cond_threshold:
            continue
        if oerr is None:
            oerr = _oracle_or_nan(f, witness, ocfg)
        out.append(_confirm_site(f, trace, rec, witness, pcfg, ocfg, oerr))
    return out


def confirm_candidate(f: CorpusFunction, cand, pcfg: PerturbationConfig = PerturbationConfig(),
                      ocfg: OracleConfig = OracleConfig()) -> BugRecord:
    """Condition number, perturbed error and oracle error at a candidate."""
    site = cand.target.site
    witness = tuple(cand.witness)
    nan = math.nan

    def unconfirmed():
        return BugRecord(f.id, site, cand.target.spec.op.value, witness, nan, nan, nan, False)

    try:
        _, trace = evaluate_traced(f, witness)
    except DomainError:
        return unconfirmed()
    rec = trace.record_at(site)
    if rec is None:
        return unconfirmed()
    return _confirm_site(f, trace, rec, witness, pcfg, ocfg)
