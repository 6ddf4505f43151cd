import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fperr.catalog import FIXED, INFINITY, DangerCatalog, DangerSpec, condition_number
from fperr.corpus import get_function, registry
from fperr.detect import DetectionConfig, detect
from fperr.exceptions import DomainError
from fperr.trace import CorpusFunction, OpKind, SiteId, evaluate_traced, tan
from fperr.targets import ResidualTarget, enumerate_targets, residual, residual_from_result, residual_function

from conftest import ASIN_04

FUNCS = [e.function for e in registry()]


def fixed(op):
    return DangerSpec(op, FIXED, 0.0)


def test_f1_targets():
    ts = enumerate_targets(get_function("f1"), (0.5,))
    assert [(t.site.op_index, t.spec) for t in ts] == [(0, fixed(OpKind.SIN)), (1, fixed(OpKind.SUB))]


def test_f6_targets():
    ts = enumerate_targets(get_function("f6"), (1.0, 2.0))
    assert [(t.site.op_index, t.spec) for t in ts] == [(0, fixed(OpKind.ADD))]


def test_f2_at_zero_keeps_targets_before_the_division():
    f2 = get_function("f2")
    _, tr = evaluate_traced(f2, (0.0,))
    assert math.isnan(tr.final_result)  # 0/0 at the division site
    ts = enumerate_targets(f2, (0.0,))
    assert [t.site.op_index for t in ts] == [0, 1]


def test_domain_error_partial_enumeration():
    from fperr.trace import log
    f = CorpusFunction("d", 1, ((-5, 5),), lambda x: log(x - 1.0) - 2.0)
    ts = enumerate_targets(f, (0.0,))
    assert [(t.site.op_index, t.spec.op) for t in ts] == [(0, OpKind.SUB)]


def test_wrong_probe_arity():
    with pytest.raises(ValueError):
        enumerate_targets(get_function("f6"), (1.0,))


def test_tan_gets_two_targets_and_infinity_residual():
    f = CorpusFunction("tn", 1, ((-5, 5),), lambda x: tan(x))
    ts = enumerate_targets(f, (0.3,))
    assert [t.spec.kind for t in ts] == [FIXED, INFINITY]
    assert residual(ts[1], (0.3,), f).value == 1.0 / math.tan(0.3)
    assert residual(ts[1], (-0.3,), f).value < 0  # sign kept


def test_residual_examples():
    f1 = get_function("f1")
    t = ResidualTarget("f1", SiteId("f1", 1), fixed(OpKind.SUB))
    r = residual(t, (0.411516846067,))
    assert r.site_executed and r.value == pytest.approx(-4.473e-13, rel=1e-3)
    assert abs(residual(t, (ASIN_04,), f1).value) <= 1e-12
    t6 = ResidualTarget("f6", SiteId("f6", 0), fixed(OpKind.ADD))
    assert residual(t6, (1.0, -1.0)).value == 0.0


def test_residual_site_not_executed():
    from fperr.trace import log
    f = CorpusFunction("d", 1, ((-5, 5),), lambda x: log(x) - 2.0)
    t = ResidualTarget("d", SiteId("d", 1), fixed(OpKind.SUB))
    ev = residual(t, (-1.0,), f)
    assert not ev.site_executed and math.isnan(ev.value)
    assert math.isnan(residual_function(f, t)(-1.0))


def test_residual_from_result_infinity_of_zero():
    spec = DangerSpec(OpKind.TAN, INFINITY)
    assert residual_from_result(spec, 0.0) == math.inf
    assert residual_from_result(spec, -0.0) == -math.inf
    assert residual_from_result(spec, 4.0) == 0.25


finite = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


@given(st.sampled_from(FUNCS).flatmap(lambda f: st.tuples(st.just(f), st.tuples(*[finite] * f.arity))))
def test_residual_matches_trace(fx):
    f, xs = fx
    try:
        _, tr = evaluate_traced(f, xs)
    except DomainError:
        return
    for t in enumerate_targets(f, xs):
        got = residual(t, xs, f)
        site_result = tr.record_at(t.site).result
        want = residual_from_result(t.spec, site_result)
        assert got.site_executed
        assert got.value == want or (math.isnan(got.value) and math.isnan(want))


@given(st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=0.1, max_value=3.0))
def test_enumeration_stable_between_probes(a, b):
    for f in FUNCS:
        if f.arity != 1:
            continue
        ta = enumerate_targets(f, (a,))
        tb = enumerate_targets(f, (b,))
        assert ta == tb


def _root_is_dangerous(op, operands):
    # tiny-scale exceptions: sin(x) ~ x and a - b with both operands tiny are benign roots
    if op is OpKind.SIN and abs(operands[0]) < 1e-7:
        return False
    if op in (OpKind.SUB, OpKind.ADD) and max(abs(v) for v in operands) < 1e-7:
        return False
    return True


@pytest.mark.parametrize("fid", ["f1", "f2", "f3", "f4", "f5", "f8"])
def test_root_implies_large_condition(fid):
    f = get_function(fid)
    checked = 0
    for c in detect(f, DetectionConfig(rng_seed=3)):
        if c.target.spec.kind != FIXED or c.target.spec.op not in (OpKind.SUB, OpKind.SIN, OpKind.COS, OpKind.LOG):
            continue
        ev = residual(c.target, c.witness, f)
        if not abs(ev.value) < 1e-12:
            continue
        _, tr = evaluate_traced(f, c.witness)
        r = tr.record_at(c.target.site)
        if not _root_is_dangerous(r.op, r.operands):
            continue
        checked += 1
        assert condition_number(r) > 1e5, (c.witness, r)
    assert checked > 0


def test_overflow_catalog_adds_exp_target():
    f3 = get_function("f3")
    ts = enumerate_targets(f3, (0.5,), DangerCatalog(include_overflow=True))
    assert [t.spec.op for t in ts] == [OpKind.EXP, OpKind.SUB, OpKind.SUB]
