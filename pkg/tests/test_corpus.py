import math
import random

import pytest

from fperr.catalog import condition_number
from fperr.corpus import TINY, get_function, lookup, registry
from fperr.exceptions import DomainError, UnknownFunction
from fperr.oracle import OracleConfig, oracle_relative_error
from fperr.trace import OpKind, evaluate_plain, evaluate_traced, site_table
from fperr.validation import evaluate_perturbed

EXPR = {
    "f1": lambda x: math.sin(x) - 0.4,
    "f2": lambda x: (1 - math.cos(x)) / x**2,
    "f3": lambda x: math.exp(x) - 1 - x,
    "f4": lambda x: math.log(x) / (x - 1),
    "f5": lambda x: x * x * x - 2 * x - 5,
    "f6": lambda x, y: x + y,
    "f7": lambda x, y: (x - y) / (x + y),
    "f8": lambda x: math.sin(x) / x**2 - math.cos(x) / x,
}


def test_registry_has_the_eight_functions():
    ids = [e.id for e in registry()]
    assert ids[:8] == [f"f{i}" for i in range(1, 9)]
    assert lookup("f6").function.arity == 2


def test_lookup_unknown():
    with pytest.raises(UnknownFunction):
        lookup("nope")


def test_known_sites_exist_and_annotations():
    for e in registry():
        sites = {s for s, _ in site_table(e.function)}
        assert all(s in sites for s, _ in e.known_bug_sites)
    assert [s.op_index for s, _ in lookup("f1").known_bug_sites] == [1]
    assert any(r.lo[0] <= 2.0945514815 <= r.hi[0] or abs(r.lo[0] - 2.0945514815) < 1e-9
               for r in lookup("f5").known_witness_regions)
    f8_ops = [op for _, op in site_table(get_function("f8"))]
    assert f8_ops == [OpKind.SIN, OpKind.MUL, OpKind.DIV, OpKind.COS, OpKind.DIV, OpKind.SUB]


def test_domains_exclude_zero_where_dividing():
    for fid in ("f2", "f8"):
        (lo, hi), = get_function(fid).domain
        assert lo == TINY and hi == 1e6


@pytest.mark.parametrize("fid", sorted(EXPR))
def test_definition_matches_plain_python(fid):
    f = get_function(fid)
    rng = random.Random(fid)
    for _ in range(200):
        xs = tuple(rng.uniform(0.1, 10.0) for _ in range(f.arity))
        if fid == "f4" and xs[0] == 1.0:
            continue
        assert evaluate_plain(f, xs) == EXPR[fid](*xs)


def _benign(f, xs, limit=1e3):
    try:
        _, tr = evaluate_traced(f, xs)
    except DomainError:
        return False
    return all(math.isfinite(r.result) and condition_number(r) <= limit for r in tr.records)


@pytest.mark.parametrize("fid", sorted(EXPR))
def test_four_modes_agree_on_benign_inputs(fid):
    f = get_function(fid)
    rng = random.Random(42)
    done = 0
    while done < 100:
        xs = tuple(rng.choice([-1, 1]) * 10 ** rng.uniform(-2, 1.7) for _ in range(f.arity))
        if not f.in_domain(xs) or not _benign(f, xs):
            continue
        plain = evaluate_plain(f, xs)
        traced, _ = evaluate_traced(f, xs)
        assert traced == plain
        assert evaluate_perturbed(f, xs, f.site(0), 0.0) == plain
        assert oracle_relative_error(f, xs, OracleConfig()) < 1e-10, xs
        done += 1


@pytest.mark.parametrize("entry", [e for e in registry() if e.known_witness_regions], ids=lambda e: e.id)
def test_witness_regions_contain_large_errors(entry):
    f = entry.function
    for region in entry.known_witness_regions:
        lo, hi = region.lo[0], region.hi[0]
        errs = []
        for i in range(1000):
            x = lo + (hi - lo) * i / 999
            errs.append(oracle_relative_error(f, (x,), OracleConfig()))
        assert max(errs) > region.error_scale, (region, max(errs))
