import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fperr.newton import (
    SolverConfig, Status, central_difference, gradient_fd, newton_solve, newton_solve_multi, path_to_csv,
)

from conftest import ASIN_04, CUBIC_ROOT


def cubic(x):
    return x**3 - 2 * x - 5


def test_defaults():
    c = SolverConfig()
    assert (c.max_iter, c.tol_f, c.tol_df, c.tol_step, c.fd_scale) == (20, 1e-15, 1e-10, 1e-10, 2.0**-26)


@pytest.mark.parametrize("kw", [dict(max_iter=0), dict(tol_f=0.0), dict(tol_df=-1.0), dict(tol_step=0.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_central_difference_examples():
    assert central_difference(lambda x: x * x, 3.0) == pytest.approx(6.0, rel=1e-15)
    assert central_difference(math.sin, 0.0) == pytest.approx(1.0, abs=1e-9)
    assert central_difference(cubic, 2.0) == pytest.approx(10.0, abs=1e-6)
    assert math.isnan(central_difference(lambda x: math.nan, 1.0))


@pytest.mark.parametrize("fn,deriv", [
    (math.sin, math.cos), (math.exp, math.exp), (lambda x: x**3, lambda x: 3 * x * x),
], ids=["sin", "exp", "cube"])
def test_central_difference_accuracy(fn, deriv):
    rng = random.Random(11)
    for _ in range(100):
        x = rng.uniform(-10, 10)
        a = deriv(x)
        assert abs(central_difference(fn, x) - a) <= 1e-5 * max(1.0, abs(a))


def test_cubic_iterates():
    out = newton_solve(cubic, 2.0)
    xs = [p[0][0] for p in out.path]
    assert xs[0] == 2.0
    assert abs(xs[1] - 2.1) <= math.ulp(2.1)
    assert abs(xs[2] - 2.0946) < 5e-5
    assert out.status is Status.CONVERGED_RESIDUAL and out.iterations <= 6
    assert out.root[0] == pytest.approx(CUBIC_ROOT, abs=1e-15)


def test_affine_one_step():
    out = newton_solve(lambda x: x - 7, 100.0)
    assert out.root == (7.0,) and out.iterations == 1 and out.converged


def test_sin_from_three():
    out = newton_solve(lambda x: math.sin(x) - 0.4, 3.0)
    assert out.converged
    assert out.root[0] == pytest.approx(math.pi - ASIN_04, abs=1e-12) or out.root[0] == pytest.approx(ASIN_04, abs=1e-12)


def test_statuses():
    assert newton_solve(lambda x: x * x + 1, 0.0).status is Status.STOPPED_FLAT_DERIVATIVE
    out = newton_solve(lambda x: 1e10 * (x - 1 / 3) + 2.7e-7, 0.3)  # no double root
    assert out.status is Status.STOPPED_SMALL_STEP and abs(out.residual) >= 1e-15
    cbrt = lambda x: math.copysign(abs(x) ** (1 / 3), x)  # noqa: E731
    out = newton_solve(cbrt, 1.0)
    assert out.status is Status.MAX_ITERATIONS and out.iterations == 20
    out = newton_solve(lambda x: math.nan, 1.0)
    assert out.status is Status.DIVERGED and out.iterations == 0 and len(out.path) == 1
    out = newton_solve(lambda x: math.nan if x > 1.5 else x - 3, 1.0)  # first step lands in the NaN zone
    assert out.status is Status.DIVERGED and out.iterations == 1
    assert newton_solve(lambda x: 1 / x, 1.0).status is Status.STOPPED_FLAT_DERIVATIVE


def test_converged_at_start():
    out = newton_solve(lambda x: x, 0.0)
    assert out.converged and out.iterations == 0


def test_quadratic_convergence():
    out = newton_solve(lambda x: x * x - 2, 1.5)
    errs = [abs(p[0][0] - math.sqrt(2)) for p in out.path]
    for a, b in zip(errs, errs[1:]):
        if a < 1e-8:
            break
        assert b <= 1.0 * a * a
    assert out.converged


wild = st.sampled_from([
    lambda x: math.nan if x > 1.3 else x - 2,
    lambda x: math.tan(x) - 1e308 * x,
    lambda x: 1 / x if x != 0 else math.inf,
    lambda x: math.exp(x) if x < 700 else math.inf,
    lambda x: x * x - 2,
    lambda x: math.sin(1 / x) if abs(x) > 1e-300 else 0.0,
])


@given(wild, st.floats(min_value=-1e6, max_value=1e6), st.integers(min_value=1, max_value=30))
def test_termination_and_path_integrity(g, x0, cap):
    cfg = SolverConfig(max_iter=cap)
    out = newton_solve(g, x0, cfg)
    assert out.iterations <= cap and len(out.path) == out.iterations + 1
    for (xs, gv) in out.path:
        want = g(xs[0])
        assert gv == want or (math.isnan(gv) and math.isnan(want))
    if out.converged:
        assert abs(g(out.root[0])) < cfg.tol_f
    multi = newton_solve_multi(lambda v: g(v[0]), [x0], cfg)
    assert multi.iterations <= cap and len(multi.path) == multi.iterations + 1


def test_gradient_examples():
    assert gradient_fd(lambda v: v[0] + v[1], [1.0, 2.0]) == pytest.approx([1, 1], abs=1e-9)
    assert gradient_fd(lambda v: v[0] * v[1], [3.0, 5.0]) == pytest.approx([5, 3], abs=1e-6)
    assert gradient_fd(lambda v: v[0] ** 2 - v[1], [2.0, 1.0]) == pytest.approx([4, -1], abs=1e-6)


def test_multi_examples():
    out = newton_solve_multi(lambda v: v[0] + v[1], [10.0, 3.0])
    assert out.converged and out.iterations == 1 and abs(sum(out.root)) < 1e-15
    out = newton_solve_multi(lambda v: v[0] * v[1] - 1, [2.0, 2.0])
    assert out.converged and abs(out.root[0] * out.root[1] - 1) < 1e-12
    with pytest.raises(ValueError):
        newton_solve_multi(lambda v: 0.0, [])


def test_multi_reduces_to_scalar_on_cubic():
    a = newton_solve(cubic, 2.0)
    b = newton_solve_multi(lambda v: cubic(v[0]), [2.0])
    assert a == b


def test_path_csv():
    out = newton_solve(cubic, 2.0)
    lines = path_to_csv(out).splitlines()
    assert lines[0] == "step,x,g" and lines[1] == "0,2.0,-1.0" and lines[2].startswith("1,2.1")
    m = newton_solve_multi(lambda v: v[0] + v[1], [1.0, 1.0])
    assert path_to_csv(m).splitlines()[0] == "step,x0,x1,g"
