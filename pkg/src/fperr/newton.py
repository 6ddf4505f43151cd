"""Newton-Raphson with central-difference derivatives.

Stopping rules, checked after every update:

* ``|g(x)| < tol_f``            -> converged (the only success)
* ``|g'(x)| < tol_df``          -> flat derivative
* ``|g(x) / g'(x)| < tol_step`` -> step too small
* ``max_iter`` updates          -> gave up

Any NaN/inf residual or derivative ends the solve as diverged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence


class Status(str, Enum):
    CONVERGED_RESIDUAL = "ConvergedResidual"
    STOPPED_FLAT_DERIVATIVE = "StoppedFlatDerivative"
    STOPPED_SMALL_STEP = "StoppedSmallStep"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGED = "Diverged"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 20
    tol_f: float = 1e-15
    tol_df: float = 1e-10
    tol_step: float = 1e-10
    fd_scale: float = 2.0**-26

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        for name in ("tol_f", "tol_df", "tol_step", "fd_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    root: tuple
    iterations: int
    path: tuple = field(repr=False)  # ((inputs tuple, residual), ...)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED_RESIDUAL

    @property
    def residual(self) -> float:
        return self.path[-1][1]


def _step_size(x: float, cfg: SolverConfig) -> float:
    return cfg.fd_scale * max(abs(x), 1.0)


def central_difference(g: Callable[[float], float], x: float, cfg: SolverConfig = SolverConfig()) -> float:
    h = _step_size(x, cfg)
    return (g(x + h) - g(x - h)) / (2 * h)


def gradient_fd(g: Callable[[Sequence[float]], float], x: Sequence[float],
                cfg: SolverConfig = SolverConfig()) -> list:
    """Componentwise central differences of a scalar field."""
    x = list(x)
    grad = []
    for i, xi in enumerate(x):
        h = _step_size(xi, cfg)
        up, down = list(x), list(x)
        up[i] = xi + h
        down[i] = xi - h
        grad.append((g(up) - g(down)) / (2 * h))
    return grad


def _finite(v: float) -> bool:
    return math.isfinite(v)


def newton_solve(g: Callable[[float], float], x0: float, cfg: SolverConfig = SolverConfig()) -> SolveOutcome:
    x = float(x0)
    gx = g(x)
    path = [((x,), gx)]

    def done(status):
        return SolveOutcome(status, (x,), len(path) - 1, tuple(path))

    if not _finite(gx):
        return done(Status.DIVERGED)
    if abs(gx) < cfg.tol_f:
        return done(Status.CONVERGED_RESIDUAL)
    for _ in range(cfg.max_iter):
        d = central_difference(g, x, cfg)
        if not _finite(d):
            return done(Status.DIVERGED)
        if abs(d) < cfg.tol_df:
            return done(Status.STOPPED_FLAT_DERIVATIVE)
        step = gx / d
        x = x - step
        gx = g(x)
        path.append(((x,), gx))
        if not (_finite(x) and _finite(gx)):
            return done(Status.DIVERGED)
        if abs(gx) < cfg.tol_f:
            return done(Status.CONVERGED_RESIDUAL)
        if abs(step) < cfg.tol_step:
            return done(Status.STOPPED_SMALL_STEP)
    return done(Status.MAX_ITERATIONS)


def _min_norm_step(gx: float, grad: list) -> list:
    if len(grad) == 1:
        return [gx / grad[0]]  # same rounding as the scalar solver
    m = max(abs(d) for d in grad)  # scale first so the squares cannot overflow
    u = [d / m for d in grad]
    s = math.fsum(v * v for v in u)
    a = gx / m
    return [a * (v / s) for v in u]


def newton_solve_multi(g: Callable[[Sequence[float]], float], x0: Sequence[float],
                       cfg: SolverConfig = SolverConfig()) -> SolveOutcome:
    """Newton for one equation in n unknowns using the minimum-norm step
    ``g * grad / |grad|**2``, which is the scalar ``g/g'`` update when n == 1."""
    x = [float(v) for v in x0]
    if not x:
        raise ValueError("need at least one variable")
    gx = g(list(x))
    path = [(tuple(x), gx)]

    def done(status):
        return SolveOutcome(status, tuple(x), len(path) - 1, tuple(path))

    if not _finite(gx):
        return done(Status.DIVERGED)
    if abs(gx) < cfg.tol_f:
        return done(Status.CONVERGED_RESIDUAL)
    for _ in range(cfg.max_iter):
        grad = gradient_fd(g, x, cfg)
        if not all(_finite(d) for d in grad):
            return done(Status.DIVERGED)
        norm = math.hypot(*grad)
        if norm < cfg.tol_df:
            return done(Status.STOPPED_FLAT_DERIVATIVE)
        step = _min_norm_step(gx, grad)
        x = [xi - si for xi, si in zip(x, step)]
        gx = g(list(x))
        path.append((tuple(x), gx))
        if not (all(_finite(v) for v in x) and _finite(gx)):
            return done(Status.DIVERGED)
        if abs(gx) < cfg.tol_f:
            return done(Status.CONVERGED_RESIDUAL)
        if math.hypot(*step) < cfg.tol_step:
            return done(Status.STOPPED_SMALL_STEP)
    return done(Status.MAX_ITERATIONS)


def path_to_csv(outcome: SolveOutcome) -> str:
    n = len(outcome.root)
    names = ["x"] if n == 1 else [f"x{i}" for i in range(n)]
    lines = [",".join(["step", *names, "g"])]
    for k, (xs, gv) in enumerate(outcome.path):
        lines.append(",".join([str(k), *(repr(v) for v in xs), repr(gv)]))
    return "\n".join(lines) + "\n"
