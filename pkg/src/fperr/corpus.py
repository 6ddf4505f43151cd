"""Benchmark functions with known cancellation hazards.

Each entry is written once against the symbolic interface of
:mod:`fperr.trace` and can therefore be run traced, perturbed or at high
precision without redefinition.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .exceptions import UnknownFunction
from .trace import CorpusFunction, SiteId, cos, exp, log, sin, site_table

DMAX = sys.float_info.max  # the literal 1.8e308 overflows to inf
TINY = 5e-324
FULL = (-DMAX, DMAX)
POSITIVE = (TINY, DMAX)


@dataclass(frozen=True)
class WitnessRegion:
    lo: tuple
    hi: tuple
    error_scale: float
    note: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    function: CorpusFunction
    known_bug_sites: tuple = ()  # ((SiteId, description), ...)
    known_witness_regions: tuple = field(default=())

    @property
    def id(self) -> str:
        return self.function.id

    def __post_init__(self):
        sites = {s for s, _ in site_table(self.function)}
        for site, _ in self.known_bug_sites:
            if site not in sites:
                raise ValueError(f"{site} is not a site of {self.function.id}")


def _f1(x):
    return sin(x) - 0.4


def _f2(x):
    return (1 - cos(x)) / x**2


def _f3(x):
    return exp(x) - 1 - x


def _f4(x):
    return log(x) / (x - 1)


def _f5(x):
    return x**3 - 2 * x - 5


def _f6(x, y):
    return x + y


def _f7(x, y):
    return (x - y) / (x + y)


def _f8(x):
    # spherical Bessel j1
    return sin(x) / x**2 - cos(x) / x


def _entry(fid, arity, domain, fn, text, bugs=(), regions=()):
    f = CorpusFunction(fid, arity, domain, fn, text)
    return CorpusEntry(f, tuple((SiteId(fid, i), d) for i, d in bugs), tuple(regions))


def _build():
    return [
        _entry(
            "f1", 1, (FULL,), _f1, "sin(x) - 0.4",
            bugs=[(1, "cancellation when sin(x) ~ 0.4")],
            regions=[WitnessRegion((0.41151684606,), (0.41151684607,), 1e-6, "x ~ asin(0.4)")],
        ),
        _entry(
            "f2", 1, ((TINY, 1e6),), _f2, "(1 - cos(x)) / x^2",
            bugs=[(1, "1 - cos(x) cancels for small x")],
            regions=[WitnessRegion((1e-9,), (1e-7,), 1e-3, "small x")],
        ),
        _entry(
            "f3", 1, (FULL,), _f3, "exp(x) - 1 - x",
            bugs=[(1, "exp(x) - 1 cancels near 0"), (2, "second cancellation near 0")],
            regions=[WitnessRegion((1e-10,), (1e-8,), 1e-3, "small x")],
        ),
        _entry(
            "f4", 1, (POSITIVE,), _f4, "log(x) / (x - 1)",
            bugs=[(1, "x - 1 near x = 1"), (0, "log(x) near x = 1")],
            regions=[],
        ),
        _entry(
            "f5", 1, (FULL,), _f5, "x^3 - 2x - 5",
            bugs=[(4, "final subtraction near the root 2.0945514815")],
            regions=[WitnessRegion((2.09455148154,), (2.09455148155,), 1e-6, "near the real root")],
        ),
        _entry(
            "f6", 2, (FULL, FULL), _f6, "x + y",
            bugs=[(0, "x ~ -y")],
        ),
        _entry(
            "f7", 2, (FULL, FULL), _f7, "(x - y) / (x + y)",
            bugs=[(0, "x ~ y"), (1, "x ~ -y")],
        ),
        _entry(
            "f8", 1, ((TINY, 1e6),), _f8, "sin(x)/x^2 - cos(x)/x (spherical Bessel j1)",
            bugs=[(5, "cancellation near zeros of j1 and for small x")],
            regions=[
                WitnessRegion((1e-8,), (1e-6,), 1e-3, "small x"),
                WitnessRegion((4.4934094578,), (4.4934094580,), 1e-6, "first zero of j1"),
            ],
        ),
    ]


_REGISTRY = {e.id: e for e in _build()}


def registry() -> list:
    return list(_REGISTRY.values())


def lookup(fid: str) -> CorpusEntry:
    try:
        return _REGISTRY[fid]
    except KeyError:
        raise UnknownFunction(fid) from None


def get_function(fid: str) -> CorpusFunction:
    return lookup(fid).function
