"""End-to-end detection: seed, build residuals, solve, confirm, deduplicate."""

from __future__ import annotations

import itertools
import math
import random
import sys
import time
from dataclasses import dataclass, field

from .catalog import DEFAULT_CATALOG, DangerCatalog
from .exceptions import DomainError
from .newton import SolveOutcome, SolverConfig, newton_solve, newton_solve_multi
from .oracle import OracleConfig
from .targets import ResidualTarget, enumerate_targets, residual_function
from .trace import CorpusFunction
from .validation import BugRecord, PerturbationConfig, confirm_witness

POSITIVE_ENDPOINTS = (
    0.0, 1e-100, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0,
    1e5, 1e8, 1e11, 1e14, 1e17, 1e20, sys.float_info.max,
)
SMALLEST_SUBNORMAL = 5e-324
MAX_SEEDS = 256


@dataclass(frozen=True)
class IntervalPartition:
    endpoints: tuple

    def __post_init__(self):
        e = self.endpoints
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("endpoints must be strictly increasing")

    @property
    def intervals(self) -> list:
        return list(zip(self.endpoints, self.endpoints[1:]))

    def __len__(self):
        return len(self.endpoints) - 1


def default_partition() -> IntervalPartition:
    negative = tuple(-v for v in reversed(POSITIVE_ENDPOINTS[1:]))
    return IntervalPartition(negative + POSITIVE_ENDPOINTS)


def _sample_interval(rng: random.Random, lo: float, hi: float) -> float:
    """One double strictly inside (lo, hi).

    Magnitudes are drawn log-uniformly when the interval covers more than two
    decades, uniformly otherwise.
    """
    sign = 1.0
    if hi <= 0.0:
        lo, hi, sign = -hi, -lo, -1.0
    a = max(lo, SMALLEST_SUBNORMAL) if lo >= 0.0 else lo
    while True:
        if a > 0.0 and math.log10(hi) - math.log10(a) > 2.0:
            x = 10.0 ** rng.uniform(math.log10(a), math.log10(hi))
        else:
            x = rng.uniform(lo, hi)
        if lo < x < hi and math.isfinite(x):
            return sign * x


def sample_initial_points(p: IntervalPartition, seed: int) -> list:
    rng = random.Random(seed)
    return [_sample_interval(rng, lo, hi) for lo, hi in p.intervals]


def _coarse_seeds(p: IntervalPartition, per_dim: int, rng: random.Random) -> list:
    """``per_dim`` points: the partition is split into ``per_dim`` runs of
    consecutive intervals and one interval of each run is sampled."""
    intervals = p.intervals
    groups = [intervals[i * len(intervals) // per_dim:(i + 1) * len(intervals) // per_dim]
              for i in range(per_dim)]
    return [_sample_interval(rng, *rng.choice(g)) for g in groups if g]


@dataclass(frozen=True)
class DetectionConfig:
    partition: IntervalPartition = field(default_factory=default_partition)
    rng_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    cond_threshold: float = 1e5
    multi_input_seeds_per_dim: int = 4
    catalog: DangerCatalog = field(default=DEFAULT_CATALOG, compare=False)

    def __post_init__(self):
        if not self.cond_threshold > 0:
            raise ValueError("cond_threshold must be positive")
        if self.multi_input_seeds_per_dim < 1:
            raise ValueError("multi_input_seeds_per_dim must be positive")


@dataclass(frozen=True)
class CandidateInput:
    function_id: str
    target: ResidualTarget
    witness: tuple
    residual_at_witness: float
    solve: SolveOutcome = field(repr=False)
    start: tuple = ()


@dataclass
class DetectionStats:
    seeds: int = 0
    seeds_out_of_domain: int = 0
    targets: int = 0
    solves: int = 0
    converged: int = 0
    witness_out_of_domain: int = 0
    seed_domain_errors: int = 0
    statuses: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["statuses"] = dict(sorted(self.statuses.items()))
        return d


def initial_points(f: CorpusFunction, cfg: DetectionConfig) -> list:
    """Seeds for ``f``: one per interval for a single input, a capped lattice otherwise."""
    if f.arity == 1:
        return [(x,) for x in sample_initial_points(cfg.partition, cfg.rng_seed)]
    rng = random.Random(cfg.rng_seed)
    axes = [_coarse_seeds(cfg.partition, cfg.multi_input_seeds_per_dim, rng) for _ in range(f.arity)]
    lattice = list(itertools.product(*axes))
    if len(lattice) > MAX_SEEDS:
        keep = sorted(rng.sample(range(len(lattice)), MAX_SEEDS))
        lattice = [lattice[i] for i in keep]
    return lattice


def solve_target(f: CorpusFunction, target: ResidualTarget, start, cfg: SolverConfig) -> SolveOutcome:
    g = residual_function(f, target)
    if f.arity == 1:
        return newton_solve(lambda x: g(x), start[0], cfg)
    return newton_solve_multi(lambda xs: g(*xs), start, cfg)


def detect(f: CorpusFunction, cfg: DetectionConfig = DetectionConfig(), stats: DetectionStats | None = None,
           starts=None) -> list:
    """Converged candidates from every seed and target, duplicates kept.

    ``starts`` overrides the sampled initial points.
    """
    stats = stats if stats is not None else DetectionStats()
    t0 = time.perf_counter()
    found = []
    if starts is None:
        starts = initial_points(f, cfg)
    for k, start in enumerate(starts):
        start = tuple(start)
        stats.seeds += 1
        if not f.in_domain(start):
            stats.seeds_out_of_domain += 1
            continue
        try:
            targets = enumerate_targets(f, start, cfg.catalog)
        except DomainError:
            stats.seed_domain_errors += 1
            continue
        stats.targets += len(targets)
        for j, target in enumerate(targets):
            outcome = solve_target(f, target, start, cfg.solver)
            stats.solves += 1
            key = outcome.status.value
            stats.statuses[key] = stats.statuses.get(key, 0) + 1
            if not outcome.converged:
                continue
            if not f.in_domain(outcome.root):
                stats.witness_out_of_domain += 1
                continue
            stats.converged += 1
            found.append((k, j, CandidateInput(f.id, target, outcome.root, outcome.residual, outcome, tuple(start))))
    stats.wall_time += time.perf_counter() - t0
    found.sort(key=lambda item: (item[2].target.site, item[0], item[1]))
    return [c for _, _, c in found]


def dedup_bugs(cands: list, verdicts: list) -> list:
    """One confirmed record per site, keeping the largest oracle error."""
    del cands  # verdicts already carry site and witness
    best = {}
    for rec in verdicts:
        if not rec.confirmed:
            continue
        cur = best.get(rec.site)
        if cur is None or _err_key(rec) > _err_key(cur):
            best[rec.site] = rec
    return [best[s] for s in sorted(best)]


def _err_key(rec: BugRecord) -> float:
    e = rec.oracle_rel_error
    return -math.inf if math.isnan(e) else e


@dataclass
class DetectionResult:
    function_id: str
    seed: int
    candidates: list
    verdicts: list
    bugs: list
    stats: DetectionStats


def confirm_all(f: CorpusFunction, cands: list, pcfg: PerturbationConfig,
                ocfg: OracleConfig = OracleConfig()) -> list:
    """Verdicts for every ill-conditioned site at every distinct witness."""
    seen, out = set(), []
    for c in cands:
        if c.witness in seen:
            continue
        seen.add(c.witness)
        out.extend(confirm_witness(f, c.witness, pcfg, ocfg))
    return out


def run_detection(f: CorpusFunction, cfg: DetectionConfig = DetectionConfig(),
                  pcfg: PerturbationConfig | None = None,
                  ocfg: OracleConfig = OracleConfig(), starts=None) -> DetectionResult:
    """detect -> confirm each candidate -> dedup."""
    if pcfg is None:
        pcfg = PerturbationConfig(cond_threshold=cfg.cond_threshold)
    stats = DetectionStats()
    cands = detect(f, cfg, stats, starts)
    t0 = time.perf_counter()
    verdicts = confirm_all(f, cands, pcfg, ocfg)
    stats.wall_time += time.perf_counter() - t0
    return DetectionResult(f.id, cfg.rng_seed, cands, verdicts, dedup_bugs(cands, verdicts), stats)
