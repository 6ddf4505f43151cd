"""JSON/CSV run reports.

Floats are written as shortest round-trip decimals; non-finite values become
the strings ``"inf"``, ``"-inf"`` and ``"nan"`` so the JSON stays standard.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .detect import DetectionConfig, DetectionResult
from .oracle import OracleConfig
from .validation import PerturbationConfig, is_significant

CSV_COLUMNS = ["function", "site", "op", "witness", "cond", "perturbed_err", "oracle_err", "significant"]


def num(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def unnum(v) -> float:
    return float(v)  # float() already understands "inf"/"nan"


def config_snapshot(cfg: DetectionConfig, pcfg: PerturbationConfig, ocfg: OracleConfig) -> dict:
    return {
        "solver": asdict(cfg.solver),
        "cond_threshold": cfg.cond_threshold,
        "multi_input_seeds_per_dim": cfg.multi_input_seeds_per_dim,
        "partition": [num(v) for v in cfg.partition.endpoints],
        "perturbation": asdict(pcfg),
        "oracle": asdict(ocfg),
        "include_overflow_dangers": cfg.catalog.include_overflow,
    }


def candidate_dict(c) -> dict:
    return {
        "site": c.target.site.op_index,
        "op": c.target.spec.op.value,
        "spec": str(c.target.spec),
        "witness": [num(v) for v in c.witness],
        "residual": num(c.residual_at_witness),
        "iterations": c.solve.iterations,
        "start": [num(v) for v in c.start],
    }


def bug_dict(b) -> dict:
    return {
        "site": b.site.op_index,
        "op": b.op,
        "witness": [num(v) for v in b.witness],
        "condition_number": num(b.condition_number),
        "perturbed_rel_error": num(b.perturbed_rel_error),
        "oracle_rel_error": num(b.oracle_rel_error),
        "confirmed": b.confirmed,
        "significant": is_significant(b.oracle_rel_error),
        "operand_source": b.operand_source,
    }


def result_dict(r: DetectionResult) -> dict:
    stats = r.stats.as_dict()
    stats.pop("wall_time", None)
    bugs = [bug_dict(b) for b in r.bugs]
    return {
        "function": r.function_id,
        "seed": r.seed,
        "candidates": [candidate_dict(c) for c in r.candidates],
        "bugs": bugs,
        # confirmed by perturbation but below the 1e-3 oracle significance bar
        "insignificant_confirmed": sum(1 for b in bugs if not b["significant"]),
        "stats": stats,
    }


@dataclass
class RunReport:
    seed: int
    config: dict
    results: list = field(default_factory=list)
    wall_times: dict = field(default_factory=dict)
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "seed": self.seed,
            "config": self.config,
            "results": self.results,
            "wall_times": self.wall_times,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(d["seed"], d["config"], d["results"], d["wall_times"], d["tool_version"])

    @classmethod
    def build(cls, results, cfg, pcfg, ocfg, wall_times=None) -> "RunReport":
        wt = dict(wall_times or {})
        for r in results:
            wt.setdefault(r.function_id, r.stats.wall_time)
        return cls(cfg.rng_seed, config_snapshot(cfg, pcfg, ocfg), [result_dict(r) for r in results], wt)


def dumps(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def loads(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def to_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for res in report.results:
        for b in res["bugs"]:
            w.writerow([
                res["function"], b["site"], b["op"],
                ";".join(repr(unnum(v)) for v in b["witness"]),
                repr(unnum(b["condition_number"])),
                repr(unnum(b["perturbed_rel_error"])),
                repr(unnum(b["oracle_rel_error"])),
                str(b["significant"]).lower(),
            ])
    return buf.getvalue()


def emit_report(report: RunReport, path, fmt: str = "json") -> None:
    if fmt == "json":
        text = dumps(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def load_schema() -> dict:
    return json.loads(resources.files("fperr").joinpath("schemas/report.schema.json").read_text())
