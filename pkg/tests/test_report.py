import json
import math

import jsonschema
import pytest

from fperr.corpus import registry
from fperr.detect import DetectionConfig, run_detection
from fperr.oracle import OracleConfig
from fperr.report import CSV_COLUMNS, RunReport, dumps, emit_report, load_schema, loads, num, to_csv, unnum
from fperr.validation import PerturbationConfig

CFG, PCFG, OCFG = DetectionConfig(), PerturbationConfig(), OracleConfig()


@pytest.fixture(scope="module")
def full_report():
    results = [run_detection(e.function, CFG, PCFG, OCFG) for e in registry()]
    return RunReport.build(results, CFG, PCFG, OCFG, {"total": 1.0})


def test_nonfinite_numbers():
    assert [num(v) for v in (math.inf, -math.inf, 1.5)] == ["inf", "-inf", 1.5]
    assert num(math.nan) == "nan" and math.isnan(unnum("nan"))
    assert unnum("-inf") == -math.inf and unnum(0.1) == 0.1


def test_empty_report_is_valid():
    rep = RunReport.build([], CFG, PCFG, OCFG)
    data = json.loads(dumps(rep))
    jsonschema.validate(data, load_schema())
    assert data["results"] == [] and data["wall_times"] == {}
    assert to_csv(rep).strip() == ",".join(CSV_COLUMNS)


def test_schema_and_round_trip(full_report):
    text = dumps(full_report)
    jsonschema.validate(json.loads(text), load_schema())
    assert dumps(loads(text)) == text


def test_witness_floats_round_trip_exactly(full_report):
    back = loads(dumps(full_report))
    for res in back.results:
        for b in res["bugs"]:
            for v in b["witness"]:
                assert isinstance(v, float) and repr(float(repr(v))) == repr(v)


def test_csv_one_row_per_site(full_report):
    rows = to_csv(full_report).strip().splitlines()
    assert rows[0] == ",".join(CSV_COLUMNS)
    keys = [tuple(r.split(",")[:2]) for r in rows[1:]]
    assert len(keys) == len(set(keys)) == sum(len(r["bugs"]) for r in full_report.results)
    assert {k[0] for k in keys} == {e.id for e in registry()}


def test_stats_carry_no_timing(full_report):
    for res in full_report.results:
        assert "wall_time" not in res["stats"]
    assert set(full_report.wall_times) == {"total"} | {e.id for e in registry()}


def test_emit_report(tmp_path, full_report):
    p = tmp_path / "r.json"
    emit_report(full_report, p)
    assert p.read_text() == dumps(full_report)
    emit_report(full_report, tmp_path / "r.csv", "csv")
    with pytest.raises(ValueError):
        emit_report(full_report, tmp_path / "r.xml", "xml")
    with pytest.raises(OSError, match="no_such_dir"):
        emit_report(full_report, tmp_path / "no_such_dir" / "r.json")
