import csv

import pytest

from evaluation.metrics import MetricReport
from evaluation.reports import (
    CSV_FIELDS,
    aggregate_rows,
    append_report_csv,
    read_report_json,
    write_aggregate_csv,
    write_report_json,
)


def _report(name, category, age):
    return MetricReport(name=name, category=category, age=age, peps=0.1, pceps=0.05,
                        psnr=30.0, ms_ssim=0.9, cqm=31.0)


def test_json_report_is_readable(tmp_path):
    report = _report("seq", "basic", 2.5)
    path = tmp_path / "out" / "seq.json"
    write_report_json(report, path)
    assert read_report_json(path) == report


def test_csv_header_written_once(tmp_path):
    path = tmp_path / "scores.csv"
    append_report_csv(_report("a", "basic", 1.0), path)
    append_report_csv(_report("b", "basic", 3.0), path)
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0].keys()) == CSV_FIELDS
    assert [r["name"] for r in rows] == ["a", "b"]
    assert float(rows[1]["age"]) == 3.0


def test_aggregate_means_per_category():
    reports = [_report("a", "clutter", 4.0), _report("b", "basic", 1.0),
               _report("c", "clutter", 2.0), _report("d", None, 6.0)]
    rows = aggregate_rows(reports)
    assert [r["name"] for r in rows[:4]] == ["a", "b", "c", "d"]
    means = {r["category"]: r for r in rows[4:]}
    assert list(means) == ["basic", "clutter", "uncategorized", "all"]
    assert means["clutter"]["age"] == pytest.approx(3.0)
    assert means["basic"]["age"] == pytest.approx(1.0)
    assert means["all"]["age"] == pytest.approx(13.0 / 4)
    assert means["all"]["psnr"] == pytest.approx(30.0)


def test_aggregate_csv(tmp_path):
    path = tmp_path / "table.csv"
    write_aggregate_csv([_report("a", "basic", 1.0)], path)
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert [(r["name"], r["category"]) for r in rows] == [("a", "basic"), ("mean", "basic"), ("mean", "all")]
