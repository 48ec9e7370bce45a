"""Metric report files: one JSON record per sequence, CSV tables across sequences."""
import csv
import logging
from pathlib import Path
from typing import Dict, List, Sequence

from evaluation.metrics import MetricReport

logger = logging.getLogger(__name__)

METRIC_FIELDS = ["age", "peps", "pceps", "psnr", "ms_ssim", "cqm"]
CSV_FIELDS = ["name", "category"] + METRIC_FIELDS


def write_report_json(report: MetricReport, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2))


def read_report_json(path: Path) -> MetricReport:
    return MetricReport.model_validate_json(Path(path).read_text())


def append_report_csv(report: MetricReport, path: Path) -> None:
    """Append one row, writing the header when the file is new."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        if new_file:
            writer.writeheader()
        writer.writerow(report.model_dump(include=set(CSV_FIELDS)))


def _mean_row(name: str, category: str, reports: Sequence[MetricReport]) -> Dict:
    row = {"name": name, "category": category}
    for field in METRIC_FIELDS:
        row[field] = sum(getattr(r, field) for r in reports) / len(reports)
    return row


def aggregate_rows(reports: Sequence[MetricReport]) -> List[Dict]:
    """Per-sequence rows, then a mean row per category and an overall mean."""
    rows = [r.model_dump(include=set(CSV_FIELDS)) for r in reports]
    categories: Dict[str, List[MetricReport]] = {}
    for r in reports:
        categories.setdefault(r.category or "uncategorized", []).append(r)
    for category in sorted(categories):
        rows.append(_mean_row("mean", category, categories[category]))
    if reports:
        rows.append(_mean_row("mean", "all", reports))
    return rows


def write_aggregate_csv(reports: Sequence[MetricReport], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(aggregate_rows(reports))
    logger.info(f"Wrote {len(reports)} reports to {path}")
