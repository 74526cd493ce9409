"""Member-vs-fused comparison tables in text and CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

VOTING_LABEL = "Voting results"
HEADER = ("models", "test mIoU")


@dataclass(frozen=True)
class ReportRow:
    model_id: str
    miou: float
    per_class_iou: tuple = field(default=())
    pixel_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.miou <= 1.0:
            raise ValueError(f"mIoU must be in [0, 1], got {self.miou}")
        object.__setattr__(self, "per_class_iou", tuple(self.per_class_iou))


def fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def render_table(rows, fused: ReportRow) -> str:
    """Member rows followed by a final "Voting results" row, mIoU at 4 decimals."""
    if not rows:
        raise ValueError("report needs at least one member row")
    body = [(r.model_id, fmt(r.miou)) for r in rows] + [(VOTING_LABEL, fmt(fused.miou))]
    name_w = max(len(n) for n, _ in body + [HEADER])
    value_w = max(len(v) for _, v in body + [HEADER])
    rule = "-" * (name_w + 2 + value_w)
    lines = [rule, f"{HEADER[0]:<{name_w}}  {HEADER[1]:>{value_w}}", rule]
    lines += [f"{n:<{name_w}}  {v:>{value_w}}" for n, v in body]
    lines.append(rule)
    return "\n".join(lines) + "\n"


CSV_FIELDS = ("model_id", "miou", "pixel_count", "per_class_iou")


def rows_to_csv(rows) -> str:
    """Per-class IoUs are ';'-joined with empty slots for absent classes."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        per_class = ";".join("" if v is None else f"{v:.4f}" for v in r.per_class_iou)
        writer.writerow([r.model_id, f"{r.miou:.4f}", r.pixel_count, per_class])
    return buf.getvalue()


def report_csv(rows, fused: ReportRow) -> str:
    voting = ReportRow(VOTING_LABEL, fused.miou, fused.per_class_iou, fused.pixel_count)
    return rows_to_csv(list(rows) + [voting])


def rows_from_csv(text: str) -> list[ReportRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"expected CSV columns {CSV_FIELDS}, got {reader.fieldnames}")
    out = []
    for rec in reader:
        per_class = tuple(None if v == "" else float(v) for v in rec["per_class_iou"].split(";")) \
            if rec["per_class_iou"] else ()
        out.append(ReportRow(rec["model_id"], float(rec["miou"]), per_class, int(rec["pixel_count"])))
    return out
