"""CSV tables and SVG renderings of experiment results."""

import csv
import io
from html import escape
from typing import Iterable, List, Sequence

from zombie_cache_sim.attacks.models import AttackReport

AES_HEADER = ("p0", "line", "count", "normalized")
RSA_HEADER = ("cycle", "probe")
FW_HEADER = ("true", "inferred", "percent")
COVERT_HEADER = ("index", "sent", "received")
SWEEP_HEADER = ("F", "R", "l3lat_norm", "slowdown")
BENIGN_HEADER = ("workload", "mode", "total_cycles", "zombie_hits", "zombie_misses", "alarms")
FLUSHFLUSH_HEADER = ("setting", "line_state", "latency")
ALARM_HEADER = ("cycle", "spy_core", "victim_core")
RUNLOG_HEADER = ("cycle", "core", "op", "addr", "outcome", "latency")
SUMMARY_HEADER = ("scenario", "status", "headline")


def to_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """Comma-separated text with a header row and LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _cell(value: object) -> object:
    # repr-style floats keep CSVs exact and byte-stable
    if isinstance(value, float):
        return repr(value)
    return value


def aes_rows(report: AttackReport) -> List[tuple]:
    rows = []
    p0_values = report.metadata.get("p0_values", list(range(len(report.hit_counts))))
    for p0, counts, normalized in zip(p0_values, report.hit_counts, report.heatmap):
        for line, (count, norm) in enumerate(zip(counts, normalized)):
            rows.append((p0, line, count, round(norm, 6)))
    return rows


def fw_rows(report: AttackReport) -> List[tuple]:
    return [
        (true, inferred, round(percent, 4))
        for true, row in enumerate(report.confusion)
        for inferred, percent in enumerate(row)
    ]


def _shade(value: float) -> str:
    """White-to-dark-red ramp for a value in [0, 1]."""
    v = min(max(value, 0.0), 1.0)
    g = int(round(255 * (1.0 - v)))
    return f"rgb(255,{g},{g})" if v < 0.5 else f"rgb({int(round(255 - 120 * (v - 0.5) * 2))},{g},{g})"


def render_heatmap_svg(report: AttackReport, title: str, cell: int = 12, row_height: int = 3) -> str:
    """
    Heat map of normalized hits, one row per p0 and one column per table line.

    Args:
        report: AES report with a normalized heatmap
        title: Caption drawn above the map
        cell: Column width in pixels
        row_height: Row height in pixels
    """
    rows = report.heatmap
    cols = len(rows[0]) if rows else 0
    margin = {"left": 40, "top": 30, "right": 10, "bottom": 30}
    width = margin["left"] + cols * cell + margin["right"]
    height = margin["top"] + len(rows) * row_height + margin["bottom"]

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg width="{width}" height="{height}" xmlns="http://www.w3.org/2000/svg" version="1.1">',
        f'  <text x="{margin["left"]}" y="18" font-family="sans-serif" font-size="12">{escape(title)}</text>',
    ]
    for r, values in enumerate(rows):
        y = margin["top"] + r * row_height
        for c, value in enumerate(values):
            x = margin["left"] + c * cell
            parts.append(f'  <rect x="{x}" y="{y}" width="{cell}" height="{row_height}" fill="{_shade(value)}"/>')
    axis_y = margin["top"] + len(rows) * row_height + 14
    parts.append(
        f'  <text x="{margin["left"]}" y="{axis_y}" font-family="sans-serif" font-size="10">cacheline 0..{max(cols - 1, 0)}</text>'
    )
    parts.append(
        f'  <text x="4" y="{margin["top"] + 10}" font-family="sans-serif" font-size="10">p0</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_confusion_svg(report: AttackReport, title: str, cell: int = 60) -> str:
    """Confusion matrix with the percentage printed in each cell."""
    matrix = report.confusion
    n = len(matrix)
    margin = 50
    size = margin * 2 + n * cell
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg width="{size}" height="{size}" xmlns="http://www.w3.org/2000/svg" version="1.1">',
        f'  <text x="{margin}" y="24" font-family="sans-serif" font-size="12">{escape(title)}</text>',
    ]
    for i, row in enumerate(matrix):
        for j, percent in enumerate(row):
            x, y = margin + j * cell, margin + i * cell
            parts.append(f'  <rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_shade(percent / 100.0)}" stroke="#888"/>')
            parts.append(
                f'  <text x="{x + cell // 2}" y="{y + cell // 2 + 4}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{percent:.1f}%</text>'
            )
    parts.append(f'  <text x="{margin}" y="{size - 12}" font-family="sans-serif" font-size="10">inferred function</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
