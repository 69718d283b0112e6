from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from openpyxl import Workbook
from openpyxl.styles import Font
from openpyxl.utils import get_column_letter
from openpyxl.worksheet.worksheet import Worksheet

from ..objective.metrics import METRIC_NAMES, MetricReport


def _autofit(ws: Worksheet, cols: int, min_w: int = 10, max_w: int = 60) -> None:
    widths = [0] * (cols + 1)
    for row in ws.iter_rows(values_only=True):
        for i, cell in enumerate(row, start=1):
            if cell is None:
                continue
            widths[i] = max(widths[i], len(str(cell)))
    for i in range(1, cols + 1):
        ws.column_dimensions[get_column_letter(i)].width = max(min_w, min(widths[i] + 2, max_w))


def write_eval_xlsx(
    checkpoint: Path, rows: Sequence[tuple[str, MetricReport]], aggregate: MetricReport, out_path: Path
) -> Path:
    """
    Overview sheet with the aggregate metrics, and one row per image on a second sheet.
    """
    wb = Workbook()

    ws = wb.active
    ws.title = "Overview"
    ws.append(["Checkpoint", str(checkpoint)])
    ws.append(["Images", len(rows)])
    for name in METRIC_NAMES:
        ws.append([name.upper(), round(getattr(aggregate, name), 4)])
    for r in range(1, ws.max_row + 1):
        ws[f"A{r}"].font = Font(bold=True)
    _autofit(ws, 2, max_w=100)

    wi = wb.create_sheet("Per image")
    headers = ["id", *(name.upper() for name in METRIC_NAMES)]
    wi.append(headers)
    for c in range(1, len(headers) + 1):
        wi.cell(row=1, column=c).font = Font(bold=True)
    for sid, report in rows:
        wi.append([sid, *(round(getattr(report, name), 4) for name in METRIC_NAMES)])
    _autofit(wi, len(headers))

    out_path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(out_path)
    return out_path
