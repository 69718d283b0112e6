"""
Unit tests for learning-curve and Excel outputs.
"""
import pytest
from openpyxl import load_workbook

from skinnet.objective.metrics import MetricReport
from skinnet.reporting.curves import EpochRecord, write_curves_csv, write_curves_html
from skinnet.reporting.excel import write_eval_xlsx


def _records() -> list[EpochRecord]:
    return [
        EpochRecord(fold=f, epoch=e, train_loss=0.5 / e, val_loss=0.6 / e, val_dc=0.7, val_ji=0.55, lr=1e-4)
        for f in range(2)
        for e in (1, 2)
    ]


@pytest.mark.unit
class TestCurves:
    """Test curves.csv and curves.html."""

    def test_csv_header_and_rows(self, tmp_path):
        path = write_curves_csv(_records(), tmp_path / "curves.csv")

        lines = path.read_text().splitlines()
        assert lines[0] == "fold,epoch,train_loss,val_loss,val_dc,val_ji,lr"
        assert lines[1] == "0,1,0.5,0.6,0.7,0.55,0.0001"
        assert len(lines) == 5

    def test_csv_bytes_are_stable(self, tmp_path):
        a = write_curves_csv(_records(), tmp_path / "a.csv")
        b = write_curves_csv(_records(), tmp_path / "b.csv")

        assert a.read_bytes() == b.read_bytes()

    def test_html_written(self, tmp_path):
        path = write_curves_html(_records(), tmp_path / "curves.html")

        assert path is not None and path.exists()
        assert "Training curves (mean over 2 folds)" in path.read_text()

    def test_html_skipped_without_records(self, tmp_path):
        assert write_curves_html([], tmp_path / "curves.html") is None


@pytest.mark.unit
class TestEvalWorkbook:
    """Test the Excel evaluation export."""

    def test_sheets_and_rows(self, tmp_path):
        # Arrange
        report = MetricReport(ac=0.9, dc=0.8, ji=0.6667, se=0.75, sp=0.95)
        rows = [("img_a", report), ("img_b", report)]

        # Act
        path = write_eval_xlsx(tmp_path / "fold0_best.sknt", rows, report, tmp_path / "eval.xlsx")

        # Assert
        wb = load_workbook(path)
        assert wb.sheetnames == ["Overview", "Per image"]
        assert wb["Overview"]["B2"].value == 2
        per_image = list(wb["Per image"].iter_rows(values_only=True))
        assert per_image[0] == ("id", "AC", "DC", "JI", "SE", "SP")
        assert per_image[1][0] == "img_a"
        assert per_image[1][2] == pytest.approx(0.8)
