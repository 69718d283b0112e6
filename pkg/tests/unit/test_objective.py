"""
Unit tests for the Dice loss and the segmentation metrics.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skinnet.autodiff import Tape, Tensor, backward, softmax_channels
from skinnet.data.encoding import one_hot
from skinnet.exceptions import DataError, ShapeError
from skinnet.objective import ConfusionCounts, MetricReport, binarize, confusion, dice_loss, metrics


def _two_pixel_case() -> tuple[np.ndarray, np.ndarray]:
    y = np.zeros((1, 2, 1, 2))
    y[0, 0, 0, 0] = y[0, 1, 0, 1] = 1.0
    yhat = np.zeros_like(y)
    yhat[0, :, 0, 0] = (0.8, 0.2)
    yhat[0, :, 0, 1] = (0.4, 0.6)
    return y, yhat


@pytest.mark.unit
class TestDiceLoss:
    """Test the summed-over-classes Dice loss."""

    def test_perfect_prediction_is_zero(self, float64):
        y = one_hot(np.array([[[0, 1], [1, 0]]]), 2, dtype=np.float64)

        assert dice_loss(y, Tensor(y)).item() == pytest.approx(0.0, abs=1e-6)

    def test_worked_example(self, float64):
        y, yhat = _two_pixel_case()

        loss = dice_loss(y, Tensor(yhat)).item()

        assert loss == pytest.approx(1 - (0.8 / 2.2 + 0.6 / 1.8), abs=1e-4)
        assert loss == pytest.approx(0.30303, abs=1e-4)

    def test_uniform_prediction(self, float64):
        """Half/half predictions on a half/half target give 1 - 2 * (1/4)."""
        y = one_hot(np.array([[[0, 1]]]), 2, dtype=np.float64)

        loss = dice_loss(y, Tensor(np.full_like(y, 0.5))).item()

        assert loss == pytest.approx(0.5, abs=1e-4)

    def test_bounded_for_softmax_predictions(self, rng):
        for _ in range(500):
            probs = softmax_channels(Tensor(rng.normal(0, 3, size=(2, 2, 4, 4))))
            y = one_hot(rng.integers(0, 2, size=(2, 4, 4)), 2)
            value = dice_loss(y, probs).item()
            assert -1e-6 <= value <= 1 + 1e-6

    def test_gradient_flows_to_prediction_only(self, float64):
        y, yhat = _two_pixel_case()
        pred = Tensor(yhat, requires_grad=True)
        with Tape() as tape:
            loss = dice_loss(y, pred)
        backward(loss, tape)

        assert pred.grad.shape == yhat.shape
        # raising the true-class probability lowers the loss
        assert pred.grad[0, 0, 0, 0] < 0 and pred.grad[0, 1, 0, 1] < 0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            dice_loss(np.zeros((1, 2, 2, 2)), Tensor(np.zeros((1, 2, 2, 3))))


@pytest.mark.unit
class TestMetrics:
    """Test confusion counts and the five metrics."""

    def test_perfect_prediction(self):
        mask = np.array([[0, 1], [1, 1]])

        report = metrics(confusion(mask, mask))

        assert report == MetricReport(ac=1, dc=1, ji=1, se=1, sp=1)

    def test_known_counts(self):
        c = ConfusionCounts(tp=3, fp=1, tn=4, fn=2)

        report = metrics(c)

        assert report.ac == pytest.approx(0.7)
        assert report.dc == pytest.approx(6 / 9)
        assert report.ji == pytest.approx(0.5)
        assert report.se == pytest.approx(0.6)
        assert report.sp == pytest.approx(0.8)

    def test_empty_ground_truth_and_prediction(self):
        empty = np.zeros((4, 4), dtype=np.uint8)

        report = metrics(confusion(empty, empty))

        assert report.dc == 1.0 and report.ji == 1.0 and report.se == 1.0

    def test_empty_ground_truth_with_false_positives(self):
        pred = np.zeros((4, 4), dtype=np.uint8)
        pred[0, 0] = 1

        report = metrics(confusion(pred, np.zeros((4, 4), dtype=np.uint8)))

        assert report.dc == 0.0 and report.ji == 0.0 and report.se == 0.0

    def test_all_lesion_ground_truth(self):
        full = np.ones((3, 3), dtype=np.uint8)

        assert metrics(confusion(full, full)).sp == 1.0

    def test_zero_counts_rejected(self):
        with pytest.raises(DataError):
            metrics(ConfusionCounts())

    def test_non_binary_mask_rejected(self):
        with pytest.raises(DataError):
            confusion(np.array([[0, 2]]), np.array([[0, 1]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            confusion(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_csv_row_has_four_decimals(self):
        report = MetricReport(ac=1, dc=0.5, ji=1 / 3, se=0.25, sp=0.123456)

        assert report.csv_row() == "1.0000,0.5000,0.3333,0.2500,0.1235"

    def test_mean_of_reports(self):
        a = MetricReport(ac=1, dc=1, ji=1, se=1, sp=1)
        b = MetricReport(ac=0, dc=0, ji=0, se=0, sp=0)

        assert MetricReport.mean([a, b]).dc == 0.5
        with pytest.raises(DataError):
            MetricReport.mean([])

    def test_binarize_threshold(self):
        probs = np.array([0.2, 0.5, 0.7, 0.9]).reshape(1, 1, 2, 2)
        yhat = np.concatenate([1 - probs, probs], axis=1)

        np.testing.assert_array_equal(binarize(yhat)[0], [[0, 1], [1, 1]])


@pytest.mark.unit
class TestMetricProperties:
    """Property tests against a pixel-count oracle."""

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_pixel_loop_counts(self, seed):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, 2, size=(16, 16))
        gt = rng.integers(0, 2, size=(16, 16))

        c = confusion(pred, gt)

        assert c.tp == sum(1 for p, g in zip(pred.ravel(), gt.ravel()) if p == 1 and g == 1)
        assert c.fp == sum(1 for p, g in zip(pred.ravel(), gt.ravel()) if p == 1 and g == 0)
        assert c.tn == sum(1 for p, g in zip(pred.ravel(), gt.ravel()) if p == 0 and g == 0)
        assert c.fn == sum(1 for p, g in zip(pred.ravel(), gt.ravel()) if p == 0 and g == 1)

        report = metrics(c)
        assert report.dc == pytest.approx(2 * report.ji / (1 + report.ji), abs=1e-12)
        assert 0.0 <= report.ji <= report.dc <= 1.0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), density=st.sampled_from([0.0, 0.1, 0.5, 0.9, 1.0]))
    def test_self_agreement_scores_one(self, seed, density):
        rng = np.random.default_rng(seed)
        mask = (rng.random((16, 16)) < density).astype(np.uint8)

        report = metrics(confusion(mask, mask))

        assert report == MetricReport(ac=1, dc=1, ji=1, se=1, sp=1)
