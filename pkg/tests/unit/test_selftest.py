"""
Unit tests for the built-in verification suites.
"""
import pytest

from skinnet.autodiff import ops
from skinnet.training import selftest
from skinnet.training.selftest import grad_suite, oracle_suite


@pytest.mark.unit
class TestSelftest:
    """Test the grad and oracle suites."""

    def test_oracle_suite_passes(self):
        checks = oracle_suite(cases=2, seed=0)

        assert checks
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_grad_suite_passes(self):
        checks = grad_suite(cases=1, seed=0)

        assert {c.name for c in checks} >= {"relu", "toy_model"}
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_report_summary_counts(self):
        report = selftest("oracle", cases=1)

        assert report.passed
        assert report.mode == "oracle"
        assert sum(total for _, total in report.summary().values()) == len(report.checks)

    def test_broken_relu_derivative_fails_grad_suite(self, monkeypatch):
        monkeypatch.setattr(ops, "_relu_grad", lambda x: 0.5 * (x > 0).astype(x.dtype))

        report = selftest("grad", cases=1)

        assert not report.passed
        assert "relu" in {c.name for c in report.failures}

    @pytest.mark.slow
    def test_full_grad_suite_passes(self):
        checks = grad_suite(cases=20, seed=0)

        assert len([c for c in checks if c.name == "toy_model"]) == 20
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]
