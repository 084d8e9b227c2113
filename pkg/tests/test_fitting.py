"""Fitting pipeline: inversion of measured accuracies, power-law OLS, and
the linear-in-d laws, anchored by generate-then-fit oracles."""

import math

import numpy as np
import pytest

from sepacc.fitting import (
    FitSample,
    UnidentifiableFit,
    accuracy_grid_to_samples,
    fit_linear_laws,
    fit_power_law,
    write_fit_report_json,
)
from sepacc.geometry import DEFAULT_MODEL, DimensionCoefficients
from sepacc.rng import RngSeed
from sepacc.theory import ProblemSpec, expected_accuracy
from sepacc.trainer import RepeatResult, TrainingRecord


def record_with_accuracy(d, N, L, accuracy) -> TrainingRecord:
    rep = RepeatResult(repeat=0, seed_label="0:0", epochs=1, final_loss=0.0, accuracy=accuracy)
    return TrainingRecord(spec=ProblemSpec(d, N, L), seed=RngSeed(0), repeats=(rep,))


def synthetic_samples(d, x, y, c, grid) -> list:
    """Noise-free samples straight from the power law 1/b = N^y / (c L^x)."""
    samples = []
    for N in grid:
        for L in grid:
            inverse_b = N**y / (c * L**x)
            samples.append(
                FitSample(ProblemSpec(d, N, L), measured_accuracy=0.75, inverse_b=inverse_b)
            )
    return samples


GRID = (100, 200, 500, 800, 1000, 2000, 5000, 10000, 20000)


class TestAccuracyGridToSamples:
    def test_anchor_value(self):
        samples, excluded = accuracy_grid_to_samples(
            [record_with_accuracy(2, 100, 100, 0.769)]
        )
        assert excluded == []
        assert samples[0].inverse_b == pytest.approx(2.0, rel=0.02)

    def test_saturation_maps_to_zero(self):
        samples, excluded = accuracy_grid_to_samples(
            [record_with_accuracy(2, 10, 1000, 1.0)]
        )
        assert samples[0].inverse_b == 0.0
        assert excluded == []

    def test_below_chance_excluded(self):
        samples, excluded = accuracy_grid_to_samples(
            [record_with_accuracy(2, 100, 100, 0.49)]
        )
        assert samples == []
        assert excluded[0].reason == "below-chance"

    def test_mixed_batch_bookkeeping(self):
        records = [
            record_with_accuracy(2, 100, 100, 0.8),
            record_with_accuracy(2, 200, 100, 0.3),
            record_with_accuracy(2, 300, 100, 1.0),
        ]
        samples, excluded = accuracy_grid_to_samples(records)
        assert len(samples) + len(excluded) == len(records)


class TestFitPowerLaw:
    def test_recovers_embedded_d2_row(self):
        row = DEFAULT_MODEL.row_for(2)
        samples = synthetic_samples(2, row.x, row.y, row.c, GRID)
        report = fit_power_law(samples, 2)
        assert report.coefficients.x == pytest.approx(row.x, abs=1e-6)
        assert report.coefficients.y == pytest.approx(row.y, abs=1e-6)
        assert report.coefficients.c == pytest.approx(row.c, rel=1e-6)
        assert report.r_squared == pytest.approx(1.0, abs=1e-12)
        assert report.r_squared_log == pytest.approx(1.0, abs=1e-12)

    def test_noise_tolerance(self):
        row = DEFAULT_MODEL.row_for(2)
        rng = RngSeed(7, 70).generator()
        samples = []
        for s in synthetic_samples(2, row.x, row.y, row.c, GRID):
            noisy = s.inverse_b * (1.0 + 0.01 * rng.standard_normal())
            samples.append(FitSample(s.spec, s.measured_accuracy, noisy))
        report = fit_power_law(samples, 2)
        assert report.coefficients.x == pytest.approx(row.x, rel=0.05)
        assert report.coefficients.y == pytest.approx(row.y, rel=0.05)
        assert report.coefficients.c == pytest.approx(row.c, rel=0.05)

    def test_random_coefficient_recovery(self):
        rng = RngSeed(8, 80).generator()
        grid = np.geomspace(100, 20000, 5).astype(int)
        for _ in range(10):
            x = float(rng.uniform(0.0, 1.0))
            y = float(rng.uniform(0.5, 1.2))
            c = float(rng.uniform(1.0, 100.0))
            samples = synthetic_samples(4, x, y, c, tuple(int(g) for g in grid))
            report = fit_power_law(samples, 4)
            assert report.coefficients.x == pytest.approx(x, abs=1e-8 * max(1, abs(x)))
            assert report.coefficients.y == pytest.approx(y, rel=1e-8)
            assert report.coefficients.c == pytest.approx(c, rel=1e-8)

    def test_saturated_excluded_and_bookkeeping(self):
        row = DEFAULT_MODEL.row_for(2)
        samples = synthetic_samples(2, row.x, row.y, row.c, (100, 500, 2000, 10000))
        samples.append(FitSample(ProblemSpec(2, 10, 10000), 1.0, 0.0))
        report = fit_power_law(samples, 2)
        assert len(report.excluded) == 1
        assert report.excluded[0].reason == "saturated"
        assert len(report.residuals) + len(report.excluded) == len(samples)

    def test_underdetermined(self):
        row = DEFAULT_MODEL.row_for(2)
        samples = synthetic_samples(2, row.x, row.y, row.c, (100,))
        with pytest.raises(UnidentifiableFit):
            fit_power_law(samples[:2], 2)

    def test_collinear_design(self):
        # N == L everywhere makes (ln N, ln L) collinear
        row = DEFAULT_MODEL.row_for(2)
        samples = [
            FitSample(ProblemSpec(2, n, n), 0.7, n**row.y / (row.c * n**row.x))
            for n in GRID
        ]
        with pytest.raises(UnidentifiableFit):
            fit_power_law(samples, 2)

    def test_wrong_dimension_rejected(self):
        samples = synthetic_samples(3, 0.2, 0.7, 10.0, (100, 500, 2000, 10000))
        with pytest.raises(ValueError):
            fit_power_law(samples, 2)

    def test_end_to_end_from_records(self):
        # accuracies generated through the accuracy map round-trip the law
        row = DEFAULT_MODEL.row_for(2)
        records = []
        for N in (100, 500, 2000, 10000):
            for L in (100, 500, 2000, 10000):
                b = row.c * L**row.x / N**row.y
                records.append(record_with_accuracy(2, N, L, expected_accuracy(b)))
        samples, excluded = accuracy_grid_to_samples(records)
        assert excluded == []
        report = fit_power_law(samples, 2)
        assert report.coefficients.x == pytest.approx(row.x, rel=1e-5)
        assert report.coefficients.y == pytest.approx(row.y, rel=1e-5)
        assert report.coefficients.c == pytest.approx(row.c, rel=1e-5)


class TestFitLinearLaws:
    def test_reproduces_reference_laws(self):
        model = fit_linear_laws(list(DEFAULT_MODEL.rows))
        assert model.x_law.slope == pytest.approx(0.0758, abs=5e-4)
        assert model.x_law.intercept == pytest.approx(-0.0349, abs=5e-4)
        assert model.x_law.r_squared == pytest.approx(0.858, abs=5e-3)
        assert model.y_law.slope == pytest.approx(0.0517, abs=5e-4)
        assert model.y_law.intercept == pytest.approx(0.5268, abs=5e-4)
        assert model.y_law.r_squared == pytest.approx(0.902, abs=5e-3)
        assert model.c_law.slope == pytest.approx(9.4323, abs=5e-4)
        assert model.c_law.intercept == pytest.approx(-8.8558, abs=5e-4)
        assert model.c_law.r_squared == pytest.approx(0.804, abs=5e-3)

    def test_perfect_line_recovered_exactly(self):
        rows = [
            DimensionCoefficients(d, x=0.05 * d + 0.01, y=0.04 * d + 0.5, c=2.0 * d + 1.0)
            for d in range(2, 8)
        ]
        model = fit_linear_laws(rows)
        assert model.x_law.slope == pytest.approx(0.05, abs=1e-12)
        assert model.x_law.r_squared == pytest.approx(1.0, abs=1e-12)
        assert model.c_law.intercept == pytest.approx(1.0, abs=1e-10)

    def test_underdetermined(self):
        rows = [DEFAULT_MODEL.row_for(2), DEFAULT_MODEL.row_for(3)]
        with pytest.raises(UnidentifiableFit):
            fit_linear_laws(rows)

    def test_n_exponent_dominates_l_exponent(self):
        # the accuracy-decreases-with-N signature: every calibration row,
        # refit from its own synthetic grid, keeps y above x
        for row in DEFAULT_MODEL.rows:
            samples = synthetic_samples(row.d, row.x, row.y, row.c, (100, 500, 2000, 10000))
            refit = fit_power_law(samples, row.d).coefficients
            assert refit.y > refit.x


class TestReportJson:
    def test_written_fields(self, tmp_path):
        row = DEFAULT_MODEL.row_for(2)
        samples = synthetic_samples(2, row.x, row.y, row.c, (100, 500, 2000, 10000))
        report = fit_power_law(samples, 2)
        path = tmp_path / "report.json"
        write_fit_report_json(report, path)
        import json

        payload = json.loads(path.read_text())
        assert set(payload) == {
            "d", "x", "y", "c", "r2_linear_scale", "r2_log_scale", "residuals", "excluded",
        }
        assert payload["d"] == 2
        assert math.isclose(payload["x"], row.x, abs_tol=1e-9)
