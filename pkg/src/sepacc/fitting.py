"""Recover the empirical index law from measured training accuracies.

Pipeline: each measured accuracy alpha is pulled back through the
accuracy map to a separation index b, stored as 1/b so that perfectly
memorized runs (alpha = 1) become the finite value 0 instead of b = inf.
The power law

    1/b = (1/c_d) * N^y_d / L^x_d

is then linear in logs, so (x_d, y_d, c_d) come from closed-form ordinary
least squares on ln(1/b) against (ln L, ln N).  Saturated samples
(1/b = 0) cannot enter a log fit and are excluded with an explicit
reason; R^2 is reported both on the 1/b scale (primary) and on the log
scale.  A second OLS pass fits each coefficient linearly against d.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import CoefficientModel, DimensionCoefficients, LinearLaw
from .theory import ProblemSpec, invert_expected_accuracy
from .trainer import TrainingRecord

__all__ = [
    "FitSample",
    "ExcludedSample",
    "FitReport",
    "UnidentifiableFit",
    "accuracy_grid_to_samples",
    "fit_power_law",
    "fit_linear_laws",
    "write_fit_report_json",
]

# Accuracies this close to 1 are treated as exactly 1 (saturated).
SATURATION_TOL = 1e-12

# Reject design matrices whose conditioning would make the OLS meaningless.
_MAX_CONDITION = 1e8


class UnidentifiableFit(ValueError):
    """The sample design cannot identify the power law (too few samples or
    collinear (ln N, ln L))."""


@dataclass(frozen=True)
class FitSample:
    """One grid cell ready for fitting: the measured accuracy and its
    inverse separation index (0 encodes saturation)."""

    spec: ProblemSpec
    measured_accuracy: float
    inverse_b: float

    def __post_init__(self) -> None:
        if self.inverse_b < 0.0:
            raise ValueError(f"inverse_b must be >= 0, got {self.inverse_b!r}")


@dataclass(frozen=True)
class ExcludedSample:
    spec: ProblemSpec
    measured_accuracy: float
    reason: str


@dataclass(frozen=True)
class FitReport:
    coefficients: DimensionCoefficients
    r_squared: float  # on the 1/b scale
    r_squared_log: float
    residuals: tuple[float, ...]  # observed - predicted 1/b, fitted samples only
    excluded: tuple[ExcludedSample, ...]


def accuracy_grid_to_samples(
    records: list[TrainingRecord],
) -> tuple[list[FitSample], list[ExcludedSample]]:
    """Convert training records to fit samples.

    Mean accuracies at or below chance (0.5) cannot be inverted and are
    excluded with a reason rather than failing the batch; accuracies
    within SATURATION_TOL of 1 map to inverse_b = 0.
    """
    samples: list[FitSample] = []
    excluded: list[ExcludedSample] = []
    for record in records:
        alpha = record.training_accuracy
        if alpha <= 0.5:
            excluded.append(ExcludedSample(record.spec, alpha, "below-chance"))
            continue
        if alpha >= 1.0 - SATURATION_TOL:
            inverse_b = 0.0
        else:
            inverse_b = 1.0 / invert_expected_accuracy(alpha)
        samples.append(FitSample(record.spec, alpha, inverse_b))
    return samples, excluded


def fit_power_law(samples: list[FitSample], d: int) -> FitReport:
    """Closed-form OLS fit of ln(1/b) = -ln c - x ln L + y ln N.

    Saturated samples (inverse_b == 0) are excluded from the regression
    and reported; at least 4 active samples with a well-conditioned,
    non-collinear (ln L, ln N) design are required.
    """
    for s in samples:
        if s.spec.d != d:
            raise ValueError(f"sample with d={s.spec.d} in a fit for d={d}")
    active = [s for s in samples if s.inverse_b > 0.0]
    excluded = tuple(
        ExcludedSample(s.spec, s.measured_accuracy, "saturated")
        for s in samples
        if s.inverse_b == 0.0
    )
    if len(active) < 4:
        raise UnidentifiableFit(
            f"need at least 4 unsaturated samples to fit, got {len(active)}"
        )
    log_l = np.array([math.log(s.spec.L) for s in active])
    log_n = np.array([math.log(s.spec.N) for s in active])
    design = np.column_stack([np.ones(len(active)), log_l, log_n])
    condition = np.linalg.cond(design)
    if not np.isfinite(condition) or condition > _MAX_CONDITION:
        raise UnidentifiableFit(
            f"(ln L, ln N) design is degenerate (condition {condition:.3g})"
        )
    target = np.log([s.inverse_b for s in active])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    intercept, coeff_l, coeff_n = (float(v) for v in coef)
    x = -coeff_l
    y = coeff_n
    c = math.exp(-intercept)

    predicted_log = design @ coef
    observed = np.array([s.inverse_b for s in active])
    predicted = np.exp(predicted_log)
    r2 = _r_squared(observed, predicted)
    r2_log = _r_squared(target, predicted_log)
    coefficients = DimensionCoefficients(d=d, x=x, y=y, c=c, r_squared=r2, source="fit")
    return FitReport(
        coefficients=coefficients,
        r_squared=r2,
        r_squared_log=r2_log,
        residuals=tuple(float(v) for v in (observed - predicted)),
        excluded=excluded,
    )


def _r_squared(observed: np.ndarray, predicted: np.ndarray) -> float:
    ss_res = float(np.sum((observed - predicted) ** 2))
    ss_tot = float(np.sum((observed - observed.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def _ols_line(xs: np.ndarray, ys: np.ndarray) -> LinearLaw:
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = slope * xs + intercept
    return LinearLaw(float(slope), float(intercept), _r_squared(ys, predicted))


def fit_linear_laws(table: list[DimensionCoefficients]) -> CoefficientModel:
    """OLS of each of x_d, y_d, c_d against d over a coefficient table."""
    dims = [row.d for row in table]
    if len(set(dims)) < 3:
        raise UnidentifiableFit(
            f"need at least 3 distinct dimensions to fit linear laws, got {sorted(set(dims))}"
        )
    ds = np.array(dims, dtype=np.float64)
    return CoefficientModel(
        rows=tuple(sorted(table, key=lambda r: r.d)),
        x_law=_ols_line(ds, np.array([r.x for r in table])),
        y_law=_ols_line(ds, np.array([r.y for r in table])),
        c_law=_ols_line(ds, np.array([r.c for r in table])),
        version="fit",
    )


def write_fit_report_json(report: FitReport, path: str | Path) -> None:
    payload = {
        "d": report.coefficients.d,
        "x": report.coefficients.x,
        "y": report.coefficients.y,
        "c": report.coefficients.c,
        "r2_linear_scale": report.r_squared,
        "r2_log_scale": report.r_squared_log,
        "residuals": list(report.residuals),
        "excluded": [
            {
                "d": e.spec.d,
                "N": e.spec.N,
                "L": e.spec.L,
                "accuracy": e.measured_accuracy,
                "reason": e.reason,
            }
            for e in report.excluded
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
