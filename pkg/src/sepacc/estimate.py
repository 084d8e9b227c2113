"""The headline API: training-accuracy estimates from (d, N, L) alone."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    DEFAULT_MODEL,
    CoefficientModel,
    DimensionCoefficients,
    coefficients_for_dimension,
    ensemble_index_empirical,
    ensemble_index_theoretical,
)
from .theory import ProblemSpec, expected_accuracy

__all__ = ["ESTIMATE_MODES", "Estimate", "estimate_accuracy"]

ESTIMATE_MODES = ("theoretical", "empirical-table", "empirical-law")


@dataclass(frozen=True)
class Estimate:
    """One accuracy estimate: the separation index b, the mapped accuracy,
    and whether the coefficients were extrapolated beyond calibration."""

    spec: ProblemSpec
    mode: str
    b: float
    accuracy: float
    extrapolated: bool
    coefficients: DimensionCoefficients | None = None

    def as_dict(self) -> dict:
        return {
            "d": self.spec.d,
            "N": self.spec.N,
            "L": self.spec.L,
            "mode": self.mode,
            "b": self.b,
            "expected_accuracy": self.accuracy,
            "extrapolated": self.extrapolated,
        }


def estimate_accuracy(
    d: int,
    N: int,
    L: int,
    mode: str = "theoretical",
    model: CoefficientModel | None = None,
) -> Estimate:
    """Estimate the training accuracy of a d-L-1 network on N balanced
    random points.

    ``theoretical`` uses b = L^d/(d! N^2); the empirical modes use the
    fitted law b = c_d L^x/N^y, taking coefficients from the calibration
    table (``empirical-table``, falling back to the linear laws outside
    it) or always from the linear-in-d laws (``empirical-law``).
    Estimates whose coefficients came from the laws are flagged as
    extrapolated.
    """
    if mode not in ESTIMATE_MODES:
        raise ValueError(f"mode must be one of {ESTIMATE_MODES}, got {mode!r}")
    spec = ProblemSpec(d=d, N=N, L=L)
    if mode == "theoretical":
        b = ensemble_index_theoretical(spec)
        return Estimate(spec, mode, b, expected_accuracy(b), extrapolated=False)
    lookup = "table-first" if mode == "empirical-table" else "linear-law"
    coeffs = coefficients_for_dimension(d, model=model, mode=lookup)
    b = ensemble_index_empirical(spec, coeffs)
    used = model if model is not None else DEFAULT_MODEL
    return Estimate(
        spec,
        mode,
        b,
        expected_accuracy(b),
        extrapolated=used.row_for(d) is None,
        coefficients=coeffs,
    )
