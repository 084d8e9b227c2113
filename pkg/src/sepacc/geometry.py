"""Region counting for hyperplane arrangements and the separation-index laws.

L hyperplanes in general position cut R^d into at most

    S(L, d) = sum_{i=0}^{d} C(L, i)

regions (the classical arrangement bound), with the convenient smooth
approximation S ~ L^d / d!.  Matching S against the occupancy scaling
S = b*N^2 gives the purely theoretical index

    b = L^d / (d! N^2),

while the empirically corrected law replaces the exponents with fitted
per-dimension constants:

    b = c_d * L^x_d / N^y_d.

The calibration table for d = 2..10 ships with the package (see
``DEFAULT_MODEL``), together with linear-in-d laws that extend each
coefficient beyond the calibrated range.  Everything involving L^d runs
in the log domain; the exact region counts use Python integers and never
overflow.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from .special import log_binomial, log_factorial
from .theory import ProblemSpec

__all__ = [
    "DimensionCoefficients",
    "LinearLaw",
    "CoefficientModel",
    "LayerWidths",
    "DEFAULT_MODEL",
    "max_partitions_exact",
    "log_max_partitions",
    "max_partitions_approx",
    "ensemble_index_theoretical",
    "ensemble_index_empirical",
    "coefficients_for_dimension",
    "multilayer_regions",
    "plane_capacity",
]


@dataclass(frozen=True)
class DimensionCoefficients:
    """Fitted constants (x, y, c) of the empirical index law at one dimension.

    x is the L exponent, y the N exponent, c the multiplier; r_squared is
    the quality of the fit that produced them (None when unknown).
    ``source`` records whether the row came from the calibration table, a
    linear-law extrapolation, or a fresh fit.
    """

    d: int
    x: float
    y: float
    c: float
    r_squared: float | None = None
    source: str = "table"

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"coefficients are only defined for d >= 2, got d={self.d}")
        if self.c <= 0.0:
            raise ValueError(f"multiplier c must be positive, got {self.c!r}")
        if self.x < 0.0:
            raise ValueError(f"L exponent x must be >= 0, got {self.x!r}")
        if self.y <= 0.0:
            raise ValueError(f"N exponent y must be positive, got {self.y!r}")


@dataclass(frozen=True)
class LinearLaw:
    """One coefficient as a linear function of dimension: value = slope*d + intercept."""

    slope: float
    intercept: float
    r_squared: float | None = None

    def __call__(self, d: int) -> float:
        return self.slope * d + self.intercept


@dataclass(frozen=True)
class CoefficientModel:
    """Per-dimension coefficient table plus linear-in-d laws for the rest.

    The table rows are authoritative inside their range; the three laws
    (for x, y, c respectively) extend the model to any d >= 2, at the cost
    of being an extrapolation outside the calibrated dimensions.
    """

    rows: tuple[DimensionCoefficients, ...]
    x_law: LinearLaw
    y_law: LinearLaw
    c_law: LinearLaw
    version: str = "unversioned"

    def __post_init__(self) -> None:
        seen = [r.d for r in self.rows]
        if len(set(seen)) != len(seen):
            raise ValueError(f"duplicate dimension rows in coefficient model: {seen}")

    def row_for(self, d: int) -> DimensionCoefficients | None:
        for row in self.rows:
            if row.d == d:
                return row
        return None

    def from_laws(self, d: int) -> DimensionCoefficients:
        if d < 2:
            raise ValueError(f"coefficient laws are only defined for d >= 2, got d={d}")
        return DimensionCoefficients(
            d=d, x=self.x_law(d), y=self.y_law(d), c=self.c_law(d), source="linear-law"
        )

    def to_text(self) -> str:
        """Serialize as the plain-text table format::

            d,x,y,c,r2
            2,0.0744,...
            xlaw,<slope>,<intercept>
            ylaw,<slope>,<intercept>
            claw,<slope>,<intercept>
        """
        out = io.StringIO()
        out.write("d,x,y,c,r2\n")
        for row in sorted(self.rows, key=lambda r: r.d):
            r2 = "" if row.r_squared is None else repr(float(row.r_squared))
            out.write(
                f"{row.d},{float(row.x)!r},{float(row.y)!r},{float(row.c)!r},{r2}\n"
            )
        out.write(f"xlaw,{float(self.x_law.slope)!r},{float(self.x_law.intercept)!r}\n")
        out.write(f"ylaw,{float(self.y_law.slope)!r},{float(self.y_law.intercept)!r}\n")
        out.write(f"claw,{float(self.c_law.slope)!r},{float(self.c_law.intercept)!r}\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str, version: str = "loaded") -> "CoefficientModel":
        rows: list[DimensionCoefficients] = []
        laws: dict[str, LinearLaw] = {}
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "d,x,y,c,r2":
            raise ValueError("coefficient model text must start with header 'd,x,y,c,r2'")
        for line in lines[1:]:
            fields = line.split(",")
            if fields[0] in ("xlaw", "ylaw", "claw"):
                if len(fields) != 3:
                    raise ValueError(f"malformed law line: {line!r}")
                laws[fields[0]] = LinearLaw(float(fields[1]), float(fields[2]))
            else:
                if len(fields) != 5:
                    raise ValueError(f"malformed coefficient row: {line!r}")
                r2 = None if fields[4] == "" else float(fields[4])
                rows.append(
                    DimensionCoefficients(
                        d=int(fields[0]),
                        x=float(fields[1]),
                        y=float(fields[2]),
                        c=float(fields[3]),
                        r_squared=r2,
                    )
                )
        missing = {"xlaw", "ylaw", "claw"} - set(laws)
        if missing:
            raise ValueError(f"coefficient model text is missing law lines: {sorted(missing)}")
        return cls(
            rows=tuple(rows),
            x_law=laws["xlaw"],
            y_law=laws["ylaw"],
            c_law=laws["claw"],
            version=version,
        )


@dataclass(frozen=True)
class LayerWidths:
    """Widths of a fully-connected stack: input size n_0 and hidden widths n_1..n_k."""

    input_size: int
    hidden: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.input_size < 1:
            raise ValueError(f"input size must be >= 1, got {self.input_size}")
        if len(self.hidden) < 1 or any(w < 1 for w in self.hidden):
            raise ValueError(f"need at least one hidden width, all >= 1, got {self.hidden}")


# Calibration table for d = 2..10 and the linear laws fitted to its columns.
# The r_squared column reports the quality of the per-dimension power-law fit
# that produced each row.
DEFAULT_MODEL = CoefficientModel(
    rows=(
        DimensionCoefficients(2, 0.0744, 0.6017, 8.4531, 0.998),
        DimensionCoefficients(3, 0.1269, 0.6352, 15.5690, 0.965),
        DimensionCoefficients(4, 0.2802, 0.7811, 47.3261, 0.961),
        DimensionCoefficients(5, 0.5326, 0.8515, 28.4495, 0.996),
        DimensionCoefficients(6, 0.4130, 0.8686, 61.0874, 0.996),
        DimensionCoefficients(7, 0.4348, 0.8239, 33.4448, 0.977),
        DimensionCoefficients(8, 0.5278, 0.9228, 61.3121, 0.996),
        DimensionCoefficients(9, 0.7250, 1.0310, 82.5083, 0.995),
        DimensionCoefficients(10, 0.6633, 1.0160, 91.4913, 0.995),
    ),
    x_law=LinearLaw(0.0758, -0.0349, 0.858),
    y_law=LinearLaw(0.0517, 0.5268, 0.902),
    c_law=LinearLaw(9.4323, -8.8558, 0.804),
    version="builtin-1",
)


def max_partitions_exact(L: int, d: int) -> int:
    """Exact maximum region count sum_{i<=d} C(L, i) of L hyperplanes in R^d.

    Equals 2^L whenever L <= d.  Python integers make this exact at any
    size; use :func:`log_max_partitions` when only the magnitude matters.
    """
    if L < 1 or d < 1:
        raise ValueError(f"L and d must be >= 1, got L={L}, d={d}")
    return sum(math.comb(L, i) for i in range(min(L, d) + 1))


def log_max_partitions(L: int, d: int) -> float:
    """ln of :func:`max_partitions_exact`, computed by log-sum-exp."""
    if L < 1 or d < 1:
        raise ValueError(f"L and d must be >= 1, got L={L}, d={d}")
    logs = [log_binomial(L, i) for i in range(min(L, d) + 1)]
    top = max(logs)
    return top + math.log(sum(math.exp(v - top) for v in logs))


def max_partitions_approx(L: int, d: int) -> float:
    """Smooth region-count approximation L^d / d! (a tight upper bound for
    L a few times larger than d)."""
    if L < 1 or d < 1:
        raise ValueError(f"L and d must be >= 1, got L={L}, d={d}")
    return math.exp(d * math.log(L) - log_factorial(d))


def ensemble_index_theoretical(spec: ProblemSpec) -> float:
    """Purely theoretical separation index b = L^d / (d! N^2)."""
    return math.exp(
        spec.d * math.log(spec.L) - log_factorial(spec.d) - 2.0 * math.log(spec.N)
    )


def ensemble_index_empirical(spec: ProblemSpec, coeffs: DimensionCoefficients) -> float:
    """Empirically corrected index b = c_d * L^x_d / N^y_d."""
    if coeffs.d != spec.d:
        raise ValueError(
            f"coefficient row is for d={coeffs.d} but the problem has d={spec.d}"
        )
    return math.exp(
        math.log(coeffs.c) + coeffs.x * math.log(spec.L) - coeffs.y * math.log(spec.N)
    )


def coefficients_for_dimension(
    d: int,
    model: CoefficientModel | None = None,
    mode: str = "table-first",
) -> DimensionCoefficients:
    """Look up (x_d, y_d, c_d) for a dimension.

    ``table-first`` returns the calibration row when one exists and falls
    back to the linear laws otherwise; ``linear-law`` always evaluates the
    laws.  Rows produced by the laws carry source="linear-law" so callers
    can flag extrapolated estimates.
    """
    if d < 2:
        raise ValueError(f"empirical coefficients require d >= 2, got d={d}")
    if mode not in ("table-first", "linear-law"):
        raise ValueError(f"unknown coefficient mode {mode!r}")
    model = DEFAULT_MODEL if model is None else model
    if mode == "table-first":
        row = model.row_for(d)
        if row is not None:
            return row
    return model.from_laws(d)


def multilayer_regions(widths: LayerWidths) -> int:
    """Region count of a deep stack:

        (prod_{i=1}^{k-1} floor(n_i / n_0)) * sum_{i=0}^{n_0} C(n_k, i).

    For a single hidden layer this reduces to
    ``max_partitions_exact(n_1, n_0)``.
    """
    n0 = widths.input_size
    hidden = widths.hidden
    factor = 1
    for w in hidden[:-1]:
        factor *= w // n0
    tail = sum(math.comb(hidden[-1], i) for i in range(min(hidden[-1], n0) + 1))
    return factor * tail


def plane_capacity(N: int, d: int) -> float:
    """Probability that a random balanced dichotomy of N points in general
    position in R^d is linearly separable:

        1                                  for N <= d + 1,
        2^(1-N) * sum_{i<=d} C(N-1, i)     otherwise,

    evaluated by log-sum-exp so N in the thousands stays exact to full
    double precision instead of underflowing.
    """
    if N < 1 or d < 1:
        raise ValueError(f"N and d must be >= 1, got N={N}, d={d}")
    if N <= d + 1:
        return 1.0
    logs = [log_binomial(N - 1, i) for i in range(d + 1)]
    top = max(logs)
    log_sum = top + math.log(sum(math.exp(v - top) for v in logs))
    return math.exp(math.log(2.0) + log_sum - N * math.log(2.0))
