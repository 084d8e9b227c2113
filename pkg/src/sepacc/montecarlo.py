"""Stochastic oracles for the separation theory.

Two simulators, deliberately independent of the closed forms they check:

* ``simulate_bins`` plays the idealized occupancy game directly: N balls
  thrown uniformly into S equally likely bins, recording per trial the
  fraction of balls alone in their bin (the separation ratio gamma), the
  number of occupied bins, and whether the trial separated completely.

* ``simulate_hyperplanes`` plays the geometric original: N uniform points
  in the unit cube, L random hyperplanes, one region code per point, with
  gamma the fraction of points whose code is unique.

Determinism contract: identical (parameters, trials, seed) produce
byte-identical outcomes.  Trials are partitioned into fixed-size chunks,
each driven by its own spawned stream, so results do not depend on how
the chunks are scheduled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import RngSeed
from .theory import ProblemSpec

__all__ = [
    "SeparationOutcome",
    "HyperplaneArrangement",
    "GammaHistogram",
    "simulate_bins",
    "sample_arrangement",
    "region_code",
    "simulate_hyperplanes",
    "empirical_gamma_distribution",
    "write_outcome_csv",
    "read_outcome_csv",
    "outcome_summary",
]

# Target elements per bins chunk; a pure function of N so chunking (and
# therefore every drawn number) is independent of scheduling.
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class SeparationOutcome:
    """Per-trial separation measurements plus the derived aggregates."""

    trials: int
    gamma: np.ndarray  # separation ratio per trial, in [0, 1]
    distinct_cells: np.ndarray  # occupied-cell count per trial

    def __post_init__(self) -> None:
        if self.trials != len(self.gamma) or self.trials != len(self.distinct_cells):
            raise ValueError("per-trial arrays must match the trial count")

    @property
    def complete(self) -> np.ndarray:
        return self.gamma == 1.0

    @property
    def complete_fraction(self) -> float:
        return float(self.complete.mean())

    @property
    def standard_error(self) -> float:
        p = self.complete_fraction
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def mean_gamma(self) -> float:
        return float(self.gamma.mean())

    @property
    def distinct_cells_mean(self) -> float:
        return float(self.distinct_cells.mean())


@dataclass(frozen=True)
class HyperplaneArrangement:
    """L hyperplanes w_k . x + b_k = 0 with unit normals."""

    normals: np.ndarray  # (L, d)
    offsets: np.ndarray  # (L,)

    def __post_init__(self) -> None:
        if self.normals.ndim != 2 or self.offsets.shape != (self.normals.shape[0],):
            raise ValueError("normals must be (L, d) with offsets of length L")
        norms = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise ValueError("all normals must have unit length (within 1e-12)")

    @property
    def n_planes(self) -> int:
        return self.normals.shape[0]

    @property
    def dim(self) -> int:
        return self.normals.shape[1]


def _bins_chunk_sizes(N: int, trials: int) -> list[int]:
    per_chunk = max(1, _CHUNK_ELEMENTS // max(N, 1))
    sizes = []
    left = trials
    while left > 0:
        take = min(per_chunk, left)
        sizes.append(take)
        left -= take
    return sizes


def simulate_bins(S: int, N: int, trials: int, seed: RngSeed) -> SeparationOutcome:
    """Throw N balls into S uniform bins, `trials` times.

    gamma for a trial is the fraction of balls that are the sole occupant
    of their bin; a trial is complete iff gamma == 1, so the empirical
    complete fraction converges to the exact occupancy probability
    P_c(S, N).
    """
    if S < 1 or N < 1 or trials < 1:
        raise ValueError(f"S, N, trials must be positive, got {S}, {N}, {trials}")
    gammas = np.empty(trials, dtype=np.float64)
    distinct = np.empty(trials, dtype=np.int64)
    row = 0
    for chunk_index, size in enumerate(_bins_chunk_sizes(N, trials)):
        rng = seed.spawn(chunk_index).generator()
        bins = rng.integers(0, S, size=(size, N))
        bins.sort(axis=1)
        if N == 1:
            distinct[row : row + size] = 1
            gammas[row : row + size] = 1.0
        else:
            eq = bins[:, 1:] == bins[:, :-1]
            distinct[row : row + size] = N - eq.sum(axis=1)
            crowded = np.zeros((size, N), dtype=bool)
            crowded[:, 1:] |= eq
            crowded[:, :-1] |= eq
            gammas[row : row + size] = (N - crowded.sum(axis=1)) / N
        row += size
    return SeparationOutcome(trials=trials, gamma=gammas, distinct_cells=distinct)


def _draw_arrangement(rng: np.random.Generator, d: int, L: int) -> HyperplaneArrangement:
    normals = rng.standard_normal((L, d))
    norms = np.linalg.norm(normals, axis=1)
    while np.any(norms < 1e-12):  # probability ~0, but keeps the contract total
        bad = norms < 1e-12
        normals[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(normals, axis=1)
    normals /= norms[:, None]
    through = rng.random((L, d))
    offsets = -np.einsum("ij,ij->i", normals, through)
    return HyperplaneArrangement(normals=normals, offsets=offsets)


def sample_arrangement(d: int, L: int, seed: RngSeed) -> HyperplaneArrangement:
    """Draw L random hyperplanes: normals uniform on the unit sphere, each
    plane passing through an independent uniform point of [0, 1)^d, so
    every plane actually cuts the data cube."""
    if d < 1 or L < 1:
        raise ValueError(f"d and L must be >= 1, got d={d}, L={L}")
    return _draw_arrangement(seed.generator(), d, L)


def region_code(x: np.ndarray, arrangement: HyperplaneArrangement) -> str:
    """Binary signature of a point: bit k is '1' iff w_k . x + b_k > 0.

    Points exactly on a plane take the '0' side.  Equal codes <=> same
    region of the arrangement.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (arrangement.dim,):
        raise ValueError(
            f"point has shape {x.shape}, arrangement expects ({arrangement.dim},)"
        )
    bits = (arrangement.normals @ x + arrangement.offsets) > 0.0
    return "".join("1" if b else "0" for b in bits)


def _codes_for_points(
    points: np.ndarray, arrangement: HyperplaneArrangement
) -> np.ndarray:
    """Pack the per-point sign patterns into rows of bytes for fast uniqueness."""
    signs = (points @ arrangement.normals.T + arrangement.offsets) > 0.0
    return np.packbits(signs, axis=1)


def simulate_hyperplanes(
    spec: ProblemSpec, trials: int, seed: RngSeed
) -> SeparationOutcome:
    """Geometric separation experiment.

    Each trial draws N fresh uniform points in [0, 1)^d and a fresh
    arrangement of L planes, computes the region code of every point, and
    records gamma = (#points with a unique code) / N together with the
    number of distinct codes.  Complete separation is gamma == 1, i.e.
    distinct codes == N.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    N = spec.N
    gammas = np.empty(trials, dtype=np.float64)
    distinct = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        rng = seed.spawn(t).generator()
        points = rng.random((N, spec.d))
        arrangement = _draw_arrangement(rng, spec.d, spec.L)
        packed = _codes_for_points(points, arrangement)
        _, counts = np.unique(packed, axis=0, return_counts=True)
        distinct[t] = len(counts)
        gammas[t] = (counts == 1).sum() / N
    return SeparationOutcome(trials=trials, gamma=gammas, distinct_cells=distinct)


@dataclass(frozen=True)
class GammaHistogram:
    """Continuous-part histogram of gamma plus the separately held atom at 1.

    ``density`` integrates (sum density * bin width) to the continuous
    mass, so total probability is recovered as that integral plus
    ``point_mass``; by construction the two add to exactly 1.
    """

    bin_edges: np.ndarray  # length bins + 1, spanning [0, 1)
    density: np.ndarray  # length bins
    point_mass: float

    @property
    def total_mass(self) -> float:
        widths = np.diff(self.bin_edges)
        return float((self.density * widths).sum() + self.point_mass)


def empirical_gamma_distribution(
    outcome: SeparationOutcome, bins: int = 50
) -> GammaHistogram:
    """Histogram the gamma samples below 1 as a density on [0, 1) and report
    the gamma == 1 frequency as a point mass, matching the split between
    ``gamma_density`` and ``gamma_point_mass`` in the theory module."""
    if outcome.trials < 1:
        raise ValueError("outcome has no samples")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    g = outcome.gamma
    continuous = g[g < 1.0]
    point_mass = float((g == 1.0).sum() / outcome.trials)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(continuous, bins=edges)
    width = 1.0 / bins
    density = counts / (outcome.trials * width)
    return GammaHistogram(bin_edges=edges, density=density, point_mass=point_mass)


def write_outcome_csv(outcome: SeparationOutcome, path: str | Path) -> None:
    """Write one row per trial: trial, gamma, distinct_cells, complete."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "gamma", "distinct_cells", "complete"])
        for t in range(outcome.trials):
            writer.writerow(
                [
                    t,
                    repr(float(outcome.gamma[t])),
                    int(outcome.distinct_cells[t]),
                    int(outcome.gamma[t] == 1.0),
                ]
            )


def read_outcome_csv(path: str | Path) -> SeparationOutcome:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["trial", "gamma", "distinct_cells", "complete"]:
            raise ValueError(f"unexpected outcome CSV header: {header}")
        gammas: list[float] = []
        distinct: list[int] = []
        for fields in reader:
            gammas.append(float(fields[1]))
            distinct.append(int(fields[2]))
    return SeparationOutcome(
        trials=len(gammas),
        gamma=np.array(gammas, dtype=np.float64),
        distinct_cells=np.array(distinct, dtype=np.int64),
    )


def outcome_summary(outcome: SeparationOutcome) -> dict:
    """JSON-ready aggregate view of an outcome."""
    return {
        "trials": outcome.trials,
        "complete_fraction": outcome.complete_fraction,
        "se": outcome.standard_error,
        "mean_gamma": outcome.mean_gamma,
    }
