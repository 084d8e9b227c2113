"""Occupancy probabilities and the accuracy map, checked against
enumeration, exact rational arithmetic, quadrature, and Monte Carlo."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from sepacc.montecarlo import simulate_bins
from sepacc.rng import RngSeed
from sepacc.theory import (
    SATURATED_INDEX,
    ProblemSpec,
    expected_accuracy,
    expected_gamma,
    gamma_density,
    gamma_point_mass,
    invert_expected_accuracy,
    p_complete_exact,
    p_complete_limit,
    p_complete_stirling,
    p_incomplete_exact,
    p_incomplete_limit,
)


def enumerate_complete_probability(S: int, N: int) -> float:
    """Brute force over all S^N assignments."""
    hits = sum(
        1 for assignment in itertools.product(range(S), repeat=N) if len(set(assignment)) == N
    )
    return hits / S**N


def rational_complete_probability(S: int, N: int) -> float:
    """Exact value of S!/((S-N)! S^N) in big-integer rationals."""
    return float(
        Fraction(math.factorial(S), math.factorial(S - N)) / Fraction(S) ** N
    )


class TestProblemSpec:
    def test_valid(self):
        spec = ProblemSpec(2, 100, 50)
        assert (spec.d, spec.N, spec.L) == (2, 100, 50)

    @pytest.mark.parametrize("d,N,L", [(0, 10, 5), (2, 1, 5), (2, 10, 0)])
    def test_invalid(self, d, N, L):
        with pytest.raises(ValueError):
            ProblemSpec(d, N, L)


class TestCompleteExact:
    def test_one_ball_one_bin(self):
        assert p_complete_exact(1, 1) == 1.0

    def test_enumeration_oracle(self):
        assert p_complete_exact(2, 2) == pytest.approx(enumerate_complete_probability(2, 2))
        assert p_complete_exact(4, 2) == pytest.approx(enumerate_complete_probability(4, 2))
        assert p_complete_exact(5, 3) == pytest.approx(
            enumerate_complete_probability(5, 3), rel=1e-12
        )

    def test_rational_oracle(self):
        for S, N in [(10, 3), (100, 10), (300, 50)]:
            assert p_complete_exact(S, N) == pytest.approx(
                rational_complete_probability(S, N), rel=1e-12
            )

    def test_pigeonhole_returns_zero(self):
        assert p_complete_exact(3, 4) == 0.0
        assert p_complete_exact(1, 2) == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            p_complete_exact(0, 1)


class TestCompleteStirling:
    def test_agrees_with_exact_at_scale(self):
        exact = p_complete_exact(10000, 100)
        approx = p_complete_stirling(10000.0, 100)
        assert abs(approx - exact) / exact <= 0.01
        assert exact == pytest.approx(0.608566, abs=1e-3)

    def test_one_percent_band_on_grid(self):
        # N >= 100, S >= N^2
        for N in [100, 200, 500]:
            for factor in [1, 2, 10]:
                S = factor * N * N
                exact = p_complete_exact(S, N)
                approx = p_complete_stirling(float(S), N)
                assert abs(approx - exact) / exact <= 0.01

    def test_a_one_regime_vanishes(self):
        # S = 10 N: probability collapses as N grows
        values = [p_complete_stirling(10.0 * N, N) for N in [10**3, 10**4, 10**5]]
        assert values[0] > values[1] > values[2]
        assert values[-1] < 1e-300

    def test_critical_exponent_value(self):
        # S = 2 N^2 approaches e^{-1/4}
        v = p_complete_stirling(2.0 * 1000**2, 1000)
        assert v == pytest.approx(math.exp(-0.25), rel=0.005)

    def test_requires_s_above_n(self):
        with pytest.raises(ValueError):
            p_complete_stirling(100.0, 100)


class TestCompleteLimit:
    def test_critical(self):
        assert p_complete_limit(2.0, 10.0) == pytest.approx(math.exp(-0.05), abs=1e-15)

    def test_subcritical(self):
        assert p_complete_limit(1.5, 7.0) == 0.0
        assert p_complete_limit(1.0, 2.0) == 0.0

    def test_supercritical(self):
        assert p_complete_limit(3.0, 0.1) == 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            p_complete_limit(0.9, 1.0)
        with pytest.raises(ValueError):
            p_complete_limit(2.0, 0.0)

    def test_limit_consistency_of_stirling_form(self):
        # evaluating the finite-N form at N = 1e6 reproduces all three regimes
        N = 10**6
        for b in (1.0, 10.0):
            assert p_complete_stirling(b * N**1.5, N) <= 1e-6
            assert p_complete_stirling(b * N**2.5, N) >= 1.0 - 1e-3
            assert p_complete_stirling(b * N**2, N) == pytest.approx(
                math.exp(-1.0 / (2.0 * b)), abs=1e-3
            )


class TestIncompleteExact:
    def test_gamma_zero_is_one(self):
        for S, N in [(5, 3), (100, 10), (10**6, 1000)]:
            assert p_incomplete_exact(S, N, 0.0) == 1.0

    def test_gamma_one_is_complete(self):
        assert p_incomplete_exact(100, 10, 1.0) == pytest.approx(
            p_complete_exact(100, 10), rel=1e-14
        )

    def test_frozen_value(self):
        # log-domain evaluation frozen from the rational identity
        # P = prod_{i<5}(1 - i/100) * (0.95)^5
        assert p_incomplete_exact(100, 10, 0.5) == pytest.approx(0.6990725736918, abs=1e-12)

    def test_rational_oracle(self):
        S, N, m = 100, 10, 5
        exact = Fraction(math.factorial(S), math.factorial(S - m))
        exact *= Fraction(S - m) ** (N - m)
        exact /= Fraction(S) ** N
        assert p_incomplete_exact(S, N, 0.5) == pytest.approx(float(exact), rel=1e-12)

    def test_monte_carlo_subset_oracle(self):
        # The closed form is the probability that a *designated* set of
        # m = round(gamma N) balls each end up alone; measure that event
        # directly with the bins thrower.
        S, N, gamma, trials = 100, 10, 0.5, 200_000
        m = round(gamma * N)
        rng = RngSeed(2024, 1).generator()
        bins = rng.integers(0, S, size=(trials, N))
        first = bins[:, :m]
        rest = bins[:, m:]
        distinct_first = np.array([len(set(row)) == m for row in first])
        no_overlap = ~np.any(first[:, :, None] == rest[:, None, :], axis=(1, 2))
        hit_rate = float(np.mean(distinct_first & no_overlap))
        p = p_incomplete_exact(S, N, gamma)
        sigma = math.sqrt(p * (1 - p) / trials)
        assert abs(hit_rate - p) <= 3 * sigma

    def test_count_exceeding_cells_rejected(self):
        with pytest.raises(ValueError):
            p_incomplete_exact(4, 10, 1.0)


class TestIncompleteLimit:
    def test_gamma_zero(self):
        assert p_incomplete_limit(3.7, 0.0) == 1.0

    def test_matches_complete_limit_at_one(self):
        assert p_incomplete_limit(10.0, 1.0) == pytest.approx(math.exp(-0.05), abs=1e-15)

    def test_frozen_half(self):
        assert p_incomplete_limit(10.0, 0.5) == pytest.approx(0.9631944177208218, abs=1e-12)

    def test_against_finite_n_evaluation(self):
        # S = b N^2 with N = 2000 is already deep in the limit regime
        b, N = 10.0, 2000
        finite = p_incomplete_exact(int(b * N * N), N, 0.5)
        assert finite == pytest.approx(p_incomplete_limit(b, 0.5), abs=1e-3)

    def test_decreasing_in_gamma(self):
        values = [p_incomplete_limit(1.0, g) for g in np.linspace(0, 1, 11)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestGammaDistribution:
    def test_density_at_zero(self):
        assert gamma_density(0.5, 0.0) == pytest.approx(2.0, rel=1e-14)

    def test_density_frozen_value(self):
        assert gamma_density(1.0, 0.5) == pytest.approx(0.5 * math.exp(-0.375), rel=1e-13)

    def test_density_vanishes_at_one(self):
        assert gamma_density(1.0, 1.0 - 1e-12) == pytest.approx(0.0, abs=1e-11)

    def test_density_rejects_the_atom(self):
        with pytest.raises(ValueError):
            gamma_density(1.0, 1.0)

    def test_point_mass(self):
        assert gamma_point_mass(10.0) == pytest.approx(math.exp(-0.05), abs=1e-15)

    @pytest.mark.parametrize("b", [0.1, 0.5, 1.0, 10.0, 100.0])
    def test_normalization(self, b):
        mass, _ = quad(lambda g: gamma_density(b, g), 0.0, 1.0, limit=200)
        assert mass + gamma_point_mass(b) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("b", [0.2, 1.0, 5.0])
    def test_density_is_minus_slope_of_tail(self, b):
        # the continuous density equals -d/dgamma exp(gamma(gamma-2)/(2b))
        h = 1e-6
        for g in np.linspace(0.05, 0.95, 10):
            tail = lambda x: math.exp(x * (x - 2.0) / (2.0 * b))  # noqa: E731
            slope = (tail(g + h) - tail(g - h)) / (2 * h)
            assert -slope == pytest.approx(gamma_density(b, g), abs=1e-6)


class TestExpectedGamma:
    def test_frozen_half_index(self):
        # (sqrt(pi)/2) * erfi(1) * e^{-1} via the 30-term series oracle
        assert expected_gamma(0.5) == pytest.approx(0.5380795069127684, abs=1e-12)

    def test_quadrature_consistency(self):
        for b in [0.1, 0.5, 1.0, 10.0, 100.0]:
            integral, _ = quad(lambda g: g * gamma_density(b, g), 0.0, 1.0, limit=200)
            expected = integral + gamma_point_mass(b)
            assert expected_gamma(b) == pytest.approx(expected, abs=1e-8)

    def test_worked_example_index(self):
        assert expected_gamma(33.33) == pytest.approx(0.990, abs=1e-3)

    def test_approaches_one(self):
        assert expected_gamma(1e9) > 1 - 1e-8
        assert expected_gamma(SATURATED_INDEX) == 1.0

    def test_in_unit_interval(self):
        for b in np.logspace(-6, 6, 25):
            assert 0.0 < expected_gamma(float(b)) < 1.0


class TestExpectedAccuracy:
    def test_worked_example(self):
        assert expected_accuracy(200.0**3 / (6 * 200.0**2)) == pytest.approx(0.995, abs=1e-3)

    def test_equal_nl_value(self):
        assert expected_accuracy(0.5) == pytest.approx(0.769, abs=1e-3)
        assert expected_accuracy(0.5) == pytest.approx(0.7690397534563842, abs=1e-12)

    def test_range_boundary_low(self):
        assert expected_accuracy(1e-9) == pytest.approx(0.5, abs=1e-8)

    def test_consistency_with_gamma(self):
        for b in np.logspace(-3, 3, 13):
            assert expected_accuracy(float(b)) == pytest.approx(
                (1.0 + expected_gamma(float(b))) / 2.0, abs=1e-14
            )

    def test_strictly_increasing(self):
        bs = np.logspace(-6, 6, 200)
        values = [expected_accuracy(float(b)) for b in bs]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_open_range(self):
        for b in np.logspace(-6, 6, 50):
            assert 0.5 < expected_accuracy(float(b)) < 1.0

    def test_saturation(self):
        assert expected_accuracy(SATURATED_INDEX) == 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            expected_accuracy(0.0)
        with pytest.raises(ValueError):
            expected_accuracy(-1.0)


class TestInversion:
    def test_anchor_equal_nl(self):
        b = invert_expected_accuracy(0.769)
        assert b == pytest.approx(0.5, rel=0.01)

    def test_worked_example_inverse(self):
        assert invert_expected_accuracy(0.995) == pytest.approx(33.33, rel=0.02)

    def test_round_trip_grid(self):
        for b in np.logspace(math.log10(0.01), math.log10(1000.0), 50):
            recovered = invert_expected_accuracy(expected_accuracy(float(b)))
            assert abs(recovered - b) / b <= 1e-6

    def test_tiny_excess_over_half(self):
        b = invert_expected_accuracy(0.5 + 1e-12)
        assert 0.0 < b < 1e-8

    def test_saturation_marker(self):
        assert invert_expected_accuracy(1.0) == SATURATED_INDEX
        assert invert_expected_accuracy(1.5) == SATURATED_INDEX

    def test_below_range_rejected(self):
        with pytest.raises(ValueError):
            invert_expected_accuracy(0.5)
        with pytest.raises(ValueError):
            invert_expected_accuracy(0.3)


class TestBinsSimulatorAgreement:
    """The bins thrower is the package's own; its complete fraction must sit
    on the exact occupancy probability."""

    @pytest.mark.parametrize("S,N", [(10, 3), (100, 10), (1000, 30)])
    def test_four_sigma_band(self, S, N):
        trials = 100_000
        misses = 0
        for seed in range(10):
            outcome = simulate_bins(S, N, trials, RngSeed(seed, 3))
            p = p_complete_exact(S, N)
            se = math.sqrt(p * (1 - p) / trials)
            if abs(outcome.complete_fraction - p) > 4 * se:
                misses += 1
        assert misses <= 1  # >= 99% of seeds within 4 SE (10 seeds per pair)
