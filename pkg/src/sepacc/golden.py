"""Versioned golden values for regression checks and the `tables` command.

These are the frozen reference accuracies the estimator is expected to
reproduce, frozen here so that comparisons need neither network access
nor retraining.  Real-accuracy columns are measured averages and carry
optimizer variance; estimated columns are deterministic outputs of the
accuracy map and must match to +-0.001.
"""

from __future__ import annotations

GOLDEN_VERSION = "reference-1"

# d = 2 grid with N = L: the theoretical index is 0.5 regardless of N, so
# every estimated accuracy is the same 0.769 while the measured accuracy
# falls with N.  Columns: d, N, L, real accuracy, estimated accuracy.
TABLE_EQUAL_NL = (
    (2, 100, 100, 0.844, 0.769),
    (2, 200, 200, 0.741, 0.769),
    (2, 500, 500, 0.686, 0.769),
    (2, 800, 800, 0.664, 0.769),
    (2, 1000, 1000, 0.645, 0.769),
    (2, 2000, 2000, 0.592, 0.769),
    (2, 5000, 5000, 0.556, 0.769),
)

# d = 2 spot checks of the empirically corrected estimator.
# Columns: N, L, real accuracy, estimated accuracy.
TABLE_D2_SPOT_CHECKS = (
    (115, 2483, 0.910, 0.846),
    (154, 1595, 0.805, 0.819),
    (243, 519, 0.782, 0.767),
    (508, 4992, 0.699, 0.724),
    (689, 2206, 0.665, 0.685),
    (1366, 4133, 0.614, 0.631),
    (2139, 2384, 0.578, 0.593),
    (2661, 890, 0.566, 0.573),
    (1462, 94, 0.577, 0.592),
    (3681, 1300, 0.555, 0.560),
    (4416, 4984, 0.556, 0.559),
    (4498, 1359, 0.550, 0.552),
)

# Reference point of the theoretical estimator: a 3-200-1 network on 200
# points has b = 200^3 / (3! * 200^2) = 33.33 and estimated accuracy 0.995.
WORKED_EXAMPLE = {"d": 3, "N": 200, "L": 200, "b": 33.33, "accuracy": 0.995}

# Critical-exponent limit check: S = b*N^2 with b = 10 gives a complete
# separation probability of exp(-1/20) ~ 0.9512 as N grows.
LIMIT_EXAMPLE = {"a": 2.0, "b": 10.0, "p_complete": 0.9512}
