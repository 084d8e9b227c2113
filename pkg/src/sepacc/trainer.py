"""Ground-truth generator: trains d-L-1 ReLU networks on balanced random data.

The task is deliberately structureless: N points uniform in [0, 1)^d, the
first half labeled 0 and the rest 1, so the only thing a network can do
is memorize.  The network is a single hidden layer of L ReLU units into
one sigmoid output, trained full-batch with Adam on mean binary
cross-entropy.  A run converges when the loss range over the trailing
``convergence_window`` epochs drops below ``convergence_delta`` (or hits
``max_epochs``), and the reported training accuracy is the fraction of
points on the correct side of 0.5.

Runs are bit-for-bit reproducible from their RngSeed: the dataset and the
parameter initialization of repeat r come from spawned streams (r, 0) and
(r, 1).  The big (N, L) activation buffers are preallocated once per run,
which keeps the 2000x2000 cases inside desk-scale wall time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .rng import RngSeed
from .theory import ProblemSpec

__all__ = [
    "Dataset",
    "ModelParameters",
    "TrainingConfig",
    "RepeatResult",
    "TrainingRecord",
    "TrainingDiverged",
    "GradientCheck",
    "generate_dataset",
    "init_parameters",
    "forward",
    "train_once",
    "measure_real_accuracy",
    "gradient_check",
    "write_records_csv",
    "read_records_csv",
]


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the offending epoch (and repeat)."""

    def __init__(self, message: str, epoch: int, repeat: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.repeat = repeat


@dataclass(frozen=True)
class Dataset:
    """N x d points in [0, 1) with balanced binary labels."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        N = self.points.shape[0]
        if self.labels.shape != (N,):
            raise ValueError("labels must be one per point")
        if N % 2 != 0 or int(self.labels.sum()) * 2 != N:
            raise ValueError("labels must be balanced (N even, N/2 ones)")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class ModelParameters:
    """Weights of the d-L-1 network; mutated in place by the optimizer."""

    hidden_weights: np.ndarray  # (L, d)
    hidden_biases: np.ndarray  # (L,)
    output_weights: np.ndarray  # (L,)
    output_bias: float

    @property
    def width(self) -> int:
        return self.hidden_weights.shape[0]


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-2
    max_epochs: int = 50_000
    convergence_window: int = 1000
    convergence_delta: float = 1e-4
    repeats: int = 5
    init_scale_rule: str = "glorot-uniform"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.max_epochs < 1 or self.repeats < 1:
            raise ValueError("learning_rate, max_epochs, repeats must be positive")
        if self.convergence_window < 1 or self.convergence_delta <= 0:
            raise ValueError("convergence_window and convergence_delta must be positive")
        if self.init_scale_rule != "glorot-uniform":
            raise ValueError(f"unknown init_scale_rule {self.init_scale_rule!r}")


@dataclass(frozen=True)
class RepeatResult:
    """One from-scratch training run."""

    repeat: int
    seed_label: str
    epochs: int
    final_loss: float
    accuracy: float
    loss_history: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class TrainingRecord:
    """All repeats for one (d, N, L); the headline number is the mean accuracy."""

    spec: ProblemSpec
    seed: RngSeed
    repeats: tuple[RepeatResult, ...]

    @property
    def training_accuracy(self) -> float:
        return float(np.mean([r.accuracy for r in self.repeats]))

    @property
    def accuracies(self) -> tuple[float, ...]:
        return tuple(r.accuracy for r in self.repeats)


@dataclass(frozen=True)
class GradientCheck:
    """Finite-difference audit: worst relative error over unflagged coordinates."""

    max_relative_error: float
    checked: int
    skipped: int


def generate_dataset(d: int, N: int, seed: RngSeed) -> Dataset:
    """Uniform points in [0, 1)^d; first N/2 labeled 0, rest 1.  Labels are
    independent of position, so there is nothing to learn, only memorize."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if N < 2 or N % 2 != 0:
        raise ValueError(f"N must be an even integer >= 2, got {N}")
    rng = seed.generator()
    points = rng.random((N, d))
    labels = np.zeros(N, dtype=np.int8)
    labels[N // 2 :] = 1
    return Dataset(points=points, labels=labels)


def init_parameters(d: int, L: int, rng: np.random.Generator) -> ModelParameters:
    """Uniform fan-balanced init: hidden in +-sqrt(6/(d+L)), output in
    +-sqrt(6/(L+1)), zero biases."""
    hidden_scale = math.sqrt(6.0 / (d + L))
    output_scale = math.sqrt(6.0 / (L + 1))
    return ModelParameters(
        hidden_weights=rng.uniform(-hidden_scale, hidden_scale, size=(L, d)),
        hidden_biases=np.zeros(L),
        output_weights=rng.uniform(-output_scale, output_scale, size=L),
        output_bias=0.0,
    )


def forward(params: ModelParameters, x: np.ndarray) -> float:
    """Network output sigmoid(sum_k v_k relu(w_k . x + b_k) + c) for one point."""
    x = np.asarray(x, dtype=np.float64)
    hidden = np.maximum(params.hidden_weights @ x + params.hidden_biases, 0.0)
    z = float(params.output_weights @ hidden + params.output_bias)
    return float(expit(z))


def _logits(params: ModelParameters, X: np.ndarray) -> np.ndarray:
    hidden = np.maximum(X @ params.hidden_weights.T + params.hidden_biases, 0.0)
    return hidden @ params.output_weights + params.output_bias


def _mean_bce(z: np.ndarray, y: np.ndarray) -> float:
    # softplus(z) - y*z is the stable form of -[y ln p + (1-y) ln(1-p)].
    # NaN logits are legitimate here: they surface as a non-finite loss,
    # which train_once converts into TrainingDiverged.
    with np.errstate(invalid="ignore"):
        return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _accuracy(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((z >= 0.0) == (y >= 0.5)))


class _Adam:
    """Standard bias-corrected Adam over a list of parameter arrays."""

    def __init__(self, arrays: list[np.ndarray], lr: float):
        self.lr = lr
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.t = 0
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]

    def step(self, arrays: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            a -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def train_once(
    dataset: Dataset, L: int, config: TrainingConfig, seed: RngSeed, repeat: int = 0
) -> TrainingRecord:
    """Train one network from scratch; returns a single-repeat record.

    Raises :class:`TrainingDiverged` the first epoch the loss stops being
    finite.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got L={L}")
    X = dataset.points
    y = dataset.labels.astype(np.float64)
    N, d = X.shape
    params = init_parameters(d, L, seed.generator())
    W, hb, v = params.hidden_weights, params.hidden_biases, params.output_weights
    c = np.array(params.output_bias)
    arrays = [W, hb, v, c]
    adam = _Adam(arrays, config.learning_rate)

    # Reused (N, L) scratch: activations, the gradient flowing back into
    # them, and the ReLU mask.
    act = np.empty((N, L))
    back = np.empty((N, L))
    mask = np.empty((N, L), dtype=bool)
    inv_n = 1.0 / N

    losses = np.empty(config.max_epochs)
    epochs_run = config.max_epochs
    window = config.convergence_window
    for epoch in range(config.max_epochs):
        np.matmul(X, W.T, out=act)
        act += hb
        np.greater(act, 0.0, out=mask)
        np.maximum(act, 0.0, out=act)  # act now holds the hidden activations
        z = act @ v + c
        loss = _mean_bce(z, y)
        losses[epoch] = loss
        if not math.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss at epoch {epoch}", epoch=epoch, repeat=repeat
            )
        p = expit(z)
        dz = (p - y) * inv_n
        gv = act.T @ dz
        gc = np.array(dz.sum())
        np.multiply(dz[:, None], v[None, :], out=back)
        back *= mask
        gW = back.T @ X
        gb = back.sum(axis=0)
        adam.step(arrays, [gW, gb, gv, gc])
        if epoch + 1 >= window:
            tail = losses[epoch + 1 - window : epoch + 1]
            if tail.max() - tail.min() < config.convergence_delta:
                epochs_run = epoch + 1
                break
    else:
        epochs_run = config.max_epochs

    params.output_bias = float(c)
    z = _logits(params, X)
    final_loss = _mean_bce(z, y)
    result = RepeatResult(
        repeat=repeat,
        seed_label=seed.label(),
        epochs=epochs_run,
        final_loss=final_loss,
        accuracy=_accuracy(z, y),
        loss_history=losses[:epochs_run].copy(),
    )
    spec = ProblemSpec(d=d, N=N, L=L)
    return TrainingRecord(spec=spec, seed=seed, repeats=(result,))


def _run_repeat(spec: ProblemSpec, config: TrainingConfig, seed: RngSeed, r: int) -> RepeatResult:
    dataset = generate_dataset(spec.d, spec.N, seed.spawn(r, 0))
    try:
        record = train_once(dataset, spec.L, config, seed.spawn(r, 1), repeat=r)
    except TrainingDiverged as exc:
        raise TrainingDiverged(str(exc), epoch=exc.epoch, repeat=r) from exc
    return record.repeats[0]


def measure_real_accuracy(
    spec: ProblemSpec, config: TrainingConfig, seed: RngSeed, jobs: int = 1
) -> TrainingRecord:
    """Run ``config.repeats`` independent (dataset, init) repeats and average.

    Repeat r derives its dataset from stream (r, 0) and its initialization
    from stream (r, 1), so adding repeats never perturbs earlier ones and
    the result is identical no matter how many workers run them.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or config.repeats == 1:
        results = [_run_repeat(spec, config, seed, r) for r in range(config.repeats)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(jobs, config.repeats)) as pool:
            futures = [
                pool.submit(_run_repeat, spec, config, seed, r)
                for r in range(config.repeats)
            ]
            results = [f.result() for f in futures]
    return TrainingRecord(spec=spec, seed=seed, repeats=tuple(results))


def _flat_views(params: ModelParameters) -> list[np.ndarray]:
    return [
        params.hidden_weights,
        params.hidden_biases,
        params.output_weights,
    ]


def gradient_check(
    params: ModelParameters, dataset: Dataset, epsilon: float = 1e-5
) -> GradientCheck:
    """Compare analytic loss gradients against central finite differences.

    Hidden units whose pre-activation comes within the perturbation's
    reach of the ReLU kink on any data point are flagged and their
    coordinates skipped (the analytic subgradient and the finite
    difference legitimately disagree there).  Intended for small
    instances; cost is two loss evaluations per parameter.
    """
    X = dataset.points
    y = dataset.labels.astype(np.float64)
    N = X.shape[0]

    def loss_of(p: ModelParameters) -> float:
        return _mean_bce(_logits(p, X), y)

    # Analytic gradients at the base point.
    pre = X @ params.hidden_weights.T + params.hidden_biases
    hidden = np.maximum(pre, 0.0)
    z = hidden @ params.output_weights + params.output_bias
    dz = (expit(z) - y) / N
    gv = hidden.T @ dz
    gc = float(dz.sum())
    back = dz[:, None] * params.output_weights[None, :]
    back *= pre > 0.0
    gW = back.T @ X
    gb = back.sum(axis=0)

    kink_margin = 4.0 * epsilon * max(1.0, float(np.abs(X).max()))
    kinked_units = np.abs(pre).min(axis=0) <= kink_margin

    analytic = [gW, gb, gv, np.array([gc])]
    holders = _flat_views(params) + [None]  # output bias handled specially
    max_err = 0.0
    checked = 0
    skipped = 0
    for which, (grad, holder) in enumerate(zip(analytic, holders)):
        it = np.ndindex(grad.shape)
        for idx in it:
            if which in (0, 1):  # hidden weights / biases: unit is the first axis
                unit = idx[0]
                if kinked_units[unit]:
                    skipped += 1
                    continue
            if which == 3:
                base = params.output_bias
                params.output_bias = base + epsilon
                up = loss_of(params)
                params.output_bias = base - epsilon
                down = loss_of(params)
                params.output_bias = base
            else:
                base = holder[idx]
                holder[idx] = base + epsilon
                up = loss_of(params)
                holder[idx] = base - epsilon
                down = loss_of(params)
                holder[idx] = base
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(abs(numeric), abs(float(grad[idx])), 1e-8)
            max_err = max(max_err, abs(numeric - float(grad[idx])) / denom)
            checked += 1
    return GradientCheck(max_relative_error=max_err, checked=checked, skipped=skipped)


_RECORD_HEADER = ["d", "N", "L", "repeat", "seed", "epochs", "final_loss", "accuracy"]


def write_records_csv(records: list[TrainingRecord], path: str | Path) -> None:
    """One CSV row per repeat: d,N,L,repeat,seed,epochs,final_loss,accuracy."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RECORD_HEADER)
        for record in records:
            for rep in record.repeats:
                writer.writerow(
                    [
                        record.spec.d,
                        record.spec.N,
                        record.spec.L,
                        rep.repeat,
                        record.seed.label(),
                        rep.epochs,
                        repr(rep.final_loss),
                        repr(rep.accuracy),
                    ]
                )


def _seed_from_label(label: str) -> RngSeed:
    head, _, path = label.partition("/")
    seed_s, _, stream_s = head.partition(":")
    path_tuple = tuple(int(p) for p in path.split(".")) if path else ()
    return RngSeed(int(seed_s), int(stream_s or 0), path_tuple)


def read_records_csv(path: str | Path) -> list[TrainingRecord]:
    """Inverse of :func:`write_records_csv`; repeats regroup by (d, N, L, seed)."""
    groups: dict[tuple, list[RepeatResult]] = {}
    order: list[tuple] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _RECORD_HEADER:
            raise ValueError(f"unexpected records CSV header: {header}")
        for fields in reader:
            d, N, L = int(fields[0]), int(fields[1]), int(fields[2])
            key = (d, N, L, fields[4])
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(
                RepeatResult(
                    repeat=int(fields[3]),
                    seed_label=fields[4],
                    epochs=int(fields[5]),
                    final_loss=float(fields[6]),
                    accuracy=float(fields[7]),
                )
            )
    records = []
    for key in order:
        d, N, L, seed_label = key
        records.append(
            TrainingRecord(
                spec=ProblemSpec(d=d, N=N, L=L),
                seed=_seed_from_label(seed_label),
                repeats=tuple(groups[key]),
            )
        )
    return records
