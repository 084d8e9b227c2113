"""Command-line front door.

Subcommands: estimate, tables, sweep, simulate, train, fit, rerun.  Every
command that writes files also writes a JSON run manifest sufficient to
reproduce the run; ``sepacc rerun <manifest>`` re-executes it and checks
that the regenerated files hash identically (timestamps excluded).

Configuration precedence: explicit flags > config file (--config, flat
``key = value`` lines) > environment (SEPACC_SEED, SEPACC_JOBS) > built-in
defaults.

Exit codes: 0 success, 2 usage error, 3 numerical failure (including
rerun hash mismatches), 4 resource guard refusal, 5 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .estimate import ESTIMATE_MODES, estimate_accuracy
from .fitting import (
    UnidentifiableFit,
    accuracy_grid_to_samples,
    fit_linear_laws,
    fit_power_law,
    write_fit_report_json,
)
from .geometry import DEFAULT_MODEL, CoefficientModel, max_partitions_exact
from .golden import GOLDEN_VERSION, TABLE_D2_SPOT_CHECKS, TABLE_EQUAL_NL
from .montecarlo import (
    empirical_gamma_distribution,
    outcome_summary,
    simulate_bins,
    simulate_hyperplanes,
    write_outcome_csv,
)
from .rng import RngSeed
from .theory import ProblemSpec, p_complete_exact
from .trainer import (
    TrainingConfig,
    TrainingDiverged,
    measure_real_accuracy,
    read_records_csv,
    write_records_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_GUARD = 4
EXIT_DIVERGED = 5

TRAIN_GUARD_LIMIT = 10**8  # refuse N*L above this without --force

_DEFAULTS = {"seed": 0, "jobs": 1, "trials": 1000, "repeats": 5, "out_dir": "sepacc-out"}


# ----------------------------------------------------------------------
# configuration and manifest plumbing
# ----------------------------------------------------------------------


def _read_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    config: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config


def _resolve(args: argparse.Namespace, config: dict[str, str]) -> None:
    """Fill seed/jobs/trials/repeats/out_dir left unset by flags, in
    flag > config > environment > default order."""

    def pick(name: str, env: str | None, cast):
        if getattr(args, name, None) is not None:
            return
        if name in config:
            setattr(args, name, cast(config[name]))
            return
        if env and os.environ.get(env):
            setattr(args, name, cast(os.environ[env]))
            return
        setattr(args, name, _DEFAULTS[name])

    pick("seed", "SEPACC_SEED", int)
    pick("jobs", "SEPACC_JOBS", int)
    if hasattr(args, "trials"):
        pick("trials", None, int)
    if hasattr(args, "repeats"):
        pick("repeats", None, int)
    pick("out_dir", None, str)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(
    label: str,
    args: argparse.Namespace,
    out_dir: Path,
    outputs: list[Path],
    model_version: str = DEFAULT_MODEL.version,
    extra: dict | None = None,
) -> Path:
    parameters = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "config") and not k.startswith("_")
    }
    manifest = {
        "command": args.command,
        "label": label,
        "parameters": parameters,
        "artifact_version": __version__,
        "coefficient_model_version": model_version,
        "golden_version": GOLDEN_VERSION,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / f"{label}-manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------


def _cmd_estimate(args: argparse.Namespace) -> int:
    est = estimate_accuracy(args.d, args.N, args.L, mode=args.mode, model=_load_model(args))
    record = est.as_dict()
    print(json.dumps(record, sort_keys=True))
    out = _out_dir(args)
    path = out / "estimate.json"
    _write_json(path, record)
    _write_manifest("estimate", args, out, [path], model_version=_model_version(args))
    return EXIT_OK


def _load_model(args: argparse.Namespace) -> CoefficientModel | None:
    path = getattr(args, "model", None)
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read coefficient model {path}: {exc}") from exc
    return CoefficientModel.from_text(text, version=f"file:{Path(path).name}")


def _model_version(args: argparse.Namespace) -> str:
    model = _load_model(args)
    return (model or DEFAULT_MODEL).version


def _cmd_tables(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    label = f"tables-{args.which}"
    path = out / f"table{args.which}.csv"
    max_diff = 0.0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if args.which == "1":
            writer.writerow(["d", "N", "L", "real_acc", "golden_est", "computed_est", "diff"])
            for d, N, L, real, golden in TABLE_EQUAL_NL:
                est = estimate_accuracy(d, N, L, mode="theoretical")
                diff = abs(est.accuracy - golden)
                max_diff = max(max_diff, diff)
                writer.writerow([d, N, L, real, golden, repr(est.accuracy), repr(diff)])
        elif args.which == "2":
            writer.writerow(["N", "L", "real_acc", "golden_est", "computed_est", "diff"])
            for N, L, real, golden in TABLE_D2_SPOT_CHECKS:
                est = estimate_accuracy(2, N, L, mode="empirical-table")
                diff = abs(est.accuracy - golden)
                max_diff = max(max_diff, diff)
                writer.writerow([N, L, real, golden, repr(est.accuracy), repr(diff)])
        else:  # 3-est: echo the embedded coefficient table
            writer.writerow(["d", "x", "y", "c", "r2"])
            for row in DEFAULT_MODEL.rows:
                writer.writerow([row.d, row.x, row.y, row.c, row.r_squared])
    print(f"{path.name}: max |computed - golden| = {max_diff:.6f}")
    _write_manifest(label, args, out, [path])
    return EXIT_OK


def _parse_d_range(text: str) -> list[int]:
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty dimension range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


_STANDARD_SCENARIOS = (
    ("NggL", 10000, 1000),  # N >> L
    ("NeqL", 10000, 10000),  # N ~= L
    ("NllL", 1000, 10000),  # N << L
)


def _cmd_sweep(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    dims = _parse_d_range(args.d)
    if (args.N is None) != (args.L is None):
        raise ValueError("--N and --L must be given together (or neither)")
    if args.N is not None:
        scenarios = [(f"N{args.N}_L{args.L}", args.N, args.L)]
    else:
        scenarios = list(_STANDARD_SCENARIOS)
    model = _load_model(args)
    outputs = []
    extrapolated: list[int] = []
    for name, N, L in scenarios:
        path = out / f"sweep_{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "estimated_accuracy"])
            for d in dims:
                est = estimate_accuracy(d, N, L, mode=args.mode, model=model)
                if est.extrapolated and d not in extrapolated:
                    extrapolated.append(d)
                writer.writerow([d, repr(est.accuracy)])
        outputs.append(path)
        print(f"wrote {path.name} ({len(dims)} rows)")
    if extrapolated:
        print(f"extrapolated beyond calibrated dimensions: {extrapolated}")
    _write_manifest(
        "sweep",
        args,
        out,
        outputs,
        model_version=_model_version(args),
        extra={"extrapolated_dimensions": extrapolated},
    )
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    seed = RngSeed(args.seed)
    label = f"simulate-{args.model}"
    if args.model == "bins":
        if args.S is None and args.b is None:
            raise ValueError("simulate bins needs either -S or --b/--a")
        if args.S is not None:
            S = args.S
        else:
            a = args.a if args.a is not None else 2.0
            S = round(args.b * args.N**a)
        outcome = simulate_bins(S, args.N, args.trials, seed)
        theory_p = p_complete_exact(S, args.N)
        context = {"S": S, "N": args.N}
    else:
        if args.d is None or args.L is None:
            raise ValueError("simulate hyperplanes needs -d and -L")
        spec = ProblemSpec(d=args.d, N=args.N, L=args.L)
        outcome = simulate_hyperplanes(spec, args.trials, seed)
        S_max = max_partitions_exact(args.L, args.d)
        theory_p = p_complete_exact(S_max, args.N)
        context = {
            "d": args.d,
            "N": args.N,
            "L": args.L,
            "max_regions": S_max,
            "mean_occupied_regions": outcome.distinct_cells_mean,
        }

    csv_path = out / f"{label}-outcome.csv"
    write_outcome_csv(outcome, csv_path)
    hist = empirical_gamma_distribution(outcome, bins=args.bins)
    hist_path = out / f"{label}-gamma-hist.csv"
    with open(hist_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "density"])
        for lo, hi, dens in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.density):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(dens))])
    summary = outcome_summary(outcome)
    summary.update(context)
    summary["gamma_point_mass"] = hist.point_mass
    summary["theory_complete_probability"] = theory_p
    summary["abs_difference"] = abs(summary["complete_fraction"] - theory_p)
    summary_path = out / f"{label}-summary.json"
    _write_json(summary_path, summary)
    print(
        f"complete fraction {summary['complete_fraction']:.6f} "
        f"vs theory {theory_p:.6f} (se {summary['se']:.6f})"
    )
    _write_manifest(label, args, out, [csv_path, hist_path, summary_path])
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    if args.N * args.L > TRAIN_GUARD_LIMIT and not args.force:
        print(
            f"refusing: N*L = {args.N * args.L} exceeds the desk-scale guard "
            f"({TRAIN_GUARD_LIMIT}); pass --force to override",
            file=sys.stderr,
        )
        return EXIT_GUARD
    spec = ProblemSpec(d=args.d, N=args.N, L=args.L)
    config = TrainingConfig(
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        repeats=args.repeats,
    )
    record = measure_real_accuracy(spec, config, RngSeed(args.seed), jobs=args.jobs)
    out = _out_dir(args)
    csv_path = out / "train-records.csv"
    write_records_csv([record], csv_path)
    theoretical = estimate_accuracy(args.d, args.N, args.L, mode="theoretical")
    comparison = {
        "d": args.d,
        "N": args.N,
        "L": args.L,
        "real_accuracy": record.training_accuracy,
        "repeat_accuracies": list(record.accuracies),
        "estimate_theoretical": theoretical.accuracy,
    }
    if args.d >= 2:
        empirical = estimate_accuracy(args.d, args.N, args.L, mode="empirical-table")
        comparison["estimate_empirical"] = empirical.accuracy
        comparison["estimate_empirical_extrapolated"] = empirical.extrapolated
    cmp_path = out / "train-comparison.json"
    _write_json(cmp_path, comparison)
    print(
        f"real accuracy {record.training_accuracy:.4f} "
        f"(theoretical {comparison['estimate_theoretical']:.4f}"
        + (
            f", empirical {comparison['estimate_empirical']:.4f})"
            if "estimate_empirical" in comparison
            else ")"
        )
    )
    _write_manifest("train", args, out, [csv_path, cmp_path])
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    try:
        records = read_records_csv(args.records)
    except (OSError, ValueError, StopIteration) as exc:
        print(f"cannot parse records file {args.records}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not records:
        print(f"records file {args.records} contains no records", file=sys.stderr)
        return EXIT_USAGE
    samples, excluded = accuracy_grid_to_samples(records)
    for ex in excluded:
        print(f"excluded d={ex.spec.d} N={ex.spec.N} L={ex.spec.L}: {ex.reason}")
    dims = sorted({s.spec.d for s in samples}) if args.d is None else [args.d]
    out = _out_dir(args)
    outputs = []
    fitted_rows = []
    for d in dims:
        report = fit_power_law([s for s in samples if s.spec.d == d], d)
        path = out / f"fit-d{d}.json"
        write_fit_report_json(report, path)
        outputs.append(path)
        fitted_rows.append(report.coefficients)
        print(
            f"d={d}: x={report.coefficients.x:.4f} y={report.coefficients.y:.4f} "
            f"c={report.coefficients.c:.4f} R2={report.r_squared:.4f}"
        )
    if args.emit_model:
        model = fit_linear_laws(fitted_rows)
        model_path = Path(args.emit_model)
        if not model_path.is_absolute():
            model_path = out / model_path
        model_path.write_text(model.to_text())
        outputs.append(model_path)
        print(f"wrote coefficient model {model_path}")
    _write_manifest("fit", args, out, outputs)
    return EXIT_OK


def _cmd_rerun(args: argparse.Namespace) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    command = manifest["command"]
    if command not in _DISPATCH or command == "rerun":
        print(f"manifest names unknown command {command!r}", file=sys.stderr)
        return EXIT_USAGE
    ns = argparse.Namespace(**manifest["parameters"])
    ns.command = command
    ns.out_dir = args.out_dir if args.out_dir is not None else manifest["parameters"].get("out_dir")
    if ns.out_dir is None:
        ns.out_dir = _DEFAULTS["out_dir"]
    code = _DISPATCH[command](ns)
    if code != EXIT_OK:
        return code
    out = Path(ns.out_dir)
    mismatched = []
    for name, expected in manifest["outputs"].items():
        actual = _sha256(out / name)
        status = "ok" if actual == expected else "MISMATCH"
        if actual != expected:
            mismatched.append(name)
        print(f"{name}: {status}")
    if mismatched:
        print(f"{len(mismatched)} output(s) failed to reproduce", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


_DISPATCH = {
    "estimate": _cmd_estimate,
    "tables": _cmd_tables,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "fit": _cmd_fit,
    "rerun": _cmd_rerun,
}


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepacc",
        description=(
            "Estimate, simulate, train, and fit the training accuracy of "
            "two-layer ReLU networks on balanced random two-class data."
        ),
        epilog=(
            "Defaults for --seed and --jobs may come from SEPACC_SEED and "
            "SEPACC_JOBS or from a --config file (flat 'key = value' lines); "
            "explicit flags always win."
        ),
    )
    parser.add_argument("--config", help="flat key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, trials=False, repeats=False):
        p.add_argument("--seed", type=int, default=None, help="root RNG seed")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers")
        p.add_argument("--out-dir", default=None, help="output directory")
        if trials:
            p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
        if repeats:
            p.add_argument("--repeats", type=int, default=None, help="training repeats")

    p = sub.add_parser("estimate", help="accuracy estimate from (d, N, L) alone")
    p.add_argument("-d", type=int, required=True, help="input dimensionality")
    p.add_argument("-N", type=int, required=True, help="dataset size (even)")
    p.add_argument("-L", type=int, required=True, help="hidden width")
    p.add_argument("--mode", choices=ESTIMATE_MODES, default="theoretical")
    p.add_argument("--model", help="coefficient model file overriding the built-in table")
    common(p)

    p = sub.add_parser("tables", help="regenerate the golden estimate tables")
    p.add_argument("which", choices=["1", "2", "3-est"])
    common(p)

    p = sub.add_parser("sweep", help="estimate accuracy across a dimension range")
    p.add_argument("--d", required=True, help="dimension range, e.g. 2..24 or a single value")
    p.add_argument("--N", type=int, default=None, help="dataset size (custom scenario)")
    p.add_argument("--L", type=int, default=None, help="hidden width (custom scenario)")
    p.add_argument("--mode", choices=ESTIMATE_MODES, default="empirical-table")
    p.add_argument("--model", help="coefficient model file overriding the built-in table")
    common(p)

    p = sub.add_parser("simulate", help="run the stochastic separation oracles")
    p.add_argument("model", choices=["bins", "hyperplanes"])
    p.add_argument("-N", type=int, required=True, help="number of points/balls")
    p.add_argument("-S", type=int, default=None, help="bins: cell count")
    p.add_argument("--b", type=float, default=None, help="bins: cell density, S = b*N^a")
    p.add_argument("--a", type=float, default=None, help="bins: growth exponent (default 2)")
    p.add_argument("-d", type=int, default=None, help="hyperplanes: dimension")
    p.add_argument("-L", type=int, default=None, help="hyperplanes: plane count")
    p.add_argument("--bins", type=int, default=50, help="histogram bins for gamma")
    common(p, trials=True)

    p = sub.add_parser("train", help="measure real training accuracy")
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("-L", type=int, required=True)
    p.add_argument("--learning-rate", type=float, default=1e-2)
    p.add_argument("--max-epochs", type=int, default=50_000)
    p.add_argument("--force", action="store_true", help="override the N*L resource guard")
    common(p, repeats=True)

    p = sub.add_parser("fit", help="fit the empirical index law to training records")
    p.add_argument("records", help="records CSV produced by `sepacc train`")
    p.add_argument("--d", type=int, default=None, help="fit a single dimension only")
    p.add_argument(
        "--emit-model",
        default=None,
        help="write a coefficient model file usable by `estimate --model`",
    )
    common(p)

    p = sub.add_parser("rerun", help="re-execute a manifest and verify output hashes")
    p.add_argument("manifest", help="path to a *-manifest.json")
    p.add_argument("--out-dir", default=None, help="regenerate into this directory")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "rerun":
            config = _read_config(args.config)
            _resolve(args, config)
        handler = _DISPATCH[args.command]
        return handler(args)
    except UnidentifiableFit as exc:
        print(f"fit is unidentifiable: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TrainingDiverged as exc:
        where = f" (repeat {exc.repeat})" if exc.repeat is not None else ""
        print(f"training diverged at epoch {exc.epoch}{where}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
