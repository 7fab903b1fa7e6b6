"""Command-line front end: ``sparsedft {recover,analyze,experiment}``.

Exit codes: 0 ok, 1 input/config error, 2 recovery did not converge
(results are still written), 3 a brute-force size guard was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis
from .experiments import PRESETS, ConfigError, ExperimentConfig, preset, run
from .fileio import (
    FormatError,
    atomic_write,
    complex_csv,
    dumps_json,
    parse_index_list,
    read_index_file,
    read_signal_rows,
)
from .linalg import SingularSystemError
from .recovery import (
    InstanceTooLargeError,
    RecoveryError,
    SupportSelection,
    recover_exhaustive,
    recover_iterative,
    recover_one_step,
)
from .signals import SamplingMask, random_mask
from .transform import partial_matrix

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_GUARD = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default exit status 2 would collide with "not converged"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed for any random draw")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")


def _add_mask_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampling mask (pick one)")
    g.add_argument("--mask-file", help="file listing available sample indices")
    g.add_argument("--missing", help="comma-separated indices of unavailable samples")
    g.add_argument("--m", type=int, help="draw M random available samples (needs --seed)")
    g.add_argument("--full", action="store_true", help="all samples available")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsedft", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("recover", help="reconstruct a DFT-sparse signal from available samples")
    rec.add_argument("--signal", required=True, help="CSV with header n,re,im")
    rec.add_argument("--n", type=int, help="signal length N (default: inferred from a complete signal file)")
    rec.add_argument("--method", required=True, choices=("onestep", "iterative", "exhaustive"))
    sel = rec.add_mutually_exclusive_group()
    sel.add_argument("--threshold", type=float, help="onestep: keep bins with |X| above this")
    sel.add_argument("--top-k", type=int, help="onestep: keep the K largest bins")
    sel.add_argument("--top-m", action="store_true", help="onestep: keep as many bins as samples")
    rec.add_argument("--epsilon", type=float, default=1e-5, help="residual-ratio stopping level")
    rec.add_argument("--max-iter", type=int, help="iterative: pass limit (default M)")
    rec.add_argument("--k", type=int, help="exhaustive: sparsity K")
    _add_mask_args(rec)
    _add_common(rec)

    ana = sub.add_parser("analyze", help="coherence, spark, RIP and missing-sample noise of a mask")
    ana.add_argument("--n", type=int, required=True, help="signal length N")
    ana.add_argument("--amplitudes", help="comma-separated component amplitudes for the variance table")
    ana.add_argument("--spark", action="store_true", help="brute-force spark of the M x N partial DFT matrix")
    ana.add_argument("--rip", type=int, metavar="S", help="brute-force restricted isometry constant of order S")
    _add_mask_args(ana)
    _add_common(ana)

    exp = sub.add_parser("experiment", help="run a Monte Carlo study or worked example")
    src = exp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", help="JSON file of config keys")
    exp.add_argument("--trials", type=int)
    exp.add_argument("--n", type=int, dest="n_len")
    exp.add_argument("--m", help="comma-separated list of M values")
    exp.add_argument("--k", type=int, dest="k_sparsity")
    exp.add_argument("--epsilon", type=float)
    exp.add_argument("--threshold", type=float)
    exp.add_argument("--noise-variance", help="comma-separated noise variances")
    _add_common(exp)
    return parser


def _mask_from_args(args, n_len: Optional[int], rows: Optional[np.ndarray] = None) -> SamplingMask:
    chosen = [bool(args.mask_file), args.missing is not None, args.m is not None, bool(args.full)]
    if sum(chosen) > 1:
        raise UsageError("give only one of --mask-file, --missing, --m, --full")
    if n_len is None:
        raise UsageError("signal length unknown: pass --n")
    if args.mask_file:
        return SamplingMask.from_indices(read_index_file(args.mask_file), n_len)
    if args.missing is not None:
        return SamplingMask.from_missing(parse_index_list(args.missing), n_len)
    if args.m is not None:
        if args.seed is None:
            raise UsageError("--m needs --seed")
        return random_mask(n_len, args.m, args.seed)
    if args.full:
        return SamplingMask.full(n_len)
    if rows is not None:
        return SamplingMask.from_indices(rows, n_len)
    raise UsageError("no sampling mask given: use --mask-file, --missing, --m with --seed, or --full")


def _write_outputs(out: Path, files: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        atomic_write(out / name, text)


def cmd_recover(args) -> int:
    rows, values = read_signal_rows(args.signal)
    n_len = args.n
    if n_len is None and np.array_equal(np.sort(rows), np.arange(rows.size)):
        n_len = int(rows.size)
    if n_len is not None and rows.max() >= n_len:
        raise FormatError(f"{args.signal}: sample index {rows.max()} outside signal length {n_len}")
    mask = _mask_from_args(args, n_len, rows)
    lookup = dict(zip(rows.tolist(), values))
    absent = [int(n) for n in mask.indices if int(n) not in lookup]
    if absent:
        raise FormatError(f"{args.signal}: no value for available sample(s) {absent[:10]}")
    y = np.array([lookup[int(n)] for n in mask.indices], dtype=complex)

    if args.method == "onestep":
        if args.threshold is not None:
            selection = SupportSelection.threshold(args.threshold)
        elif args.top_k is not None:
            selection = SupportSelection.top_k(args.top_k)
        elif args.top_m:
            selection = SupportSelection.top_m()
        else:
            raise UsageError("onestep needs --threshold, --top-k or --top-m")
        result = recover_one_step(y, mask, selection, args.epsilon)
    elif args.method == "iterative":
        result = recover_iterative(y, mask, epsilon=args.epsilon, max_iter=args.max_iter)
    else:
        if args.k is None:
            raise UsageError("exhaustive needs --k")
        result = recover_exhaustive(y, mask, args.k)

    summary = result.summary()
    summary.update(n_len=mask.n_len, m_avail=mask.m, epsilon=args.epsilon, signal=str(args.signal))
    files = {}
    if args.format in ("csv", "both"):
        files["spectrum.csv"] = complex_csv("k", result.spectrum)
    if args.format in ("json", "both"):
        if args.format == "json":
            summary["spectrum_re"] = result.spectrum.real.tolist()
            summary["spectrum_im"] = result.spectrum.imag.tolist()
        files["summary.json"] = dumps_json(summary)
    _write_outputs(Path(args.out), files)
    print(
        f"{summary['method']}: support={summary['support']} iterations={result.iterations} "
        f"residual_ratio={result.residual_ratio:.4e} converged={result.converged}"
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_analyze(args) -> int:
    mask = _mask_from_args(args, args.n)
    mu = analysis.coherence(mask)
    report = {
        "n_len": mask.n_len,
        "m_avail": mask.m,
        "coherence": mu,
        "spark_sparsity_bound": analysis.spark_sparsity_bound(mu),
        "welch_ratio": analysis.welch_ratio(mask.n_len, mask.m),
        "mask": mask.indices.tolist(),
    }
    if args.amplitudes:
        amps = [float(a) for a in args.amplitudes.replace(",", " ").split()]
        report["missing_noise"] = analysis.missing_noise_model(amps, mask.n_len, mask.m).as_dict()
    if args.spark:
        if mask.n_len > analysis.SPARK_MAX_COLS:
            raise InstanceTooLargeError(
                f"spark guard: brute force is limited to {analysis.SPARK_MAX_COLS} columns, N={mask.n_len}"
            )
        report["spark"] = analysis.spark_brute_force(partial_matrix(mask, range(mask.n_len)).entries)
    if args.rip is not None:
        report["rip_order"] = args.rip
        report["rip_constant"] = analysis.rip_constant_brute_force(mask, args.rip)
    files = {}
    if args.format in ("json", "both"):
        files["analysis.json"] = dumps_json(report)
    if args.format in ("csv", "both"):
        lines = ["metric,value"]
        for key, value in report.items():
            if isinstance(value, (int, float)):
                lines.append(f"{key},{format(float(value), '.17g')}")
        files["analysis.csv"] = "\n".join(lines) + "\n"
    _write_outputs(Path(args.out), files)
    print(f"N={mask.n_len} M={mask.m} mu={mu:.4f} welch={report['welch_ratio']:.4f} "
          f"spark_bound={report['spark_sparsity_bound']:.4f}")
    return EXIT_OK


def _load_config(args) -> ExperimentConfig:
    if args.preset:
        data = preset(args.preset).as_dict()
    else:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: expected a JSON object of key-value pairs")
        ExperimentConfig.from_dict(data)
    overrides = {
        "trials": args.trials,
        "master_seed": args.seed,
        "n_len": args.n_len,
        "k_sparsity": args.k_sparsity,
        "epsilon": args.epsilon,
        "threshold": args.threshold,
    }
    if args.m is not None:
        overrides["m_list"] = parse_index_list(args.m)
    if args.noise_variance is not None:
        overrides["noise_variances"] = [float(v) for v in args.noise_variance.replace(",", " ").split()]
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> int:
    config = _load_config(args)
    report = run(config)
    files = {}
    if args.format in ("json", "both"):
        files["report.json"] = report.to_json()
    if args.format in ("csv", "both"):
        files["report.csv"] = report.to_csv()
        if report.histograms:
            files["histogram.csv"] = report.histogram_csv()
    _write_outputs(Path(args.out), files)
    for line in report.summary_lines():
        print(line)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"recover": cmd_recover, "analyze": cmd_analyze, "experiment": cmd_experiment}[args.command]
    try:
        return handler(args)
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (FormatError, ConfigError, UsageError, RecoveryError, SingularSystemError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
